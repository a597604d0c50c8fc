//! Entropic risk measure: closed form corners, composition and the Gibbs
//! worst-case measure.

use riskset::consistency::{check_martingale_worstcase, find_worst_case_dual, v_process};
use riskset::num::rat;
use riskset::riskmeasures::entropic::{compose_entropic, risk_entropic};
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scenario::{NodeVector, ScenarioTree};

fn main() -> riskset::Result<()> {
    let tree = ScenarioTree::uniform(&[2], 1, 1)?;
    let x = NodeVector::new(&tree, 1, vec![vec![1.0], vec![-1.0]])?;
    let r = risk_entropic(&tree, &x, &[1.0], 0)?;
    println!("X in {{1, -1}}, lambda = 1: corner {:.15}, log cosh 1 = {:.15}", r.values()[0][0], 1f64.cosh().ln());

    let tree = ScenarioTree::uniform(&[3, 2], 2, 2)?;
    let rates = [0.5, 2.0];
    let xr = NodeVector::from_fn(&tree, 2, |n| vec![rat(n as i64 % 3 - 1, 1), rat(2 - n as i64 % 4, 2)]);
    let xf = xr.to_float();
    let composed = compose_entropic(&tree, &xf, &rates)?;
    let direct = risk_entropic(&tree, &xf, &rates, 0)?;
    println!("root corner composed {:?}, direct {:?}", composed[0].values()[0], direct.values()[0]);

    let eng = RiskEngine::new(tree.clone(), RiskModel::Entropic { rates: rates.to_vec() })?;
    let pair = find_worst_case_dual(&eng, &xr, &[rat(1, 1), rat(1, 1)])?;
    let proc = v_process(&eng, &pair, &xr)?;
    println!("V thresholds along the Gibbs pair: {:?}", proc.totals.iter().map(|v| v.to_f64()).collect::<Vec<_>>());
    let rep = check_martingale_worstcase(&eng, &pair, &xr)?;
    println!("worst-case martingale: {:?}", rep.verdict);
    Ok(())
}
