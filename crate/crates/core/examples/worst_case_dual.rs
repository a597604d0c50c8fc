//! Worst-case dual pairs from the scalarization LP and the martingale
//! property of `V` along them.

use riskset::consistency::{check_martingale_worstcase, check_supermartingale, find_worst_case_dual, v_process, ProcessKind};
use riskset::duals::DualPair;
use riskset::num::rat;
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scenario::{NodeVector, ScenarioTree, VectorMeasure};

fn main() -> riskset::Result<()> {
    let tree = ScenarioTree::uniform(&[2, 2], 2, 2)?;
    let levels = vec![vec![rat(1, 2), rat(2, 3)], vec![rat(1, 3), rat(3, 4)]];
    let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels, composed: true })?;
    let x = NodeVector::new(&tree, 2, vec![vec![rat(-3, 1), rat(1, 1)], vec![rat(1, 1), rat(-2, 1)], vec![rat(2, 1), rat(0, 1)], vec![rat(-1, 2), rat(1, 1)]])?;

    let pair = find_worst_case_dual(&eng, &x, &[rat(1, 1), rat(2, 1)])?;
    let proc = v_process(&eng, &pair, &x)?;
    println!("thresholds along the worst-case pair: {}", proc.totals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "));
    let rep = check_martingale_worstcase(&eng, &pair, &x)?;
    println!("martingale: {:?} {}", rep.verdict, rep.note.unwrap_or_default());

    // move some mass and the martingale turns into a strict supermartingale
    let mut trans = pair.q.transitions().to_vec();
    for q in &mut trans {
        let (a, b) = (q[1].clone(), q[2].clone());
        q[1] = (a.clone() * rat(3, 1) + b.clone()) * rat(1, 4);
        q[2] = (a + b * rat(3, 1)) * rat(1, 4);
    }
    let perturbed = DualPair::new(&tree, VectorMeasure::new(&tree, trans)?, pair.w.clone())?;
    for s in 1..=2 {
        let rep = check_supermartingale(&eng, &perturbed, &x, s, ProcessKind::V)?;
        println!("perturbed pair, s = {s}: gap {}", rep.gap.map(|g| g.to_string()).unwrap_or_default());
    }
    Ok(())
}
