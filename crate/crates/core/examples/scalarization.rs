//! Scalarizations `ρ_t(X) = inf E[w·u]` over `R_t(X)` by the primal LP and
//! its dual, with the dual pair read off the multipliers.

use riskset::duals::{in_wt, OrthComplement};
use riskset::num::rat;
use riskset::polycalc::format_vec;
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scalarize::{check_stepped_duality, rho, rho_dual_value};
use riskset::scenario::{NodeVector, ScenarioTree};

fn main() -> riskset::Result<()> {
    // two assets, only the first one eligible; the second is never short
    let tree = ScenarioTree::uniform(&[2, 2], 2, 1)?;
    let levels = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(2, 3), rat(1, 2)]];
    let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels, composed: true })?;
    let x = NodeVector::new(&tree, 2, vec![vec![rat(-1, 1), rat(2, 1)], vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)], vec![rat(2, 1), rat(3, 1)]])?;
    for t in 0..2 {
        let w = NodeVector::constant(&tree, t, vec![rat(1, 1), rat(0, 1)]);
        let r = rho(&eng, &x, &w)?;
        println!("t = {t}: primal {}, dual {:?}, gap {:?}", r.primal, r.dual.map(|d| d.to_string()), r.gap.map(|g| g.to_string()));
        if let Some(u) = &r.u {
            println!("  minimizer {}", u.values().iter().map(|v| format_vec(v)).collect::<Vec<_>>().join(" "));
        }
        if let Some(pair) = &r.pair {
            println!("  pair in W_t: {}", in_wt(&tree, pair).member);
            let back = rho_dual_value(&eng, &x, pair, &OrthComplement::zero(&tree, t))?;
            println!("  dual objective of the pair: {back}");
        }
    }
    let xs = NodeVector::new(&tree, 1, vec![vec![rat(-1, 1), rat(0, 1)], vec![rat(2, 1), rat(0, 1)]])?;
    let sd = check_stepped_duality(&eng, &xs, &NodeVector::constant(&tree, 0, vec![rat(1, 1), rat(0, 1)]))?;
    println!("stepped: primal {}, dual {}, full {}", sd.primal, sd.dual, sd.full_primal);
    Ok(())
}
