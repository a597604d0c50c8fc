//! Composed and non-composed multivariate AV@R on a binary tree.
//!
//! With every asset eligible both are translated orthants; the composed
//! version is the backward recursion of one-step AV@Rs, the other applies a
//! single AV@R to the whole remaining subtree.

use riskset::num::{fmt_rat, rat};
use riskset::polycalc::format_vec;
use riskset::riskmeasures::{NodeSet, RiskEngine, RiskModel};
use riskset::scenario::{NodeVector, ScenarioTree};

fn main() -> riskset::Result<()> {
    let tree = ScenarioTree::uniform(&[2, 2], 2, 2)?;
    let levels = vec![vec![rat(1, 2), rat(1, 4)], vec![rat(1, 2), rat(1, 4)]];
    let x = NodeVector::new(&tree, 2, vec![vec![rat(-4, 1), rat(1, 1)], vec![rat(2, 1), rat(0, 1)], vec![rat(0, 1), rat(-2, 1)], vec![rat(1, 1), rat(3, 1)]])?;
    for composed in [true, false] {
        let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: levels.clone(), composed })?;
        println!("{}", eng.model().name());
        let proc = eng.risk_process(&x)?;
        for n in 0..tree.len() {
            if let NodeSet::Poly(p) = proc.at(&tree, n) {
                println!("  R_{}(X)({}) = {} + R^2_+", tree.time(n), tree.name(n), format_vec(&p.as_corner().unwrap()));
            }
        }
    }
    // the same corner through the acceptance set of the root
    let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels, composed: true })?;
    let a = eng.acceptance(0)?;
    println!("root acceptance set: {} facets, {} rays", a.hrep().ineqs.len(), a.vrep().rays.len());
    let r = eng.risk_at(&x, 0)?;
    println!("via acceptance: {}", format_vec(&r.as_corner().unwrap()));
    println!("inf (1,1).u = {}", fmt_rat(r.support_value(&[rat(1, 1), rat(1, 1)]).finite().unwrap()));
    Ok(())
}
