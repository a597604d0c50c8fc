//! Superhedging under proportional transaction costs with two assets:
//! the backward recursion against the stacked strategy LP.

use riskset::num::rat;
use riskset::polycalc::format_vec;
use riskset::riskmeasures::shp::{bid_ask_cone, shp_lp_support, shp_matches_oracle, shp_recursion};
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scenario::{NodeVector, ScenarioTree};

fn main() -> riskset::Result<()> {
    let tree = ScenarioTree::uniform(&[2, 2], 2, 2)?;
    let market: Vec<_> = (0..tree.len())
        .map(|n| {
            let spread = rat(1, 1) + rat(tree.time(n) as i64 + 1, 4);
            bid_ask_cone(&spread, &(rat(3, 2) / &spread))
        })
        .collect();
    // short a claim paying two units of asset 2 in the up-up state
    let x = NodeVector::new(&tree, 2, vec![vec![rat(0, 1), rat(-2, 1)], vec![rat(0, 1), rat(0, 1)], vec![rat(-1, 1), rat(0, 1)], vec![rat(0, 1), rat(0, 1)]])?;
    let (sets, empty) = shp_recursion(&tree, &market, &x)?;
    println!("first empty node: {:?}", empty.map(|n| tree.name(n)));
    let root = sets[0].poly();
    for v in &root.vrep().vertices {
        println!("SHP_0 vertex {}", format_vec(v));
    }
    for r in &root.vrep().rays {
        println!("SHP_0 ray    {}", format_vec(r));
    }
    println!("matches the strategy LP: {}", shp_matches_oracle(&tree, &market, &x, 0, root));
    for w in [[6, 7], [5, 6], [1, 1]] {
        let w = [rat(w[0], 1), rat(w[1], 1)];
        println!("inf {}.u: recursion {}, LP {}", format_vec(&w), root.support_value(&w), shp_lp_support(&tree, &market, &x, 0, &w));
    }
    let eng = RiskEngine::new(tree.clone(), RiskModel::Shp { market })?;
    println!("through acceptance sets: same set = {}", eng.risk_at(&x, 0)?.poly().set_eq(root));
    Ok(())
}
