//! Building a scenario tree, adapted vectors, vector measures and
//! conditional expectations.

use riskset::num::{fmt_rat, rat};
use riskset::polycalc::format_vec;
use riskset::scenario::{cond_expect, w_ts, xi, NodeVector, ScenarioTree, VectorMeasure};

fn main() -> riskset::Result<()> {
    // an unbalanced two-period tree
    let edges = vec![
        ("root".to_string(), None, rat(1, 1)),
        ("up".to_string(), Some("root".to_string()), rat(1, 3)),
        ("down".to_string(), Some("root".to_string()), rat(2, 3)),
        ("uu".to_string(), Some("up".to_string()), rat(1, 2)),
        ("ud".to_string(), Some("up".to_string()), rat(1, 2)),
        ("dd".to_string(), Some("down".to_string()), rat(1, 1)),
    ];
    let tree = ScenarioTree::from_edges(2, 1, &edges)?;
    for n in 0..tree.len() {
        println!("{:>5}  t={}  P={}", tree.name(n), tree.time(n), fmt_rat(tree.prob(n)));
    }

    let x = NodeVector::new(&tree, 2, vec![vec![rat(3, 1), rat(0, 1)], vec![rat(-1, 1), rat(2, 1)], vec![rat(1, 2), rat(1, 1)]])?;
    for t in 0..=2 {
        let e = cond_expect(&tree, &VectorMeasure::reference(&tree), &x, t)?;
        let shown: Vec<String> = e.values().iter().map(|v| format_vec(v)).collect();
        println!("E[X | F_{t}] = {}", shown.join(" "));
    }

    // tilt the first component towards "up"
    let mut trans = VectorMeasure::reference(&tree).transitions().to_vec();
    trans[0][1] = rat(1, 2);
    trans[0][2] = rat(1, 2);
    let q = VectorMeasure::new(&tree, trans)?;
    let dens = xi(&tree, &q, 0, 2)?;
    println!("xi_0,2(Q) at the leaves: {}", dens.values().iter().map(|v| format_vec(v)).collect::<Vec<_>>().join(" "));
    let w = NodeVector::constant(&tree, 0, vec![rat(1, 1), rat(2, 1)]);
    let w2 = w_ts(&tree, &q, &w, 2)?;
    println!("w_0^2(Q, w): {}", w2.values().iter().map(|v| format_vec(v)).collect::<Vec<_>>().join(" "));
    let eq = cond_expect(&tree, &q, &x, 0)?;
    println!("E^Q[X] = {}", format_vec(&eq.values()[0]));
    println!("{}", serde_json::to_string(&tree.to_json()).unwrap());
    Ok(())
}
