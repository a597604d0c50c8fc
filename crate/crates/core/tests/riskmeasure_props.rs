mod common;

use proptest::prelude::*;
use riskset::num::{int, rat, Rat};
use riskset::polycalc::Polyhedron;
use riskset::riskmeasures::entropic::{compose_entropic, risk_entropic};
use riskset::riskmeasures::shp::{bid_ask_cone, shp_matches_oracle, shp_recursion};
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scenario::{NodeVector, ScenarioTree};

fn level() -> impl Strategy<Value = Rat> {
    (1i64..=4).prop_map(|k| rat(k, 4))
}

/// Composed AV@R corners by applying the greedy formula one step at a time.
fn composed_oracle(tree: &ScenarioTree, x: &NodeVector<Rat>, levels: &[Vec<Rat>], t: usize) -> Vec<Vec<Rat>> {
    let h = tree.horizon();
    let mut loss: Vec<Vec<Rat>> = (0..tree.len()).map(|_| vec![]).collect();
    for l in tree.nodes_at(h) {
        loss[l] = x.at(tree, l).iter().map(|v| -v).collect();
    }
    for s in (t..h).rev() {
        for n in tree.nodes_at(s) {
            let ch = tree.children(n);
            let probs: Vec<Rat> = ch.iter().map(|&c| tree.p(c).clone()).collect();
            loss[n] = (0..tree.d())
                .map(|i| {
                    let li: Vec<Rat> = ch.iter().map(|&c| loss[c][i].clone()).collect();
                    common::avar_greedy(&probs, &li, &levels[s][i])
                })
                .collect();
        }
    }
    tree.nodes_at(t).map(|n| loss[n].clone()).collect()
}

fn vanilla_oracle(tree: &ScenarioTree, x: &NodeVector<Rat>, levels: &[Rat], t: usize) -> Vec<Vec<Rat>> {
    tree.nodes_at(t)
        .map(|n| {
            let probs: Vec<Rat> = tree.leaves(n).map(|l| tree.cond_prob(l, n)).collect();
            (0..tree.d())
                .map(|i| {
                    let li: Vec<Rat> = tree.leaves(n).map(|l| -x.at(tree, l)[i].clone()).collect();
                    common::avar_greedy(&probs, &li, &levels[i])
                })
                .collect()
        })
        .collect()
}

fn custom_engine(tree: &ScenarioTree) -> RiskEngine {
    // one child coordinate may go to −1 as long as the sum stays nonnegative
    let one_step = (0..tree.len())
        .map(|n| {
            let k = tree.children(n).len();
            if k == 0 {
                return None;
            }
            let mut rows = Vec::new();
            for j in 0..k {
                let mut e = vec![int(0); k];
                e[j] = int(1);
                rows.push(riskset::polycalc::Row::new(e, int(-1)));
            }
            rows.push(riskset::polycalc::Row::new(vec![int(1); k], int(0)));
            Some(Polyhedron::from_hrep(k, rows))
        })
        .collect();
    RiskEngine::new(tree.with_eligible(1).unwrap(), RiskModel::Custom { one_step }).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn composed_avar_matches_greedy(
        tree in common::tree(3, 2, 2, 2),
        vals in prop::collection::vec(-6i64..=6, 1..16),
        lv in prop::collection::vec(level(), 6),
    ) {
        let h = tree.horizon();
        let levels: Vec<Vec<Rat>> = (0..h).map(|t| vec![lv[2 * t].clone(), lv[2 * t + 1].clone()]).collect();
        let engine = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: levels.clone(), composed: true }).unwrap();
        let x = common::terminal(&tree, &vals);
        for t in 0..=h {
            let want = composed_oracle(&tree, &x, &levels, t);
            let corners = engine.corners(&x, t).unwrap().unwrap();
            prop_assert_eq!(corners.values(), &want[..]);
            // the acceptance-set route gives the same box
            for (k, n) in tree.nodes_at(t).enumerate() {
                prop_assert_eq!(engine.risk_at(&x, n).unwrap().as_corner(), Some(want[k].clone()));
            }
        }
    }

    #[test]
    fn vanilla_avar_matches_greedy(
        tree in common::tree(2, 2, 2, 2),
        vals in prop::collection::vec(-6i64..=6, 1..16),
        lv in prop::collection::vec(level(), 4),
    ) {
        let h = tree.horizon();
        let levels: Vec<Vec<Rat>> = (0..h).map(|t| vec![lv[2 * t].clone(), lv[2 * t + 1].clone()]).collect();
        let engine = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: levels.clone(), composed: false }).unwrap();
        let x = common::terminal(&tree, &vals);
        for t in 0..h {
            let want = vanilla_oracle(&tree, &x, &levels[t], t);
            let corners = engine.corners(&x, t).unwrap().unwrap();
            prop_assert_eq!(corners.values(), &want[..]);
            for (k, n) in tree.nodes_at(t).enumerate() {
                prop_assert_eq!(engine.risk_at(&x, n).unwrap().as_corner(), Some(want[k].clone()));
            }
        }
    }

    #[test]
    fn translative_monotone_normalized(
        tree in common::tree(2, 2, 1, 1),
        vals in prop::collection::vec(-4i64..=4, 1..8),
        bump in prop::collection::vec(0i64..=3, 1..5),
        shift in -3i64..=3,
    ) {
        let engines = [
            custom_engine(&tree),
            RiskEngine::new(tree.clone(), RiskModel::Avar { levels: vec![vec![rat(1, 2)]; tree.horizon()], composed: true }).unwrap(),
        ];
        let h = tree.horizon();
        let x = common::terminal(&tree, &vals);
        let y = x.zip_with(&common::terminal(&tree, &bump), |a, b| a + b).unwrap();
        for engine in &engines {
            for t in 0..=h {
                for n in tree.nodes_at(t) {
                    let rx = engine.risk_at(&x, n).unwrap();
                    // R_t(X + c) = R_t(X) − c for F_t-measurable c
                    let xc = x.map(|v| v + int(shift));
                    prop_assert!(engine.risk_at(&xc, n).unwrap().poly().set_eq(rx.translate(&[int(-shift)]).poly()));
                    // X ≤ Y gives R_t(X) ⊆ R_t(Y)
                    prop_assert!(engine.risk_at(&y, n).unwrap().contains(&rx).is_ok());
                    let zero = NodeVector::zeros(&tree, h);
                    prop_assert_eq!(engine.risk_at(&zero, n).unwrap().as_corner(), Some(vec![int(0)]));
                }
            }
        }
    }

    #[test]
    fn entropic_composition_matches_direct(
        tree in common::tree(3, 3, 2, 2),
        vals in prop::collection::vec(-30i64..=30, 1..20),
        r in prop::collection::vec(1u32..=20, 2),
    ) {
        let h = tree.horizon();
        let rates: Vec<f64> = r.iter().map(|&k| k as f64 / 10.0).collect();
        let x = common::terminal(&tree, &vals).map(|v| v / int(10)).to_float();
        let comp = compose_entropic(&tree, &x, &rates).unwrap();
        for t in 0..=h {
            let direct = risk_entropic(&tree, &x, &rates, t).unwrap();
            for (a, b) in comp[t].values().iter().flatten().zip(direct.values().iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shp_recursion_matches_strategy_lp(
        spreads in prop::collection::vec((1i64..=4, 1i64..=4), 1..4),
        vals in prop::collection::vec(-3i64..=3, 1..9),
    ) {
        let tree = ScenarioTree::uniform(&[2, 2], 2, 2).unwrap();
        let market: Vec<Polyhedron> = (0..tree.len())
            .map(|n| {
                let (a, b) = &spreads[n % spreads.len()];
                // (a', −1) and (−1, b') with a'·b' ≥ 1 keeps the cone pointed
                let a = rat(*a + 1, 2);
                let b = a.recip() + rat(*b, 4);
                bid_ask_cone(&a, &b)
            })
            .collect();
        let x = common::terminal(&tree, &vals);
        let (sets, _) = shp_recursion(&tree, &market, &x).unwrap();
        for n in [0, 1] {
            prop_assert!(shp_matches_oracle(&tree, &market, &x, n, sets[n].poly()));
        }
    }
}

#[test]
fn entropic_log_cosh() {
    let tree = ScenarioTree::uniform(&[2], 1, 1).unwrap();
    for a in [0.5, 1.0, 3.0] {
        let x = NodeVector::new(&tree, 1, vec![vec![a], vec![-a]]).unwrap();
        let r = risk_entropic(&tree, &x, &[1.0], 0).unwrap();
        assert!((r.values()[0][0] - a.cosh().ln()).abs() < 1e-12);
    }
}

#[test]
fn avar_level_one_is_expectation() {
    let tree = common::weighted_tree(&[3, 2], &[1, 2, 5], 1, 1);
    let engine = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: vec![vec![int(1)]; 2], composed: true }).unwrap();
    let x = common::terminal(&tree, &[4, -1, 0, 7, -3]);
    let mean: Rat = tree.nodes_at(2).map(|l| tree.prob(l) * &x.at(&tree, l)[0]).sum();
    assert_eq!(engine.corners(&x, 0).unwrap().unwrap().values()[0][0], -mean);
}
