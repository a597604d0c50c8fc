#![allow(dead_code)]

pub mod laws;

use proptest::prelude::*;
use riskset::num::{int, rat, Rat};
use riskset::scenario::{NodeVector, ScenarioTree, VectorMeasure};

/// Tree with the given branching, child weights cycling through `weights`.
pub fn weighted_tree(branching: &[usize], weights: &[i64], d: usize, m: usize) -> ScenarioTree {
    let mut entries = vec![("r".to_string(), None, int(1))];
    let mut frontier = vec!["r".to_string()];
    let mut next_w = weights.iter().cycle();
    for &k in branching {
        let mut next = Vec::new();
        for par in &frontier {
            let w: Vec<i64> = (0..k).map(|_| *next_w.next().unwrap()).collect();
            let total: i64 = w.iter().sum();
            for (c, wc) in w.iter().enumerate() {
                let name = format!("{par}{c}");
                entries.push((name.clone(), Some(par.clone()), rat(*wc, total)));
                next.push(name);
            }
        }
        frontier = next;
    }
    ScenarioTree::from_edges(d, m, &entries).unwrap()
}

pub fn tree(max_t: usize, max_k: usize, d: usize, m: usize) -> impl Strategy<Value = ScenarioTree> {
    (prop::collection::vec(1..=max_k, 1..=max_t), prop::collection::vec(1i64..=4, 1..=7))
        .prop_map(move |(b, w)| weighted_tree(&b, &w, d, m))
}

/// Terminal position with small integer entries drawn from `vals`.
pub fn terminal(tree: &ScenarioTree, vals: &[i64]) -> NodeVector<Rat> {
    let d = tree.d();
    let h = tree.horizon();
    let mut it = vals.iter().cycle();
    NodeVector::from_fn(tree, h, |_| (0..d).map(|_| int(*it.next().unwrap())).collect())
}

/// A measure whose transitions are proportional to the cycled weights
/// (zero weights allowed as long as one child keeps mass).
pub fn measure(tree: &ScenarioTree, weights: &[i64]) -> VectorMeasure {
    let mut it = weights.iter().cycle();
    let trans = (0..tree.d())
        .map(|_| {
            let mut q: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
            for n in 0..tree.len() {
                let ch = tree.children(n);
                if ch.is_empty() {
                    continue;
                }
                let mut w: Vec<i64> = ch.iter().map(|_| *it.next().unwrap()).collect();
                if w.iter().all(|&x| x == 0) {
                    w[0] = 1;
                }
                let total: i64 = w.iter().sum();
                for (&c, wc) in ch.iter().zip(w) {
                    q[c] = rat(wc, total);
                }
            }
            q
        })
        .collect();
    VectorMeasure::new(tree, trans).unwrap()
}

/// AV@R of losses by filling the largest losses with density `1/λ` first.
pub fn avar_greedy(probs: &[Rat], losses: &[Rat], lambda: &Rat) -> Rat {
    let mut idx: Vec<usize> = (0..probs.len()).collect();
    idx.sort_by(|&a, &b| losses[b].cmp(&losses[a]));
    let cap = lambda.recip();
    let mut mass = int(0);
    let mut acc = int(0);
    for i in idx {
        let room = int(1) - &mass;
        if room <= int(0) {
            break;
        }
        let take = (&probs[i] * &cap).min(room);
        acc += &take * &losses[i];
        mass += take;
    }
    acc
}

pub fn instance_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

pub fn instance(name: &str) -> riskset::instance::Instance {
    riskset::instance::Instance::from_path(&instance_path(name)).unwrap()
}
