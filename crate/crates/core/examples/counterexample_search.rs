//! Randomized search for a non-composed AV@R instance that is not
//! multiportfolio time consistent.
//!
//! Trees have two periods and two or three children per node, one or two
//! assets. A candidate is kept when the acceptance sets at (0, 1) are
//! strictly nested instead of equal and some sampled dual pair breaks the
//! supermartingale property of `V`. The first hit is printed as an instance
//! file.
//!
//!     cargo run --example counterexample_search -- [seed] [tries]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riskset::consistency::{check_mptc_direct, check_supermartingale, ProcessKind, Verdict};
use riskset::duals::{sample_dual_pairs, SamplerConfig};
use riskset::instance::{DualSpec, InstanceFile, ModelSpec, SamplerSpec, TreeSpec};
use riskset::num::{fmt_rat, rat, Rat};
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scenario::{NodeVector, ScenarioTree};

const PAIRS: usize = 16;
const LEVELS: [(i64, i64); 5] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)];

struct Candidate {
    branching: Vec<usize>,
    d: usize,
    levels: Vec<Vec<Rat>>,
    x: Vec<Vec<Rat>>,
}

fn draw(rng: &mut ChaCha8Rng) -> Candidate {
    let branching = vec![rng.gen_range(2..=3), rng.gen_range(2..=3)];
    let d = rng.gen_range(1..=2);
    let levels = (0..2)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let (a, b) = LEVELS[rng.gen_range(0..LEVELS.len())];
                    rat(a, b)
                })
                .collect()
        })
        .collect();
    let leaves = branching[0] * branching[1];
    let x = (0..leaves).map(|_| (0..d).map(|_| rat(rng.gen_range(-2..=2), 1)).collect()).collect();
    Candidate { branching, d, levels, x }
}

/// Index of the first sampled pair with a negative gap, if the candidate
/// breaks time consistency.
fn violates(c: &Candidate, seed: u64) -> Option<usize> {
    let tree = ScenarioTree::uniform(&c.branching, c.d, c.d).ok()?;
    let x = NodeVector::new(&tree, 2, c.x.clone()).ok()?;
    let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: c.levels.clone(), composed: false }).ok()?;
    let direct = check_mptc_direct(&eng, &x, 0, 1).ok()?;
    if direct.verdict != Verdict::Fail || !direct.note?.starts_with("strict inclusion") {
        return None;
    }
    let pairs = sample_dual_pairs(&tree, 0, PAIRS, seed, &SamplerConfig::default());
    pairs.iter().position(|p| {
        check_supermartingale(&eng, p, &x, 1, ProcessKind::V).is_ok_and(|r| r.verdict == Verdict::Fail)
    })
}

fn to_instance(c: &Candidate, seed: u64) -> InstanceFile {
    let tree = ScenarioTree::uniform(&c.branching, c.d, c.d).unwrap();
    let x: BTreeMap<String, Vec<String>> =
        tree.nodes_at(2).zip(&c.x).map(|(n, v)| (tree.name(n).to_string(), v.iter().map(fmt_rat).collect())).collect();
    InstanceFile {
        name: "avar-vanilla-counterexample".into(),
        tree: TreeSpec::Uniform { branching: c.branching.clone(), d: c.d, m: c.d },
        portfolios: BTreeMap::from([("X".to_string(), x)]),
        model: ModelSpec::Avar { levels: c.levels.iter().map(|l| l.iter().map(fmt_rat).collect()).collect(), composed: false },
        duals: DualSpec { pairs: vec![], sampler: Some(SamplerSpec { count: PAIRS, seed, config: None }) },
        checks: vec![],
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let tries: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..tries {
        let c = draw(&mut rng);
        if let Some(p) = violates(&c, seed) {
            eprintln!("hit after {} candidates, pair {p} has a negative gap", k + 1);
            println!("{}", serde_json::to_string_pretty(&to_instance(&c, seed)).unwrap());
            return;
        }
    }
    eprintln!("no counterexample in {tries} candidates");
    std::process::exit(1);
}
