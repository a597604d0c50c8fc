//! Supermartingale checks of `V` and `𝕍` on an instance file over sampled
//! dual pairs.
//!
//!     cargo run --example supermartingale_check -- instances/avar_tree.json

use std::path::PathBuf;

use riskset::consistency::{check_supermartingale, ProcessKind, Verdict};
use riskset::instance::Instance;

fn main() -> riskset::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances/avar_tree.json")
    });
    let inst = Instance::from_path(&path)?;
    let horizon = inst.tree().horizon();
    for (name, x) in &inst.portfolios {
        for t in 0..horizon {
            for kind in [ProcessKind::V, ProcessKind::Vc] {
                let mut worst = None;
                let mut fails = 0;
                let pairs = inst.pairs_at(t, None, None);
                for pair in &pairs {
                    let rep = check_supermartingale(&inst.engine, pair, x, t + 1, kind)?;
                    if rep.verdict == Verdict::Fail {
                        fails += 1;
                    }
                    let g = rep.gap.map(|g| g.to_f64()).unwrap_or(f64::INFINITY);
                    worst = Some(worst.map_or(g, |w: f64| w.min(g)));
                }
                println!("{name} {kind:?} t={t} s={}: {} pairs, {fails} failures, smallest gap {:?}", t + 1, pairs.len(), worst);
            }
        }
    }
    Ok(())
}
