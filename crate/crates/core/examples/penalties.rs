//! Penalty thresholds and the cocycle identity for a convex non-coherent
//! family given by custom one-step acceptance sets.

use riskset::consistency::{alpha, beta, check_cocycle, stepped_penalty, PenaltyKind};
use riskset::duals::{sample_dual_pairs, SamplerConfig};
use riskset::num::rat;
use riskset::polycalc::{ivec, Polyhedron, Row};
use riskset::riskmeasures::{RiskEngine, RiskModel};
use riskset::scenario::ScenarioTree;

fn main() -> riskset::Result<()> {
    let tree = ScenarioTree::uniform(&[2, 2], 1, 1)?;
    // accept (y0, y1) when both are >= -1 and y0 + 2 y1 >= 0
    let one_step = Polyhedron::from_hrep(
        2,
        vec![Row::new(ivec(&[1, 0]), rat(-1, 1)), Row::new(ivec(&[0, 1]), rat(-1, 1)), Row::new(ivec(&[1, 2]), rat(0, 1))],
    );
    let sets = (0..tree.len()).map(|n| (!tree.children(n).is_empty()).then(|| one_step.clone())).collect();
    let eng = RiskEngine::new(tree.clone(), RiskModel::Custom { one_step: sets })?;
    for (k, pair) in sample_dual_pairs(&tree, 0, 6, 9, &SamplerConfig::default()).iter().enumerate() {
        let b = beta(&eng, pair)?;
        let a = alpha(&eng, pair)?;
        let step = stepped_penalty(&eng, pair, 1)?;
        let rep = check_cocycle(&eng, pair, 1, PenaltyKind::Beta)?;
        println!("pair {k}: beta_0 = {}, alpha_0 = {}, beta_0,1 = {}, cocycle {:?}", b.total, a.total, step.total, rep.verdict);
    }
    Ok(())
}
