//! Restrictive entropic risk measure, evaluated in floating point through
//! its closed-form box corners.

use crate::error::{Error, Result};
use crate::num::Rat;
use crate::scenario::{NodeId, NodeVector, ScenarioTree, VectorMeasure};

/// `log Σ_k p_k exp(a_k)`, shifted by the maximum to avoid overflow.
pub fn log_sum_exp(probs: &[f64], a: &[f64]) -> f64 {
    let mx = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    let s: f64 = probs.iter().zip(a).map(|(p, x)| p * (x - mx).exp()).sum();
    mx + s.ln()
}

pub(crate) fn check_rates(tree: &ScenarioTree, rates: &[f64]) -> Result<()> {
    if rates.len() != tree.d() {
        return Err(Error::Dimension("one entropic rate per component expected".into()));
    }
    if rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::Model("entropic rates must be positive".into()));
    }
    if tree.m() != tree.d() {
        return Err(Error::Unsupported("the entropic family needs every asset eligible".into()));
    }
    Ok(())
}

/// Corners `r_t,i(n) = (1/λ_i) log E[exp(−λ_i X_i) | n]` at time `t`.
pub fn risk_entropic(tree: &ScenarioTree, x: &NodeVector<f64>, rates: &[f64], t: usize) -> Result<NodeVector<f64>> {
    check_rates(tree, rates)?;
    let s = x.time();
    tree.check_times(t, s)?;
    Ok(NodeVector::from_fn(tree, t, |n| {
        let desc = tree.descendants_at(n, s);
        let probs: Vec<f64> = desc.clone().map(|c| crate::num::rat_to_f64(&tree.cond_prob(c, n))).collect();
        (0..tree.d())
            .map(|i| {
                let a: Vec<f64> = desc.clone().map(|c| -rates[i] * x.at(tree, c)[i]).collect();
                log_sum_exp(&probs, &a) / rates[i]
            })
            .collect()
    }))
}

/// Corners at every time from the one-step recursion `r_t = ρ_t(−r_{t+1})`.
pub fn compose_entropic(tree: &ScenarioTree, x: &NodeVector<f64>, rates: &[f64]) -> Result<Vec<NodeVector<f64>>> {
    check_rates(tree, rates)?;
    let horizon = tree.horizon();
    if x.time() != horizon {
        return Err(Error::Index("portfolio must be terminal".into()));
    }
    let mut out = vec![x.map(|v| -v)];
    for t in (0..horizon).rev() {
        let next = out.last().unwrap();
        let r = NodeVector::from_fn(tree, t, |n| {
            let ch = tree.children(n);
            let probs: Vec<f64> = ch.iter().map(|&c| crate::num::rat_to_f64(tree.p(c))).collect();
            (0..tree.d())
                .map(|i| {
                    let a: Vec<f64> = ch.iter().map(|&c| rates[i] * next.at(tree, c)[i]).collect();
                    log_sum_exp(&probs, &a) / rates[i]
                })
                .collect()
        });
        out.push(r);
    }
    out.reverse();
    Ok(out)
}

/// Conditional relative entropy of `Q_i` with respect to `P` between the
/// node `n` and its descendants at time `s`, using the same zero-mass
/// convention as the density ratios.
pub fn cond_entropy(tree: &ScenarioTree, q: &VectorMeasure, i: usize, n: NodeId, s: usize) -> f64 {
    let t = tree.time(n);
    let mut h = 0.0;
    for c in tree.descendants_at(n, s) {
        let xi = &crate::scenario::xi_at(tree, q, t, c)[i];
        if *xi == Rat::from_integer(0.into()) {
            continue;
        }
        let xf = crate::num::rat_to_f64(xi);
        let p = crate::num::rat_to_f64(&tree.cond_prob(c, n));
        h += p * xf * xf.ln();
    }
    h
}

/// The Gibbs tilt `dQ_i/dP ∝ exp(−λ_i X_i)` of a terminal portfolio.
pub fn gibbs_measure(tree: &ScenarioTree, x: &NodeVector<f64>, rates: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_rates(tree, rates)?;
    let horizon = tree.horizon();
    // Conditional transitions of the tilt: q(c | n) = p(c) Z(c) / Z(n) with
    // Z(n) = E[exp(−λ X) | n], computed in log space.
    let mut out = Vec::with_capacity(tree.d());
    for i in 0..tree.d() {
        let mut logz = vec![0.0; tree.len()];
        for l in tree.nodes_at(horizon) {
            logz[l] = -rates[i] * x.at(tree, l)[i];
        }
        for t in (0..horizon).rev() {
            for n in tree.nodes_at(t) {
                let ch = tree.children(n);
                let probs: Vec<f64> = ch.iter().map(|&c| crate::num::rat_to_f64(tree.p(c))).collect();
                let a: Vec<f64> = ch.iter().map(|&c| logz[c]).collect();
                logz[n] = log_sum_exp(&probs, &a);
            }
        }
        let mut q = vec![1.0; tree.len()];
        for (c, qc) in q.iter_mut().enumerate().skip(1) {
            let par = tree.parent(c).unwrap();
            *qc = crate::num::rat_to_f64(tree.p(c)) * (logz[c] - logz[par]).exp();
        }
        out.push(q);
    }
    Ok(out)
}
