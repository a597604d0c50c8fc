//! Dual pairs `(Q, w)`, membership tests for the dual sets, and
//! deterministic sampling of valid pairs.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::num::{dot, Rat};
use crate::polycalc::Polyhedron;
use crate::scenario::{xi_at, NodeId, NodeVector, ScenarioTree, VectorMeasure};

/// A vector probability measure together with a weight vector adapted at `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair {
    pub t: usize,
    pub q: VectorMeasure,
    pub w: NodeVector<Rat>,
}

/// A node vector supported on the non-eligible coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthComplement {
    m_perp: NodeVector<Rat>,
}

impl OrthComplement {
    pub fn new(tree: &ScenarioTree, m_perp: NodeVector<Rat>) -> Result<Self> {
        let m = tree.m();
        if m_perp.values().iter().any(|v| v[..m].iter().any(|x| !x.is_zero())) {
            return Err(Error::Dual("orthogonal complement has a nonzero eligible coordinate".into()));
        }
        Ok(OrthComplement { m_perp })
    }

    pub fn zero(tree: &ScenarioTree, t: usize) -> Self {
        OrthComplement { m_perp: NodeVector::zeros(tree, t) }
    }

    pub fn vector(&self) -> &NodeVector<Rat> {
        &self.m_perp
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// The first clause that failed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
}

impl Membership {
    fn yes() -> Self {
        Membership { member: true, failed: None, node: None }
    }

    fn no(clause: impl Into<String>, node: Option<String>) -> Self {
        Membership { member: false, failed: Some(clause.into()), node }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DualPairJson {
    pub t: usize,
    pub w: BTreeMap<String, Vec<String>>,
    #[serde(rename = "Q")]
    pub q: Vec<BTreeMap<String, String>>,
}

impl DualPair {
    pub fn new(tree: &ScenarioTree, q: VectorMeasure, w: NodeVector<Rat>) -> Result<Self> {
        if q.components() != tree.d() {
            return Err(Error::Dual("measure has the wrong number of components".into()));
        }
        Ok(DualPair { t: w.time(), q, w })
    }

    /// `(P, 1)` with weight one on every eligible coordinate.
    pub fn canonical(tree: &ScenarioTree, t: usize) -> Self {
        let m = tree.m();
        let w = NodeVector::constant(tree, t, (0..tree.d()).map(|i| if i < m { Rat::one() } else { Rat::zero() }).collect());
        DualPair { t, q: VectorMeasure::reference(tree), w }
    }

    pub fn to_json(&self, tree: &ScenarioTree) -> DualPairJson {
        DualPairJson { t: self.t, w: self.w.to_json(tree), q: self.q.to_json(tree) }
    }

    pub fn from_json(tree: &ScenarioTree, j: &DualPairJson) -> Result<Self> {
        let w = NodeVector::from_json(tree, j.t, &j.w)?;
        let q = VectorMeasure::from_json(tree, &j.q)?;
        Self::new(tree, q, w)
    }

    /// The pair at a later time `s`: weights `w_t^s(Q, w)` and the measure
    /// that agrees with `P` up to `s` and with `Q` after it.
    pub fn propagate(&self, tree: &ScenarioTree, s: usize) -> Result<DualPair> {
        let w = crate::scenario::w_ts(tree, &self.q, &self.w, s)?;
        // conditional expectations given F_s only see transitions after s
        let trans = self
            .q
            .transitions()
            .iter()
            .map(|q| (0..tree.len()).map(|n| if tree.time(n) <= s { tree.p(n).clone() } else { q[n].clone() }).collect())
            .collect();
        Ok(DualPair { t: s, q: VectorMeasure::new(tree, trans)?, w })
    }
}

/// `P(c | n) ξ_{time(n), s}(Q)(c)` for every descendant `c` of `n` at time
/// `s`: the conditional `Q`-weights used in `E[w_t^s · Y | n]`.
pub fn cond_weights(tree: &ScenarioTree, q: &VectorMeasure, n: NodeId, s: usize) -> Vec<Vec<Rat>> {
    let t = tree.time(n);
    tree.descendants_at(n, s)
        .map(|c| {
            let p = tree.cond_prob(c, n);
            xi_at(tree, q, t, c).into_iter().map(|x| x * &p).collect()
        })
        .collect()
}

/// The linear functional `Y ↦ E[w_t^s(Q,w)·Y | n]` on the stacked space of
/// `F_s`-measurable positions below `n` (index `pos * d + i`).
pub fn node_functional(tree: &ScenarioTree, q: &VectorMeasure, w: &[Rat], n: NodeId, s: usize) -> Vec<Rat> {
    cond_weights(tree, q, n, s)
        .into_iter()
        .flat_map(|cw| cw.into_iter().zip(w).map(|(a, b)| a * b).collect::<Vec<_>>())
        .collect()
}

/// Membership in the dual set `W_t`.
pub fn in_wt(tree: &ScenarioTree, pair: &DualPair) -> Membership {
    let t = pair.t;
    let m = tree.m();
    let mut any = false;
    for n in tree.nodes_at(t) {
        let w = pair.w.at(tree, n);
        if w.iter().any(|x| x.is_negative()) {
            return Membership::no("w is not nonnegative", Some(tree.name(n).into()));
        }
        if w[..m].iter().any(|x| x.is_positive()) {
            any = true;
        }
    }
    if !any {
        return Membership::no("w vanishes on the eligible subspace", None);
    }
    for s in t..=tree.horizon() {
        for c in tree.nodes_at(s) {
            let x = xi_at(tree, &pair.q, t, c);
            let w = pair.w.at_ancestor(tree, c);
            if w.iter().zip(&x).any(|(a, b)| (a * b).is_negative()) {
                return Membership::no("w_t^T(Q,w) is not nonnegative", Some(tree.name(c).into()));
            }
        }
    }
    if !pair.q.equals_reference_until(tree, t) {
        return Membership::no("Q differs from P on F_t", None);
    }
    Membership::yes()
}

/// Membership in `W_t^max` for a cone-valued acceptance family: the pair must
/// be nonnegative on every generator of `A_t(n)`.
pub fn in_wt_max(tree: &ScenarioTree, pair: &DualPair, acceptance: &[Polyhedron]) -> Result<Membership> {
    if acceptance.len() != tree.count_at(pair.t) {
        return Err(Error::Dimension("one acceptance set per time-t node expected".into()));
    }
    let base = in_wt(tree, pair);
    if !base.member {
        return Ok(base);
    }
    for n in tree.nodes_at(pair.t) {
        let a = &acceptance[tree.pos(n)];
        if !a.is_empty() && !a.is_cone() {
            return Err(Error::Unsupported("acceptance set is not a cone; use the penalty route".into()));
        }
        let f = node_functional(tree, &pair.q, pair.w.at(tree, n), n, tree.horizon());
        let v = a.vrep();
        if v.rays.iter().any(|r| dot(&f, r).is_negative()) || v.lines.iter().any(|l| !dot(&f, l).is_zero()) {
            return Ok(Membership::no("negative on a generator of the acceptance cone", Some(tree.name(n).into())));
        }
    }
    Ok(Membership::yes())
}

/// Membership in the dual set of the composed average value at risk:
/// at every step, either the weight vanishes or the one-step density is
/// bounded by the reciprocal level.
pub fn in_wt_avar(tree: &ScenarioTree, pair: &DualPair, levels: &[Vec<Rat>]) -> Membership {
    let base = in_wt(tree, pair);
    if !base.member {
        return base;
    }
    for s in pair.t..tree.horizon() {
        for c in tree.nodes_at(s + 1) {
            let x = xi_at(tree, &pair.q, s, c);
            let w = pair.w.at_ancestor(tree, c);
            for i in 0..tree.d() {
                if w[i].is_zero() {
                    continue;
                }
                if x[i].clone() * &levels[s][i] > Rat::one() {
                    return Membership::no(format!("density of component {i} exceeds 1/lambda at step {s}"), Some(tree.name(c).into()));
                }
            }
        }
    }
    Membership::yes()
}

/// Membership in the dual set of the superhedging risk measure: every
/// propagated weight `w_t^s(Q,w)` lies in the dual of the recession cone of
/// the market at that node.
pub fn in_w_shp(tree: &ScenarioTree, pair: &DualPair, market: &[Polyhedron]) -> Result<Membership> {
    if market.len() != tree.len() {
        return Err(Error::Dimension("one solvency set per node expected".into()));
    }
    let base = in_wt(tree, pair);
    if !base.member {
        return Ok(base);
    }
    for s in pair.t..=tree.horizon() {
        for c in tree.nodes_at(s) {
            let w: Vec<Rat> = pair.w.at_ancestor(tree, c).iter().zip(xi_at(tree, &pair.q, pair.t, c)).map(|(a, b)| a * b).collect();
            let k = market[c].vrep();
            if k.rays.iter().any(|r| dot(&w, r).is_negative()) || k.lines.iter().any(|l| !dot(&w, l).is_zero()) {
                return Ok(Membership::no("propagated weight outside the dual market cone", Some(tree.name(c).into())));
            }
        }
    }
    Ok(Membership::yes())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    #[serde(default = "default_radius", with = "crate::num::serde_rat")]
    pub radius: Rat,
    /// Grid resolution of the perturbations: `r = radius · j / steps`.
    #[serde(default = "default_steps")]
    pub steps: u32,
}

fn default_radius() -> Rat {
    Rat::new(1.into(), 4.into())
}

fn default_steps() -> u32 {
    8
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { radius: default_radius(), steps: default_steps() }
    }
}

/// Deterministic sample of dual pairs at time `t`. The first pair is `(P, 1)`;
/// the rest perturb the transitions after `t` and alternate between 0/1
/// weight directions and random small integer weights. Pair `k` draws from
/// its own stream of the seeded generator, so the list does not depend on
/// evaluation order.
pub fn sample_dual_pairs(tree: &ScenarioTree, t: usize, count: usize, seed: u64, cfg: &SamplerConfig) -> Vec<DualPair> {
    let m = tree.m();
    let d = tree.d();
    let directions = (1u64 << m.min(63)) - 1;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(DualPair::canonical(tree, t));
    for k in 1..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let steps = cfg.steps.max(1) as i64;
        let mut trans: Vec<Vec<Rat>> = Vec::with_capacity(d);
        for _ in 0..d {
            let mut q: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
            for n in 0..tree.len() {
                let ch = tree.children(n);
                if tree.time(n) < t || ch.is_empty() {
                    continue;
                }
                let raw: Vec<Rat> = ch
                    .iter()
                    .map(|&c| {
                        let j = rng.gen_range(-steps..=steps);
                        let r = &cfg.radius * Rat::new(j.into(), steps.into());
                        tree.p(c) * (Rat::one() + r)
                    })
                    .collect();
                let total: Rat = raw.iter().sum();
                for (&c, v) in ch.iter().zip(raw) {
                    q[c] = v / &total;
                }
            }
            trans.push(q);
        }
        let q = VectorMeasure::new(tree, trans).expect("perturbed transitions are normalized");
        let w = if k % 2 == 1 {
            let pattern = ((k as u64 / 2) % directions) + 1;
            let v: Vec<Rat> = (0..d).map(|i| if i < m && pattern >> i & 1 == 1 { Rat::one() } else { Rat::zero() }).collect();
            NodeVector::constant(tree, t, v)
        } else {
            let count_t = tree.count_at(t);
            let mut vals: Vec<Vec<Rat>> = (0..count_t)
                .map(|_| {
                    let zero_node = count_t > 1 && rng.gen_ratio(1, 5);
                    (0..d)
                        .map(|i| if i < m && !zero_node { Rat::from_integer(rng.gen_range(0..4i64).into()) } else { Rat::zero() })
                        .collect()
                })
                .collect();
            if vals.iter().all(|v| v[..m].iter().all(|x| x.is_zero())) {
                let j = rng.gen_range(0..count_t);
                let i = rng.gen_range(0..m);
                vals[j][i] = Rat::one();
            }
            NodeVector::new(tree, t, vals).expect("sampled weights are well formed")
        };
        out.push(DualPair { t, q, w });
    }
    out
}

/// Deterministic sample of consistent price systems at time `t`: pairs whose
/// propagated weights `Z_c = w_t^s(Q, w)(c)` lie in the dual of every
/// solvency cone and are strictly positive. Each `Z` averages the optimal
/// vertices of a few random objectives over
/// `{Z martingale under P, Z_c ∈ K(c)^+, Σ_i Z_n,i = 1 at time t}`.
/// Fewer than `count` pairs come back when the set has no positive point.
pub fn sample_price_systems(tree: &ScenarioTree, market: &[Polyhedron], t: usize, count: usize, seed: u64) -> Vec<DualPair> {
    let d = tree.d();
    let horizon = tree.horizon();
    let first = tree.nodes_at(t).start;
    let nv = d * (tree.len() - first);
    let var = |n: NodeId, i: usize| d * (n - first) + i;
    let mut lp = LinearProgram::new(nv);
    for c in first..tree.len() {
        let k = market[c].vrep();
        for (g, cmp) in k.rays.iter().map(|r| (r, Cmp::Ge)).chain(k.lines.iter().map(|l| (l, Cmp::Eq))) {
            let mut a = vec![Rat::zero(); nv];
            a[var(c, 0)..var(c, 0) + d].clone_from_slice(g);
            lp.row(a, cmp, Rat::zero());
        }
        if tree.time(c) < horizon {
            for i in 0..d {
                let mut a = vec![Rat::zero(); nv];
                a[var(c, i)] = Rat::one();
                for &ch in tree.children(c) {
                    a[var(ch, i)] = -tree.p(ch).clone();
                }
                lp.row(a, Cmp::Eq, Rat::zero());
            }
        }
    }
    for n in tree.nodes_at(t) {
        let mut a = vec![Rat::zero(); nv];
        for i in 0..d {
            a[var(n, i)] = Rat::one();
        }
        lp.row(a, Cmp::Eq, Rat::one());
    }
    let mut out = Vec::with_capacity(count);
    let rounds = 2 * d + 2;
    for k in 0..count as u64 * 8 {
        if out.len() == count {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k);
        let mut z = vec![Rat::zero(); nv];
        for _ in 0..rounds {
            let mut prog = lp.clone();
            prog.objective = (0..nv).map(|_| Rat::from_integer(rng.gen_range(-3..=3i64).into())).collect();
            let LpOutcome::Optimal { x, .. } = prog.minimize() else { return out };
            for (zi, xi) in z.iter_mut().zip(x) {
                *zi += xi;
            }
        }
        if z.iter().any(|v| !v.is_positive()) {
            continue;
        }
        let mut trans: Vec<Vec<Rat>> = (0..d).map(|_| (0..tree.len()).map(|n| tree.p(n).clone()).collect()).collect();
        for c in first..tree.len() {
            if tree.time(c) == t {
                continue;
            }
            let par = tree.parent(c).unwrap();
            for (i, q) in trans.iter_mut().enumerate() {
                q[c] = tree.p(c) * &z[var(c, i)] / &z[var(par, i)];
            }
        }
        let total = Rat::from_integer((rounds as i64).into());
        let w = NodeVector::from_fn(tree, t, |n| (0..d).map(|i| &z[var(n, i)] / &total).collect());
        let q = VectorMeasure::new(tree, trans).expect("martingale ratios are transition probabilities");
        out.push(DualPair { t, q, w });
    }
    out
}
