//! Penalty functions, the processes `V` and `𝕍`, and the supermartingale,
//! cocycle, martingale and direct time-consistency checks.
//!
//! Penalties are halfspaces: `β_t(Q,w) = {u ∈ M_t : E[w·u] ≥ b}` and
//! `α_t(Q,w)(n) = {u ∈ M : w(n)·u ≥ a(n)}`, so they are stored as
//! thresholds, and every inclusion between the processes reduces to
//! threshold inequalities. Failures carry a witness that is re-checked
//! against an explicit polyhedron.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::duals::{node_functional, DualPair};
use crate::error::{Error, Result};
use crate::num::{fmt_rat, rat_to_f64, ExtRat, Rat};
use crate::polycalc::{GeneratorKind, Polyhedron, Row, Violation};
use crate::riskmeasures::acceptance::{stack_leaves, stepped, stepped_sum};
use crate::riskmeasures::entropic::{compose_entropic, cond_entropy};
use crate::riskmeasures::{RiskEngine, RiskModel};
use crate::scalarize;
use crate::scenario::{xi_at, NodeId, NodeVector, ScenarioTree, VectorMeasure};

/// Tolerance for the floating point (entropic) comparisons.
pub const FLOAT_TOL: f64 = 1e-9;

/// A threshold, exact or (for the entropic family) floating point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Exact(ExtRat),
    Float(f64),
}

impl Value {
    pub fn zero_like(&self) -> Value {
        match self {
            Value::Exact(_) => Value::Exact(ExtRat::zero()),
            Value::Float(_) => Value::Float(0.0),
        }
    }

    pub fn plus(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a.clone() + b.clone()),
            (a, b) => Value::Float(a.to_f64() + b.to_f64()),
        }
    }

    pub fn scale(&self, k: &Rat) -> Value {
        match self {
            Value::Exact(a) => Value::Exact(a.scale(k)),
            Value::Float(a) => Value::Float(a * rat_to_f64(k)),
        }
    }

    /// `self − other`.
    pub fn gap(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a.gap(b)),
            (a, b) => Value::Float(a.to_f64() - b.to_f64()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(a) => a.to_f64(),
            Value::Float(a) => *a,
        }
    }

    pub fn is_nonneg(&self) -> bool {
        match self {
            Value::Exact(a) => *a >= ExtRat::zero(),
            Value::Float(a) => *a >= -FLOAT_TOL,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Exact(a) => *a == ExtRat::zero(),
            Value::Float(a) => a.abs() <= FLOAT_TOL,
        }
    }

    pub fn is_pos_inf(&self) -> bool {
        match self {
            Value::Exact(a) => *a == ExtRat::PosInf,
            Value::Float(a) => *a == f64::INFINITY,
        }
    }

    pub fn exact(&self) -> Option<&ExtRat> {
        match self {
            Value::Exact(a) => Some(a),
            Value::Float(_) => None,
        }
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Exact(a) => a.fmt(f),
            Value::Float(a) => write!(f, "{a:e}"),
        }
    }
}

/// Penalty thresholds at the time-`t` nodes and their aggregate
/// `b = Σ_n P(n) a(n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyValue {
    pub t: usize,
    pub nodes: Vec<Value>,
    pub total: Value,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// A point, ray or line that lies in one set but violates the listed rows
/// of another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<String>,
    pub kind: String,
    pub generator: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ineqs: Vec<Row>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eqs: Vec<Row>,
    pub verified: bool,
}

impl Witness {
    fn exact(node: Option<String>, kind: GeneratorKind, g: &[Rat], target: &Polyhedron, ineqs: Vec<Row>, eqs: Vec<Row>) -> Self {
        let mut w = Witness {
            node,
            kind: kind_name(kind).into(),
            generator: g.iter().map(fmt_rat).collect(),
            ineqs,
            eqs,
            verified: false,
        };
        w.verified = generator_set(kind, g).is_some_and(|s| target.contains(&s).is_err());
        w
    }

    /// Re-runs the containment test on the stored data. `None` for
    /// floating point witnesses.
    pub fn recheck(&self) -> Option<bool> {
        let g: Vec<Rat> = self.generator.iter().map(|s| crate::num::parse_rat(s)).collect::<Result<_>>().ok()?;
        let kind = match self.kind.as_str() {
            "point" => GeneratorKind::Vertex,
            "ray" => GeneratorKind::Ray,
            "line" => GeneratorKind::Line,
            _ => return None,
        };
        let target = Polyhedron::from_hrep_eq(g.len(), self.ineqs.clone(), self.eqs.clone());
        Some(target.contains(&generator_set(kind, &g)?).is_err())
    }
}

fn kind_name(kind: GeneratorKind) -> &'static str {
    match kind {
        GeneratorKind::Vertex => "point",
        GeneratorKind::Ray => "ray",
        GeneratorKind::Line => "line",
    }
}

fn generator_set(kind: GeneratorKind, g: &[Rat]) -> Option<Polyhedron> {
    let dim = g.len();
    let o = vec![Rat::zero(); dim];
    Some(match kind {
        GeneratorKind::Vertex => Polyhedron::point(g.to_vec()),
        GeneratorKind::Ray => Polyhedron::from_vrep(dim, vec![o], vec![g.to_vec()], vec![]),
        GeneratorKind::Line => Polyhedron::from_vrep(dim, vec![o], vec![], vec![g.to_vec()]),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub portfolio: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<usize>,
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl CheckReport {
    fn new(check: &str, engine: &RiskEngine, t: usize, s: Option<usize>) -> Self {
        CheckReport {
            check: check.into(),
            model: engine.model().name().into(),
            portfolio: None,
            pair: None,
            t,
            s,
            verdict: Verdict::Pass,
            gap: None,
            witness: None,
            note: None,
            runtime_ms: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyKind {
    Beta,
    Alpha,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProcessKind {
    V,
    Vc,
}

fn entropic_rates(engine: &RiskEngine) -> Option<&[f64]> {
    match engine.model() {
        RiskModel::Entropic { rates } => Some(rates),
        _ => None,
    }
}

fn aggregate(tree: &ScenarioTree, t: usize, nodes: &[Value]) -> Value {
    let zero = nodes.first().map(Value::zero_like).unwrap_or(Value::Exact(ExtRat::zero()));
    tree.nodes_at(t).zip(nodes).fold(zero, |acc, (n, v)| acc.plus(&v.scale(tree.prob(n))))
}

/// Node thresholds `a(n) = sup_{Y ∈ A} E[w_t^s·(−Y) | n]` over `A_t(n)`
/// (`s = None`) or the stepped set `A_{t,s}(n)`.
fn penalty_nodes(engine: &RiskEngine, pair: &DualPair, s: Option<usize>) -> Result<Vec<Value>> {
    let tree = engine.tree();
    let t = pair.t;
    let horizon = tree.horizon();
    let member = crate::duals::in_wt(tree, pair);
    if !member.member {
        return Err(Error::Dual(format!("pair outside W_t: {}", member.failed.unwrap_or_default())));
    }
    if let Some(s) = s {
        tree.check_times(t, s)?;
    }
    if let Some(rates) = entropic_rates(engine) {
        let until = s.unwrap_or(horizon);
        return Ok(tree
            .nodes_at(t)
            .map(|n| {
                let w = pair.w.at(tree, n);
                Value::Float((0..tree.d()).map(|i| rat_to_f64(&w[i]) / rates[i] * cond_entropy(tree, &pair.q, i, n, until)).sum())
            })
            .collect());
    }
    let (d, m) = (tree.d(), tree.m());
    tree.nodes_at(t)
        .map(|n| {
            let a = engine.acceptance(n)?;
            let v = match s {
                None => -a.support_value(&node_functional(tree, &pair.q, pair.w.at(tree, n), n, horizon)),
                Some(s) => {
                    let f: Vec<Rat> = node_functional(tree, &pair.q, pair.w.at(tree, n), n, s).chunks(d).flat_map(|c| c[..m].to_vec()).collect();
                    -stepped(tree, a, n, s).support_value(&f)
                }
            };
            Ok(Value::Exact(v))
        })
        .collect()
}

/// `β_t(Q, w)` as the threshold of `{u ∈ M_t : E[w·u] ≥ b}`.
pub fn beta(engine: &RiskEngine, pair: &DualPair) -> Result<PenaltyValue> {
    let nodes = penalty_nodes(engine, pair, None)?;
    let total = aggregate(engine.tree(), pair.t, &nodes);
    Ok(PenaltyValue { t: pair.t, nodes, total })
}

/// `α_t(Q, w)` as node thresholds of `{u : w(n)·u ≥ a(n)}`. The
/// superhedging family is represented by equivalent measures only.
pub fn alpha(engine: &RiskEngine, pair: &DualPair) -> Result<PenaltyValue> {
    if matches!(engine.model(), RiskModel::Shp { .. }) && !pair.q.is_equivalent() {
        return Err(Error::Dual("the superhedging family needs an equivalent measure".into()));
    }
    beta(engine, pair)
}

/// Stepped penalty `β_{t,s}` / `α_{t,s}`.
pub fn stepped_penalty(engine: &RiskEngine, pair: &DualPair, s: usize) -> Result<PenaltyValue> {
    let nodes = penalty_nodes(engine, pair, Some(s))?;
    let total = aggregate(engine.tree(), pair.t, &nodes);
    Ok(PenaltyValue { t: pair.t, nodes, total })
}

/// `ρ̂_t(X)(n) = inf_{u ∈ R_t(X)(n)} w(n)·u` at the time-`t` nodes.
pub fn rho_nodes(engine: &RiskEngine, x: &NodeVector<Rat>, w: &NodeVector<Rat>) -> Result<Vec<Value>> {
    let tree = engine.tree();
    let t = w.time();
    let xt = x.lift(tree, tree.horizon());
    if let Some(rates) = entropic_rates(engine) {
        let r = compose_entropic(tree, &xt.to_float(), rates)?;
        return Ok(tree
            .nodes_at(t)
            .map(|n| {
                let wn = w.at(tree, n);
                if wn.iter().any(|v| v.is_negative()) {
                    return Value::Float(f64::NEG_INFINITY);
                }
                Value::Float(wn.iter().zip(r[t].at(tree, n)).map(|(a, b)| rat_to_f64(a) * b).sum())
            })
            .collect());
    }
    tree.nodes_at(t).map(|n| Ok(Value::Exact(engine.support_at(&xt, n, w.at(tree, n))?))).collect()
}

/// Thresholds of `V_t` (or `𝕍_t`) along the propagated pairs
/// `(Q, w_t^s(Q, w))` for `s = t, …, T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VProcess {
    pub t0: usize,
    pub kind: ProcessKind,
    /// `nodes[k][pos]`: `ρ̂ + a` at the nodes of time `t0 + k`.
    pub nodes: Vec<Vec<Value>>,
    /// `totals[k] = Σ_n P(n) nodes[k][n]`, the threshold of the
    /// unconditional process.
    pub totals: Vec<Value>,
}

fn process(engine: &RiskEngine, pair: &DualPair, x: &NodeVector<Rat>, kind: ProcessKind) -> Result<VProcess> {
    let tree = engine.tree();
    let mut nodes = Vec::new();
    let mut totals = Vec::new();
    for s in pair.t..=tree.horizon() {
        let ps = pair.propagate(tree, s)?;
        let pen = match kind {
            ProcessKind::V => beta(engine, &ps)?,
            ProcessKind::Vc => alpha(engine, &ps)?,
        };
        let rho = rho_nodes(engine, x, &ps.w)?;
        let c: Vec<Value> = rho.iter().zip(&pen.nodes).map(|(r, a)| r.plus(a)).collect();
        totals.push(aggregate(tree, s, &c));
        nodes.push(c);
    }
    Ok(VProcess { t0: pair.t, kind, nodes, totals })
}

/// `V_t = cl[R_t(X) + β_t(Q, w)]` along the pair.
pub fn v_process(engine: &RiskEngine, pair: &DualPair, x: &NodeVector<Rat>) -> Result<VProcess> {
    process(engine, pair, x, ProcessKind::V)
}

/// `𝕍_t = cl[R_t(X) + α_t(Q, w)]` along the pair.
pub fn vc_process(engine: &RiskEngine, pair: &DualPair, x: &NodeVector<Rat>) -> Result<VProcess> {
    process(engine, pair, x, ProcessKind::Vc)
}

/// Stacked coefficients of `u ↦ E[w·u]` on `M_t`.
fn stacked_weights(tree: &ScenarioTree, w: &NodeVector<Rat>) -> Vec<Rat> {
    let m = tree.m();
    tree.nodes_at(w.time()).flat_map(|n| w.at(tree, n)[..m].iter().map(|a| a * tree.prob(n)).collect::<Vec<_>>()).collect()
}

/// The linear map `u ↦ E^Q[u | F_t]` from stacked `M_s` to stacked `M_t`.
fn cond_expect_matrix(tree: &ScenarioTree, q: &VectorMeasure, t: usize, s: usize) -> Vec<Vec<Rat>> {
    let m = tree.m();
    let (ns, start) = (tree.count_at(s), tree.nodes_at(s).start);
    let mut out = Vec::with_capacity(m * tree.count_at(t));
    for n in tree.nodes_at(t) {
        for i in 0..m {
            let mut row = vec![Rat::zero(); m * ns];
            for c in tree.descendants_at(n, s) {
                row[(c - start) * m + i] = tree.cond_prob(c, n) * &xi_at(tree, q, t, c)[i];
            }
            out.push(row);
        }
    }
    out
}

/// A point of `{g·u ≥ inner}` outside `{g·u ≥ outer}` (`inner < outer`),
/// supported on one coordinate.
fn halfspace_point(g: &[Rat], inner: &ExtRat, outer: &ExtRat) -> Vec<Rat> {
    let mut u = vec![Rat::zero(); g.len()];
    let tau = match (inner, outer) {
        (ExtRat::Finite(a), _) => a.clone(),
        (_, ExtRat::Finite(b)) => b - Rat::one(),
        _ => Rat::zero(),
    };
    if let Some(j) = g.iter().position(|a| a.is_positive()) {
        u[j] = tau / &g[j];
    }
    u
}

fn rows_of(p: &Polyhedron) -> (Vec<Row>, Vec<Row>) {
    let h = p.hrep();
    (h.ineqs.clone(), h.eqs.clone())
}

fn float_witness(node: Option<String>, u: &[f64]) -> Witness {
    Witness { node, kind: "float-point".into(), generator: u.iter().map(|v| format!("{v:e}")).collect(), ineqs: vec![], eqs: vec![], verified: true }
}

/// `V_t(X) ⊆ E^Q[V_s(X) | F_t]` (or the conditional version) for the pair at
/// `t` and a later `s`.
pub fn check_supermartingale(engine: &RiskEngine, pair: &DualPair, x: &NodeVector<Rat>, s: usize, kind: ProcessKind) -> Result<CheckReport> {
    let tree = engine.tree();
    let t = pair.t;
    if s <= t || s > tree.horizon() {
        return Err(Error::Index(format!("need t < s <= T, got t = {t}, s = {s}")));
    }
    let name = match kind {
        ProcessKind::V => "supermartingale",
        ProcessKind::Vc => "supermartingale-conditional",
    };
    let mut rep = CheckReport::new(name, engine, t, Some(s));
    let proc = process(engine, pair, x, kind)?;
    let (ct, cs) = (&proc.nodes[0], &proc.nodes[s - t]);
    let ps = pair.propagate(tree, s)?;
    match kind {
        ProcessKind::V => {
            let (bt, bs) = (&proc.totals[0], &proc.totals[s - t]);
            let gap = bt.gap(bs);
            rep.gap = Some(gap.clone());
            if !gap.is_nonneg() {
                rep.verdict = Verdict::Fail;
                let gt = stacked_weights(tree, &pair.w);
                rep.witness = Some(match (bt, bs) {
                    (Value::Exact(bt), Value::Exact(bs)) => {
                        let u = halfspace_point(&gt, bt, bs);
                        let vs = Polyhedron::halfspace(stacked_weights(tree, &ps.w), bs);
                        let target = vs.linear_image(&cond_expect_matrix(tree, &pair.q, t, s));
                        let (ineqs, eqs) = rows_of(&target);
                        let mut w = Witness::exact(None, GeneratorKind::Vertex, &u, &target, ineqs, eqs);
                        w.verified &= Polyhedron::halfspace(gt, bt).contains_point(&u);
                        w
                    }
                    _ => {
                        let j = gt.iter().position(|a| a.is_positive()).unwrap_or(0);
                        let mut u = vec![0.0; gt.len()];
                        u[j] = bt.to_f64() / rat_to_f64(&gt[j]);
                        float_witness(None, &u)
                    }
                });
            }
        }
        ProcessKind::Vc => {
            let m = tree.m();
            let mut worst: Option<Value> = None;
            for n in tree.nodes_at(t) {
                let wn = pair.w.at(tree, n)[..m].to_vec();
                let agg = tree.descendants_at(n, s).fold(ct[0].zero_like(), |acc, c| {
                    acc.plus(&cs[tree.pos(c)].scale(&tree.cond_prob(c, n)))
                });
                let here = &ct[tree.pos(n)];
                let gap = here.gap(&agg);
                if worst.as_ref().is_none_or(|w| gap.to_f64() < w.to_f64()) {
                    worst = Some(gap.clone());
                }
                if rep.verdict == Verdict::Fail {
                    continue;
                }
                match here {
                    Value::Exact(ht) => {
                        let vt = Polyhedron::halfspace(wn.clone(), ht);
                        let parts: Vec<(Vec<Rat>, Polyhedron)> = tree
                            .descendants_at(n, s)
                            .map(|c| {
                                let k: Vec<Rat> = xi_at(tree, &pair.q, t, c)[..m].iter().map(|x| x * tree.cond_prob(c, n)).collect();
                                let h = Polyhedron::halfspace(ps.w.at(tree, c)[..m].to_vec(), cs[tree.pos(c)].exact().unwrap());
                                (k, h)
                            })
                            .collect();
                        let target = Polyhedron::minkowski_sum_scaled(m, parts.iter().map(|(k, p)| (k.as_slice(), p)));
                        if let Err(v) = target.contains(&vt) {
                            rep.verdict = Verdict::Fail;
                            let (ineqs, eqs) = rows_of(&target);
                            rep.witness = Some(Witness::exact(Some(tree.name(n).into()), v.kind, &v.generator, &target, ineqs, eqs));
                        }
                    }
                    Value::Float(h) => {
                        if !gap.is_nonneg() {
                            rep.verdict = Verdict::Fail;
                            let j = wn.iter().position(|a| a.is_positive()).unwrap_or(0);
                            let mut u = vec![0.0; m];
                            u[j] = h / rat_to_f64(&wn[j]);
                            rep.witness = Some(float_witness(Some(tree.name(n).into()), &u));
                        }
                    }
                }
            }
            rep.gap = worst;
        }
    }
    Ok(rep)
}

/// `β_t = cl(β_{t,s} + E^Q[β_s(Q, w_t^s) | F_t])` in threshold form, or the
/// node-wise version for `α`.
pub fn check_cocycle(engine: &RiskEngine, pair: &DualPair, s: usize, kind: PenaltyKind) -> Result<CheckReport> {
    let tree = engine.tree();
    let t = pair.t;
    if s <= t || s > tree.horizon() {
        return Err(Error::Index(format!("need t < s <= T, got t = {t}, s = {s}")));
    }
    let name = match kind {
        PenaltyKind::Beta => "cocycle-beta",
        PenaltyKind::Alpha => "cocycle-alpha",
    };
    let mut rep = CheckReport::new(name, engine, t, Some(s));
    let ps = pair.propagate(tree, s)?;
    let (full, step, later) = match kind {
        PenaltyKind::Beta => (beta(engine, pair)?, stepped_penalty(engine, pair, s)?, beta(engine, &ps)?),
        PenaltyKind::Alpha => (alpha(engine, pair)?, stepped_penalty(engine, pair, s)?, alpha(engine, &ps)?),
    };
    match kind {
        PenaltyKind::Beta => {
            let rhs = step.total.plus(&later.total);
            let gap = full.total.gap(&rhs);
            if !gap.is_zero() {
                rep.verdict = Verdict::Fail;
                rep.witness = Some(threshold_witness(tree, &pair.w, None, &full.total, &rhs));
            }
            rep.gap = Some(gap);
        }
        PenaltyKind::Alpha => {
            for n in tree.nodes_at(t) {
                let p = tree.pos(n);
                let agg = tree
                    .descendants_at(n, s)
                    .fold(full.nodes[p].zero_like(), |acc, c| acc.plus(&later.nodes[tree.pos(c)].scale(&tree.cond_prob(c, n))));
                let rhs = step.nodes[p].plus(&agg);
                let gap = full.nodes[p].gap(&rhs);
                if rep.verdict == Verdict::Pass && !gap.is_zero() {
                    rep.verdict = Verdict::Fail;
                    let w = NodeVector::from_fn(tree, t, |k| if k == n { pair.w.at(tree, n).to_vec() } else { vec![Rat::zero(); tree.d()] });
                    let mut wit = threshold_witness(tree, &w, Some(n), &full.nodes[p], &rhs);
                    wit.node = Some(tree.name(n).into());
                    rep.witness = Some(wit);
                    rep.gap = Some(gap);
                } else if rep.gap.is_none() || rep.verdict == Verdict::Pass {
                    rep.gap = Some(gap);
                }
            }
        }
    }
    Ok(rep)
}

/// A point separating two halfspace thresholds of the same normal.
fn threshold_witness(tree: &ScenarioTree, w: &NodeVector<Rat>, node: Option<NodeId>, lhs: &Value, rhs: &Value) -> Witness {
    let mut g = stacked_weights(tree, w);
    if let Some(n) = node {
        // conditional: the halfspace lives at a single node
        let m = tree.m();
        g = w.at(tree, n)[..m].to_vec();
    }
    match (lhs, rhs) {
        (Value::Exact(a), Value::Exact(b)) => {
            let (inner, outer) = if a < b { (a, b) } else { (b, a) };
            let u = halfspace_point(&g, inner, outer);
            let target = Polyhedron::halfspace(g.clone(), outer);
            let (ineqs, eqs) = rows_of(&target);
            Witness::exact(None, GeneratorKind::Vertex, &u, &target, ineqs, eqs)
        }
        _ => float_witness(None, &[lhs.to_f64(), rhs.to_f64()]),
    }
}

/// Worst-case martingale check for a pair at time 0: if `β_0 ≠ ∅` and the
/// pair attains `ρ_0 + b_0 = E[w_0^T·(−X)]`, the thresholds of `V` must be
/// constant in time.
pub fn check_martingale_worstcase(engine: &RiskEngine, pair: &DualPair, x: &NodeVector<Rat>) -> Result<CheckReport> {
    let tree = engine.tree();
    let mut rep = CheckReport::new("martingale-worstcase", engine, pair.t, None);
    if pair.t != 0 {
        return Err(Error::Index("worst-case pairs are taken at time 0".into()));
    }
    let proc = v_process(engine, pair, x)?;
    let b0 = beta(engine, pair)?;
    if b0.total.is_pos_inf() {
        rep.verdict = Verdict::Skipped;
        rep.note = Some("precondition: beta_0 is empty".into());
        return Ok(rep);
    }
    let target = expected_loss(tree, pair, x, &proc.totals[0]);
    let wc = proc.totals[0].gap(&target);
    if !wc.is_zero() {
        rep.verdict = Verdict::Skipped;
        rep.gap = Some(wc);
        rep.note = Some("precondition: not a worst-case pair at time 0".into());
        return Ok(rep);
    }
    let mut notes = Vec::new();
    for (k, c) in proc.totals.iter().enumerate().skip(1) {
        let gap = proc.totals[k - 1].gap(c);
        if !gap.is_zero() && rep.verdict == Verdict::Pass {
            rep.verdict = Verdict::Fail;
            rep.s = Some(k);
            rep.gap = Some(gap);
            notes.push(format!("thresholds differ between t = {} and t = {k}", k - 1));
        }
        if !c.gap(&target).is_zero() {
            notes.push(format!("not worst case at t = {k}"));
        }
    }
    if rep.verdict == Verdict::Pass {
        rep.gap = Some(proc.totals[0].zero_like());
    }
    if tree.m() < tree.d() {
        notes.push("converse not applicable: M is a proper subspace".into());
    }
    if !notes.is_empty() {
        rep.note = Some(notes.join("; "));
    }
    Ok(rep)
}

/// `E[w_0^T(Q, w)·(−X)]`, in the backend of `like`.
fn expected_loss(tree: &ScenarioTree, pair: &DualPair, x: &NodeVector<Rat>, like: &Value) -> Value {
    let horizon = tree.horizon();
    let xt = x.lift(tree, horizon);
    let mut acc = Rat::zero();
    for n in tree.nodes_at(pair.t) {
        let f = node_functional(tree, &pair.q, pair.w.at(tree, n), n, horizon);
        let v: Rat = f.iter().zip(stack_leaves(tree, &xt, n)).map(|(a, b)| -(a * b)).sum();
        acc += v * tree.prob(n);
    }
    match like {
        Value::Exact(_) => Value::Exact(ExtRat::Finite(acc)),
        Value::Float(_) => Value::Float(rat_to_f64(&acc)),
    }
}

/// A pair attaining `ρ_0(X)` in direction `w0`: from the dual multipliers of
/// the scalarization program for polyhedral families, and the Gibbs tilt
/// `dQ_i/dP ∝ exp(−λ_i X_i)` for the entropic family.
pub fn find_worst_case_dual(engine: &RiskEngine, x: &NodeVector<Rat>, w0: &[Rat]) -> Result<DualPair> {
    let tree = engine.tree();
    let w = NodeVector::constant(tree, 0, w0.to_vec());
    if let Some(rates) = entropic_rates(engine) {
        if w0.iter().any(|v| v.is_negative()) {
            return Err(Error::Improper("direction fails the properness test".into()));
        }
        let xt = x.lift(tree, tree.horizon()).to_float();
        let tilt = crate::riskmeasures::entropic::gibbs_measure(tree, &xt, rates)?;
        let trans = tilt.iter().map(|q| rationalize_transitions(tree, q)).collect();
        return DualPair::new(tree, VectorMeasure::new(tree, trans)?, w);
    }
    let r = scalarize::rho(engine, x, &w)?;
    match r.primal {
        ExtRat::NegInf => Err(Error::Improper("rho_0 is unbounded below; the direction fails the properness test".into())),
        ExtRat::PosInf => Err(Error::Model("R_0(X) is empty".into())),
        ExtRat::Finite(_) => r.pair.ok_or_else(|| Error::Dual("no dual multipliers".into())),
    }
}

/// Exact rational transitions close to the given floats, normalized so the
/// last child closes each sum.
fn rationalize_transitions(tree: &ScenarioTree, q: &[f64]) -> Vec<Rat> {
    let mut out: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
    for n in 0..tree.len() {
        let ch = tree.children(n);
        if ch.is_empty() {
            continue;
        }
        let mut rest = Rat::one();
        for (k, &c) in ch.iter().enumerate() {
            let v = if k + 1 == ch.len() { rest.clone() } else { Rat::from_float(q[c]).unwrap_or_else(Rat::zero) };
            rest -= &v;
            out[c] = v;
        }
    }
    out
}

/// `A_t(n) = A_{t,s}(n) + Π A_s(c)` at every time-`t` node, both
/// containments, plus a spot check of the recursion
/// `R_t(−Z) ⊆ R_t(X)` for a selection `Z ∈ R_s(X)`.
pub fn check_mptc_direct(engine: &RiskEngine, x: &NodeVector<Rat>, t: usize, s: usize) -> Result<CheckReport> {
    let tree = engine.tree();
    if s <= t || s > tree.horizon() {
        return Err(Error::Index(format!("need t < s <= T, got t = {t}, s = {s}")));
    }
    let mut rep = CheckReport::new("mptc-direct", engine, t, Some(s));
    let fam = engine.family()?;
    for n in tree.nodes_at(t) {
        let a = fam.at(n);
        let sum = stepped_sum(tree, fam, n, s);
        let failure: Option<(Violation, &Polyhedron, &str)> = match (a.contains(&sum), sum.contains(a)) {
            (Err(v), Ok(())) => Some((v, a, "strict inclusion: A_t is smaller than A_{t,s} + A_s")),
            (Err(v), Err(_)) => Some((v, a, "A_t and A_{t,s} + A_s are not nested")),
            (Ok(()), Err(v)) => Some((v, &sum, "strict inclusion: A_t is larger than A_{t,s} + A_s")),
            _ => None,
        };
        if let Some((v, target, note)) = failure {
            rep.verdict = Verdict::Fail;
            rep.note = Some(note.into());
            let (ineqs, eqs) = if v.equality { (vec![], vec![v.row.clone()]) } else { (vec![v.row.clone()], vec![]) };
            let single = Polyhedron::from_hrep_eq(target.dim(), ineqs.clone(), eqs.clone());
            rep.witness = Some(Witness::exact(Some(tree.name(n).into()), v.kind, &v.generator, &single, ineqs, eqs));
            return Ok(rep);
        }
    }
    // spot check of the recursion on a selection of R_s(X)
    let xt = x.lift(tree, tree.horizon());
    let m = tree.m();
    let ones: Vec<Rat> = (0..tree.d()).map(|i| if i < m { Rat::one() } else { Rat::zero() }).collect();
    let mut sel = Vec::with_capacity(tree.count_at(s));
    for c in tree.nodes_at(s) {
        let r = engine.risk_at(&xt, c)?;
        match r.poly().argmin(&ones[..m]) {
            Some(mut z) => {
                z.resize(tree.d(), Rat::zero());
                sel.push(z.into_iter().map(|v| -v).collect::<Vec<_>>());
            }
            None => {
                rep.note = Some("recursion spot check skipped: no finite selection".into());
                return Ok(rep);
            }
        }
    }
    let neg_z = NodeVector::new(tree, s, sel)?;
    for n in tree.nodes_at(t) {
        let rx = engine.risk_at(&xt, n)?;
        let rz = engine.risk_at(&neg_z, n)?;
        if let Err(v) = rx.poly().contains(rz.poly()) {
            rep.verdict = Verdict::Fail;
            rep.note = Some("recursion fails: R_t(-Z) is not inside R_t(X)".into());
            let (ineqs, eqs) = if v.equality { (vec![], vec![v.row.clone()]) } else { (vec![v.row.clone()], vec![]) };
            let single = Polyhedron::from_hrep_eq(m, ineqs.clone(), eqs.clone());
            rep.witness = Some(Witness::exact(Some(tree.name(n).into()), v.kind, &v.generator, &single, ineqs, eqs));
            return Ok(rep);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::polycalc::ivec;

    fn counterexample() -> (RiskEngine, NodeVector<Rat>) {
        let tree = ScenarioTree::uniform(&[2, 2], 1, 1).unwrap();
        let x = NodeVector::new(&tree, 2, vec![ivec(&[-1]), ivec(&[0]), ivec(&[0]), ivec(&[0])]).unwrap();
        let levels = vec![vec![rat(1, 2)], vec![rat(1, 2)]];
        (RiskEngine::new(tree, RiskModel::Avar { levels, composed: false }).unwrap(), x)
    }

    fn tilted(tree: &ScenarioTree, qa: Rat) -> DualPair {
        let mut q: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
        q[1] = qa.clone();
        q[2] = Rat::one() - qa;
        DualPair::new(tree, VectorMeasure::new(tree, vec![q]).unwrap(), NodeVector::constant(tree, 0, ivec(&[1]))).unwrap()
    }

    #[test]
    fn vanilla_counterexample_breaks_supermartingale() {
        let (eng, x) = counterexample();
        let pair = tilted(eng.tree(), rat(5, 8));
        let proc = v_process(&eng, &pair, &x).unwrap();
        assert_eq!(proc.totals[0], Value::Exact(ExtRat::Finite(rat(1, 2))));
        assert_eq!(proc.totals[1], Value::Exact(ExtRat::Finite(rat(5, 8))));
        let rep = check_supermartingale(&eng, &pair, &x, 1, ProcessKind::V).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert_eq!(rep.gap, Some(Value::Exact(ExtRat::Finite(rat(-1, 8)))));
        let w = rep.witness.unwrap();
        assert!(w.verified);
        assert_eq!(w.recheck(), Some(true));
        let rep = check_mptc_direct(&eng, &x, 0, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.note.unwrap().starts_with("strict inclusion"));
        assert_eq!(rep.witness.unwrap().recheck(), Some(true));
        let rep = check_cocycle(&eng, &pair, 1, PenaltyKind::Beta).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
    }

    #[test]
    fn composed_level_one_is_martingale() {
        let tree = ScenarioTree::uniform(&[2, 2], 2, 2).unwrap();
        let x = NodeVector::from_fn(&tree, 2, |n| ivec(&[n as i64 - 4, (n as i64 * 5) % 3]));
        let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: vec![vec![int(1); 2]; 2], composed: true }).unwrap();
        let pair = DualPair::canonical(&tree, 0);
        let rep = check_martingale_worstcase(&eng, &pair, &x).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        let found = find_worst_case_dual(&eng, &x, &ivec(&[1, 1])).unwrap();
        assert_eq!(found.q, VectorMeasure::reference(&tree));
        for s in 1..=2 {
            for kind in [ProcessKind::V, ProcessKind::Vc] {
                let rep = check_supermartingale(&eng, &pair, &x, s, kind).unwrap();
                assert_eq!(rep.gap.unwrap(), Value::Exact(ExtRat::zero()));
            }
            assert_eq!(check_cocycle(&eng, &pair, s, PenaltyKind::Beta).unwrap().verdict, Verdict::Pass);
        }
        assert_eq!(check_mptc_direct(&eng, &x, 0, 1).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn coherent_penalty_is_zero_or_empty() {
        let (eng, _) = counterexample();
        let tree = eng.tree();
        assert_eq!(beta(&eng, &tilted(tree, rat(5, 8))).unwrap().total, Value::Exact(ExtRat::zero()));
        // Q(a) = 1 puts density 2 on a and then 2 again below: 4 > 1/λ
        let mut q: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
        q[1] = int(1);
        q[2] = int(0);
        q[3] = int(1);
        q[4] = int(0);
        let pair = DualPair::new(tree, VectorMeasure::new(tree, vec![q]).unwrap(), NodeVector::constant(tree, 0, ivec(&[1]))).unwrap();
        assert!(beta(&eng, &pair).unwrap().total.is_pos_inf());
    }

    #[test]
    fn entropic_cocycle_and_tilt() {
        let tree = ScenarioTree::uniform(&[2, 3], 2, 2).unwrap();
        let eng = RiskEngine::new(tree.clone(), RiskModel::Entropic { rates: vec![0.5, 2.0] }).unwrap();
        let x = NodeVector::from_fn(&tree, 2, |n| vec![rat(n as i64 % 4 - 1, 2), rat(3 - n as i64 % 3, 3)]);
        let pair = tilted_2d(&tree);
        for kind in [PenaltyKind::Beta, PenaltyKind::Alpha] {
            let rep = check_cocycle(&eng, &pair, 1, kind).unwrap();
            assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        }
        let wc = find_worst_case_dual(&eng, &x, &ivec(&[1, 2])).unwrap();
        let rep = check_martingale_worstcase(&eng, &wc, &x).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
    }

    fn tilted_2d(tree: &ScenarioTree) -> DualPair {
        let mut q: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
        q[1] = rat(1, 3);
        q[2] = rat(2, 3);
        q[3] = rat(1, 2);
        q[4] = rat(1, 4);
        q[5] = rat(1, 4);
        DualPair::new(tree, VectorMeasure::new(tree, vec![q.clone(), q]).unwrap(), NodeVector::constant(tree, 0, ivec(&[1, 3]))).unwrap()
    }
}
