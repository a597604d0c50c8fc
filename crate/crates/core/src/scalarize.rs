//! Linear and conditional scalarizations `ρ_t(X) = inf_{u ∈ R_t(X)} E[w·u]`,
//! their dual values, properness and stepped duality.
//!
//! Primal values come from a linear program over the H-representation of
//! the acceptance set; dual values come from the dual program, whose
//! multipliers are turned back into a pair `(Q, w)`, and independently from
//! the generators of the acceptance set.

use num_traits::{Signed, Zero};

use crate::duals::{node_functional, DualPair, OrthComplement};
use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::num::{dot, ExtRat, Rat};
use crate::polycalc::Polyhedron;
use crate::riskmeasures::acceptance::{replication, stack_at, stack_leaves, stepped};
use crate::riskmeasures::entropic::{compose_entropic, cond_entropy};
use crate::riskmeasures::RiskEngine;
use crate::scenario::{cond_expect, NodeId, NodeVector, ScenarioTree, VectorMeasure};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarizationResult {
    pub t: usize,
    pub primal: ExtRat,
    /// Conditional values `ρ̂_t(X)(n)` at the time-`t` nodes.
    pub per_node: Vec<ExtRat>,
    pub u: Option<NodeVector<Rat>>,
    pub pair: Option<DualPair>,
    pub dual: Option<ExtRat>,
    pub gap: Option<ExtRat>,
}

/// Primal and dual solution of one node program
/// `min w·u  s.t.  a_k·(E u + c) ≥ b_k`.
#[derive(Clone, Debug)]
pub struct NodeLp {
    pub value: ExtRat,
    pub u: Option<Vec<Rat>>,
    pub dual_value: Option<ExtRat>,
    /// `Σ_k μ_k a_k` for optimal multipliers `μ`.
    pub z: Option<Vec<Rat>>,
}

fn pull_back(a: &[Rat], e: &[Vec<Rat>], k: usize) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); k];
    for (ai, row) in a.iter().zip(e) {
        if ai.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            if !x.is_zero() {
                *o += ai * x;
            }
        }
    }
    out
}

/// Solves the node program and, separately, its dual
/// `max Σ μ_k (b_k − a_k·c)  s.t.  Σ μ_k Eᵀa_k = w, μ ≥ 0 on inequalities`.
pub fn node_primal_dual(a: &Polyhedron, e: &[Vec<Rat>], c: &[Rat], w: &[Rat]) -> NodeLp {
    let k = w.len();
    let h = a.hrep();
    if h.empty {
        return NodeLp { value: ExtRat::PosInf, u: None, dual_value: None, z: None };
    }
    let rows: Vec<(&crate::polycalc::Row, bool)> = h.ineqs.iter().map(|r| (r, false)).chain(h.eqs.iter().map(|r| (r, true))).collect();
    let pulled: Vec<Vec<Rat>> = rows.iter().map(|(r, _)| pull_back(&r.a, e, k)).collect();
    let rhs: Vec<Rat> = rows.iter().map(|(r, _)| &r.b - dot(&r.a, c)).collect();

    let mut primal = LinearProgram::new(k).all_free();
    primal.objective = w.to_vec();
    for ((_, eq), (p, b)) in rows.iter().zip(pulled.iter().zip(&rhs)) {
        primal.row(p.clone(), if *eq { Cmp::Eq } else { Cmp::Ge }, b.clone());
    }
    let (value, u) = match primal.minimize() {
        LpOutcome::Optimal { value, x } => (ExtRat::Finite(value), Some(x)),
        LpOutcome::Infeasible => (ExtRat::PosInf, None),
        LpOutcome::Unbounded => (ExtRat::NegInf, None),
    };

    let nr = rows.len();
    let mut dual = LinearProgram::new(nr);
    dual.free = rows.iter().map(|(_, eq)| *eq).collect();
    dual.objective = rhs.clone();
    for (j, wj) in w.iter().enumerate() {
        dual.row(pulled.iter().map(|p| p[j].clone()).collect(), Cmp::Eq, wj.clone());
    }
    let (dual_value, z) = match dual.maximize() {
        LpOutcome::Optimal { value, x } => {
            let dim = a.dim();
            let mut z = vec![Rat::zero(); dim];
            for ((r, _), mu) in rows.iter().zip(&x) {
                if mu.is_zero() {
                    continue;
                }
                for (zi, ai) in z.iter_mut().zip(&r.a) {
                    *zi += mu * ai;
                }
            }
            (Some(ExtRat::Finite(value)), Some(z))
        }
        LpOutcome::Unbounded => (Some(ExtRat::PosInf), None),
        LpOutcome::Infeasible => (Some(ExtRat::NegInf), None),
    };
    NodeLp { value, u, dual_value, z }
}

/// Turns leaf-space multipliers `Z(n)` at the time-`t` nodes into a pair
/// `(Q, w)` with `w_t^T(Q, w) = Z / P(· | n)`.
pub fn pair_from_multipliers(tree: &ScenarioTree, t: usize, z: &[Vec<Rat>]) -> Result<DualPair> {
    let d = tree.d();
    let mut trans: Vec<Vec<Rat>> = (0..d).map(|_| (0..tree.len()).map(|n| tree.p(n).clone()).collect()).collect();
    let mut w = Vec::with_capacity(z.len());
    for (n, zn) in tree.nodes_at(t).zip(z) {
        let leaves = tree.leaves(n);
        let wn: Vec<Rat> = (0..d).map(|i| (0..leaves.len()).map(|l| zn[l * d + i].clone()).sum()).collect();
        if zn.iter().any(|v| v.is_negative()) {
            return Err(Error::Dual("negative multiplier mass".into()));
        }
        for i in 0..d {
            if wn[i].is_zero() {
                continue;
            }
            // mass of every node of the subtree, from its leaves
            let mass = |v: NodeId| -> Rat {
                tree.leaves(v).map(|l| zn[(l - leaves.start) * d + i].clone()).sum::<Rat>() / &wn[i]
            };
            for s in t + 1..=tree.horizon() {
                for v in tree.descendants_at(n, s) {
                    let mp = mass(tree.parent(v).unwrap());
                    if !mp.is_zero() {
                        trans[i][v] = mass(v) / mp;
                    }
                }
            }
        }
        w.push(wn);
    }
    let q = VectorMeasure::new(tree, trans)?;
    DualPair::new(tree, q, NodeVector::new(tree, t, w)?)
}

fn weighted_sum(tree: &ScenarioTree, t: usize, vals: &[ExtRat]) -> ExtRat {
    tree.nodes_at(t).zip(vals).fold(ExtRat::zero(), |acc, (n, v)| acc + v.scale(tree.prob(n)))
}

fn check_weights(tree: &ScenarioTree, w: &NodeVector<Rat>) -> Result<()> {
    let m = tree.m();
    if w.values().iter().all(|v| v[..m].iter().all(|x| x.is_zero())) {
        return Err(Error::Dual("scalarization weight vanishes on the eligible assets".into()));
    }
    Ok(())
}

/// `ρ_t(X)` for the weight `w` adapted at `t`, with its dual pair.
pub fn rho(engine: &RiskEngine, x: &NodeVector<Rat>, w: &NodeVector<Rat>) -> Result<ScalarizationResult> {
    let tree = engine.tree();
    let t = w.time();
    let m = tree.m();
    tree.check_times(t, x.time())?;
    check_weights(tree, w)?;
    let mut per_node = Vec::new();
    let mut us = Vec::new();
    let mut zs = Vec::new();
    let mut duals = Vec::new();
    for n in tree.nodes_at(t) {
        let a = engine.acceptance(n)?;
        let e = replication(tree, n, t, m);
        let lp = node_primal_dual(a, &e, &stack_leaves(tree, x, n), &w.at(tree, n)[..m]);
        per_node.push(lp.value.clone());
        us.push(lp.u);
        zs.push(lp.z);
        duals.push(lp.dual_value.unwrap_or(ExtRat::NegInf));
    }
    let primal = weighted_sum(tree, t, &per_node);
    let u = us.into_iter().collect::<Option<Vec<_>>>().map(|u| {
        NodeVector::from_fn(tree, t, |n| {
            let mut v = u[tree.pos(n)].clone();
            v.resize(tree.d(), Rat::zero());
            v
        })
    });
    let pair = match (primal.is_finite(), zs.into_iter().collect::<Option<Vec<_>>>()) {
        (true, Some(z)) => Some(pair_from_multipliers(tree, t, &z)?),
        _ => None,
    };
    let dual = pair.as_ref().map(|_| weighted_sum(tree, t, &duals));
    let gap = dual.as_ref().map(|d| primal.gap(d));
    Ok(ScalarizationResult { t, primal, per_node, u, pair, dual, gap })
}

/// Node values `ρ̂_t(X)(n) = inf_{u ∈ R_t(X)(n)} w(n)·u`.
pub fn rho_cond(engine: &RiskEngine, x: &NodeVector<Rat>, w: &NodeVector<Rat>) -> Result<Vec<ExtRat>> {
    Ok(rho(engine, x, w)?.per_node)
}

/// `Σ_n P(n) [inf_{Y ∈ A_t(n)} E[(w+m_⊥)_t^T·Y | n] − E[(w+m_⊥)_t^T·X | n]]`
/// from the generators of the acceptance sets.
pub fn rho_dual_value(engine: &RiskEngine, x: &NodeVector<Rat>, pair: &DualPair, m_perp: &OrthComplement) -> Result<ExtRat> {
    let tree = engine.tree();
    let t = pair.t;
    if m_perp.vector().time() != t {
        return Err(Error::Dual("orthogonal complement adapted at another time".into()));
    }
    let member = crate::duals::in_wt(tree, pair);
    if !member.member {
        return Err(Error::Dual(format!("pair outside W_t: {}", member.failed.unwrap_or_default())));
    }
    let weights = pair.w.zip_with(m_perp.vector(), |a, b| a + b)?;
    let horizon = tree.horizon();
    let xt = x.lift(tree, horizon);
    let vals: Vec<ExtRat> = tree
        .nodes_at(t)
        .map(|n| {
            let f = node_functional(tree, &pair.q, weights.at(tree, n), n, horizon);
            let inf = engine.acceptance(n)?.support_value(&f);
            Ok(inf + ExtRat::Finite(-dot(&f, &stack_leaves(tree, &xt, n))))
        })
        .collect::<Result<_>>()?;
    Ok(weighted_sum(tree, t, &vals))
}

/// Whether `w` lies in the dual of the recession cone of `R_t(0)`, node by
/// node.
pub fn check_proper(engine: &RiskEngine, w: &NodeVector<Rat>) -> Result<bool> {
    let tree = engine.tree();
    let t = w.time();
    let m = tree.m();
    let zero = NodeVector::zeros(tree, t);
    for n in tree.nodes_at(t) {
        let r = engine.risk_at(&zero, n)?;
        if r.is_empty() {
            return Err(Error::Model(format!("R_t(0) is empty at {}", tree.name(n))));
        }
        let rc = r.poly().recession_cone();
        let v = rc.vrep();
        let wn = &w.at(tree, n)[..m];
        if v.rays.iter().any(|g| dot(wn, g).is_negative()) || v.lines.iter().any(|g| !dot(wn, g).is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteppedDuality {
    /// `inf E[w·u]` over `R_{t,s}(X)`.
    pub primal: ExtRat,
    /// Optimal value of the dual program over `A_{t,s}`.
    pub dual: ExtRat,
    /// The same primal through the full acceptance set.
    pub full_primal: ExtRat,
    /// For the pair extracted from the stepped dual: its value over `A_{t,s}`
    /// and over `A_t` (the latter must not exceed the former).
    pub pair_stepped: Option<ExtRat>,
    pub pair_full: Option<ExtRat>,
}

/// Duality of the stepped scalarization for `X ∈ M_s` and a weight adapted
/// at `t`.
pub fn check_stepped_duality(engine: &RiskEngine, x: &NodeVector<Rat>, w: &NodeVector<Rat>) -> Result<SteppedDuality> {
    let tree = engine.tree();
    let (t, s) = (w.time(), x.time());
    let m = tree.m();
    tree.check_times(t, s)?;
    check_weights(tree, w)?;
    if x.values().iter().any(|v| v[m..].iter().any(|a| !a.is_zero())) {
        return Err(Error::Dimension("stepped input must be eligible".into()));
    }
    let mut primal = Vec::new();
    let mut dual = Vec::new();
    let mut zs = Vec::new();
    for n in tree.nodes_at(t) {
        let step = stepped(tree, engine.acceptance(n)?, n, s);
        let k = tree.descendants_at(n, s).len();
        // u ∈ ℝ^m replicated to every time-s descendant
        let mut e = vec![vec![Rat::zero(); m]; m * k];
        for a in 0..k {
            for i in 0..m {
                e[a * m + i][i] = Rat::from_integer(1.into());
            }
        }
        let lp = node_primal_dual(&step, &e, &stack_at(tree, x, n, m), &w.at(tree, n)[..m]);
        primal.push(lp.value);
        dual.push(lp.dual_value.unwrap_or(ExtRat::NegInf));
        zs.push(lp.z);
    }
    let full = rho(engine, &x.lift(tree, tree.horizon()), w)?;
    let mut out = SteppedDuality {
        primal: weighted_sum(tree, t, &primal),
        dual: weighted_sum(tree, t, &dual),
        full_primal: full.primal,
        pair_stepped: None,
        pair_full: None,
    };
    if let Some(zs) = zs.into_iter().collect::<Option<Vec<_>>>() {
        // Lift stepped multipliers to the leaf space: mass at a time-s node is
        // spread over its leaves proportionally to P.
        let d = tree.d();
        let z_leaf: Vec<Vec<Rat>> = tree
            .nodes_at(t)
            .zip(&zs)
            .map(|(n, z)| {
                let ds = tree.descendants_at(n, s);
                tree.leaves(n)
                    .flat_map(|l| {
                        let a = tree.ancestor_at(l, s);
                        let share = tree.cond_prob(l, a);
                        (0..d).map(move |i| if i < m { &z[(a - ds.start) * m + i] * &share } else { Rat::zero() }).collect::<Vec<_>>()
                    })
                    .collect()
            })
            .collect();
        if out.primal.is_finite() {
            let pair = pair_from_multipliers(tree, t, &z_leaf)?;
            let zero = OrthComplement::zero(tree, t);
            out.pair_full = Some(rho_dual_value(engine, x, &pair, &zero)?);
            out.pair_stepped = Some(stepped_dual_value(engine, x, &pair)?);
        }
    }
    Ok(out)
}

/// `Σ_n P(n) [inf_{Y ∈ A_{t,s}(n)} E[w_t^s·Y | n] − E[w_t^s·X | n]]` for `X ∈ M_s`.
pub fn stepped_dual_value(engine: &RiskEngine, x: &NodeVector<Rat>, pair: &DualPair) -> Result<ExtRat> {
    let tree = engine.tree();
    let (t, s) = (pair.t, x.time());
    let (d, m) = (tree.d(), tree.m());
    let vals: Vec<ExtRat> = tree
        .nodes_at(t)
        .map(|n| {
            let f_full = node_functional(tree, &pair.q, pair.w.at(tree, n), n, s);
            let f: Vec<Rat> = f_full.chunks(d).flat_map(|c| c[..m].to_vec()).collect();
            let step = stepped(tree, engine.acceptance(n)?, n, s);
            Ok(step.support_value(&f) + ExtRat::Finite(-dot(&f, &stack_at(tree, x, n, m))))
        })
        .collect::<Result<_>>()?;
    Ok(weighted_sum(tree, t, &vals))
}

/// `ρ_t(X) = E[w·r_t]` for the entropic corners `r_t`, `w ≥ 0`.
pub fn rho_entropic(tree: &ScenarioTree, x: &NodeVector<f64>, rates: &[f64], w: &NodeVector<Rat>) -> Result<f64> {
    let t = w.time();
    let r = compose_entropic(tree, &x.lift(tree, tree.horizon()), rates)?;
    Ok(tree
        .nodes_at(t)
        .map(|n| {
            let p = crate::num::rat_to_f64(tree.prob(n));
            let wn = w.at(tree, n);
            p * wn.iter().zip(r[t].at(tree, n)).map(|(a, b)| crate::num::rat_to_f64(a) * b).sum::<f64>()
        })
        .sum())
}

/// `E[w·(E^Q[−X | F_t] − diag(1/λ) Ĥ_t(Q | P))]`, a lower bound of
/// [`rho_entropic`] attained by the Gibbs tilt.
pub fn rho_dual_entropic(tree: &ScenarioTree, x: &NodeVector<f64>, rates: &[f64], pair: &DualPair) -> Result<f64> {
    let t = pair.t;
    let xt = x.lift(tree, tree.horizon());
    let e = cond_expect(tree, &pair.q, &xt, t)?;
    Ok(tree
        .nodes_at(t)
        .map(|n| {
            let p = crate::num::rat_to_f64(tree.prob(n));
            let wn = pair.w.at(tree, n);
            let v: f64 = (0..tree.d())
                .map(|i| {
                    let h = cond_entropy(tree, &pair.q, i, n, tree.horizon());
                    crate::num::rat_to_f64(&wn[i]) * (-e.at(tree, n)[i] - h / rates[i])
                })
                .sum();
            p * v
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::polycalc::ivec;
    use crate::riskmeasures::RiskModel;

    fn avar_engine(lam: Rat) -> (RiskEngine, NodeVector<Rat>) {
        let tree = ScenarioTree::uniform(&[2], 1, 1).unwrap();
        let x = NodeVector::new(&tree, 1, vec![ivec(&[0]), ivec(&[-1])]).unwrap();
        let eng = RiskEngine::new(tree, RiskModel::Avar { levels: vec![vec![lam]], composed: true }).unwrap();
        (eng, x)
    }

    #[test]
    fn two_point_dual_concentrates() {
        let (eng, x) = avar_engine(rat(1, 2));
        let w = NodeVector::constant(eng.tree(), 0, ivec(&[1]));
        let r = rho(&eng, &x, &w).unwrap();
        assert_eq!(r.primal, ExtRat::Finite(int(1)));
        assert_eq!(r.gap, Some(ExtRat::zero()));
        let pair = r.pair.unwrap();
        // all mass on the losing scenario: density 2 = 1/λ there
        assert_eq!(pair.q.transition(0, 2), &int(1));
        let zero = OrthComplement::zero(eng.tree(), 0);
        assert_eq!(rho_dual_value(&eng, &x, &pair, &zero).unwrap(), ExtRat::Finite(int(1)));
    }

    #[test]
    fn level_one_gives_reference_measure() {
        let (eng, x) = avar_engine(int(1));
        let w = NodeVector::constant(eng.tree(), 0, ivec(&[3]));
        let r = rho(&eng, &x, &w).unwrap();
        assert_eq!(r.primal, ExtRat::Finite(rat(3, 2)));
        let pair = r.pair.unwrap();
        assert_eq!(pair.q, VectorMeasure::reference(eng.tree()));
        assert_eq!(pair.w.values(), &[ivec(&[3])]);
    }

    #[test]
    fn negative_weight_is_improper() {
        let tree = ScenarioTree::uniform(&[2], 2, 2).unwrap();
        let x = NodeVector::zeros(&tree, 1);
        let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: vec![vec![rat(1, 2); 2]], composed: true }).unwrap();
        let w = NodeVector::constant(&tree, 0, ivec(&[1, -1]));
        assert_eq!(rho(&eng, &x, &w).unwrap().primal, ExtRat::NegInf);
        assert!(!check_proper(&eng, &w).unwrap());
        assert!(check_proper(&eng, &NodeVector::constant(&tree, 0, ivec(&[1, 2]))).unwrap());
    }

    #[test]
    fn stepped_reduces_to_rho() {
        let tree = ScenarioTree::uniform(&[2, 2], 1, 1).unwrap();
        let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: vec![vec![rat(1, 3)], vec![rat(1, 2)]], composed: true }).unwrap();
        let x = NodeVector::new(&tree, 1, vec![ivec(&[2]), ivec(&[-1])]).unwrap();
        let w = NodeVector::constant(&tree, 0, ivec(&[1]));
        let sd = check_stepped_duality(&eng, &x, &w).unwrap();
        assert_eq!(sd.primal, sd.dual);
        assert_eq!(sd.primal, sd.full_primal);
        assert!(sd.pair_full.unwrap() <= sd.pair_stepped.unwrap());
    }
}
