//! Superhedging under proportional transaction costs: the backward
//! recursion on node sets and an independent stacked linear program over
//! full trading strategies.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::lp::{Cmp, LinearProgram, LpOutcome};
use crate::num::{ExtRat, Rat};
use crate::polycalc::{Polyhedron, Row, UpperPolyhedron};
use crate::scenario::{NodeId, NodeVector, ScenarioTree};

/// Checks that every market set is `d`-dimensional and contains `ℝ^d_+`
/// in its recession cone and that `0` is solvent.
pub fn validate_market(tree: &ScenarioTree, market: &[Polyhedron]) -> Result<()> {
    let d = tree.d();
    if market.len() != tree.len() {
        return Err(Error::Dimension("one solvency set per node expected".into()));
    }
    for (n, k) in market.iter().enumerate() {
        if k.dim() != d {
            return Err(Error::Dimension(format!("solvency set at {} has dimension {}", tree.name(n), k.dim())));
        }
        if k.is_empty() {
            return Err(Error::Model(format!("solvency set at {} is empty", tree.name(n))));
        }
        let rc = k.recession_cone();
        for i in 0..d {
            let mut e = vec![Rat::zero(); d];
            e[i] = Rat::one();
            if !rc.contains_point(&e) {
                return Err(Error::Model(format!("solvency set at {} does not contain the positive orthant", tree.name(n))));
            }
        }
    }
    Ok(())
}

/// Bid-ask solvency cone of two assets: generated by the unit vectors and
/// the exchange directions `(a, −1)`, `(−1, b)`.
pub fn bid_ask_cone(a: &Rat, b: &Rat) -> Polyhedron {
    let (z, o) = (Rat::zero(), Rat::one());
    Polyhedron::from_vrep(
        2,
        vec![vec![z.clone(), z.clone()]],
        vec![vec![o.clone(), z.clone()], vec![z.clone(), o.clone()], vec![a.clone(), -o.clone()], vec![-o, b.clone()]],
        vec![],
    )
}

/// `R_t(X) = SHP_t(−X)` at every node, indexed by node id:
/// `R_T(X)(l) = −X(l) + K_T(l)` and `R_t(X)(n) = [∩_c R_{t+1}(X)(c)] ⊕ K_t(n)`.
/// The first node whose set becomes empty is reported alongside.
pub fn shp_recursion(tree: &ScenarioTree, market: &[Polyhedron], x: &NodeVector<Rat>) -> Result<(Vec<UpperPolyhedron>, Option<NodeId>)> {
    validate_market(tree, market)?;
    let d = tree.d();
    if tree.m() != d {
        return Err(Error::Unsupported("the explicit superhedging recursion needs every asset eligible".into()));
    }
    let horizon = tree.horizon();
    let xt = x.lift(tree, horizon);
    let mut sets: Vec<Option<Polyhedron>> = vec![None; tree.len()];
    let mut empty_at = None;
    for l in tree.nodes_at(horizon) {
        let neg: Vec<Rat> = xt.at(tree, l).iter().map(|v| -v).collect();
        let s = market[l].translate(&neg);
        if s.is_empty() && empty_at.is_none() {
            empty_at = Some(l);
        }
        sets[l] = Some(s);
    }
    for t in (0..horizon).rev() {
        for n in tree.nodes_at(t) {
            let mut inter = Polyhedron::whole(d);
            for &c in tree.children(n) {
                inter = inter.intersect(sets[c].as_ref().unwrap());
            }
            if inter.is_empty() && empty_at.is_none() {
                empty_at = Some(n);
            }
            sets[n] = Some(inter.minkowski_sum(&market[n]));
        }
    }
    let out = sets.into_iter().map(|s| UpperPolyhedron::from_poly_unchecked(d, s.unwrap())).collect();
    Ok((out, empty_at))
}

/// Variables: `u ∈ ℝ^d` followed by a trade `k_v ∈ ℝ^d` for every node of
/// the subtree of `n`. Rows: `k_v ∈ K_v` (or its recession cone when
/// `homogeneous`), and for every leaf `u + X(l) = Σ_{v ∈ path(n, l)} k_v`.
fn strategy_lp(tree: &ScenarioTree, market: &[Polyhedron], x: &NodeVector<Rat>, n: NodeId, homogeneous: bool) -> (LinearProgram, Vec<NodeId>) {
    let d = tree.d();
    let horizon = tree.horizon();
    let xt = x.lift(tree, horizon);
    let nodes: Vec<NodeId> = (tree.time(n)..=horizon).flat_map(|s| tree.descendants_at(n, s)).collect();
    let nv = d * (1 + nodes.len());
    let mut lp = LinearProgram::new(nv).all_free();
    let idx = |v: NodeId| 1 + nodes.iter().position(|&w| w == v).unwrap();
    for &v in &nodes {
        let h = market[v].hrep();
        let off = d * idx(v);
        let lift = |r: &Row| {
            let mut a = vec![Rat::zero(); nv];
            a[off..off + d].clone_from_slice(&r.a);
            a
        };
        for r in &h.ineqs {
            lp.row(lift(r), Cmp::Ge, if homogeneous { Rat::zero() } else { r.b.clone() });
        }
        for r in &h.eqs {
            lp.row(lift(r), Cmp::Eq, if homogeneous { Rat::zero() } else { r.b.clone() });
        }
    }
    for l in tree.leaves(n) {
        for i in 0..d {
            let mut a = vec![Rat::zero(); nv];
            a[i] = Rat::one();
            let mut v = l;
            loop {
                a[d * idx(v) + i] = -Rat::one();
                if v == n {
                    break;
                }
                v = tree.parent(v).unwrap();
            }
            let rhs = if homogeneous { Rat::zero() } else { -xt.at(tree, l)[i].clone() };
            lp.row(a, Cmp::Eq, rhs);
        }
    }
    (lp, nodes)
}

/// `inf {w·u : u superhedges −X from n}` by the stacked strategy LP.
pub fn shp_lp_support(tree: &ScenarioTree, market: &[Polyhedron], x: &NodeVector<Rat>, n: NodeId, w: &[Rat]) -> ExtRat {
    let (mut lp, _) = strategy_lp(tree, market, x, n, false);
    lp.objective[..w.len()].clone_from_slice(w);
    match lp.minimize() {
        LpOutcome::Optimal { value, .. } => ExtRat::Finite(value),
        LpOutcome::Infeasible => ExtRat::PosInf,
        LpOutcome::Unbounded => ExtRat::NegInf,
    }
}

/// Whether `u` (or the direction `u` when `direction` is set) is attainable
/// by some trading strategy from `n`.
pub fn shp_lp_contains(tree: &ScenarioTree, market: &[Polyhedron], x: &NodeVector<Rat>, n: NodeId, u: &[Rat], direction: bool) -> bool {
    let (mut lp, _) = strategy_lp(tree, market, x, n, direction);
    for (i, ui) in u.iter().enumerate() {
        let mut a = vec![Rat::zero(); lp.n];
        a[i] = Rat::one();
        lp.row(a, Cmp::Eq, ui.clone());
    }
    !matches!(lp.minimize(), LpOutcome::Infeasible)
}

/// Compares a node set against the strategy LP in both directions: every
/// generator must be attainable and every facet must bound the LP.
pub fn shp_matches_oracle(tree: &ScenarioTree, market: &[Polyhedron], x: &NodeVector<Rat>, n: NodeId, set: &Polyhedron) -> bool {
    let v = set.vrep();
    if v.is_empty() {
        return shp_lp_support(tree, market, x, n, &vec![Rat::zero(); tree.d()]) == ExtRat::PosInf;
    }
    let gens_ok = v.vertices.iter().all(|g| shp_lp_contains(tree, market, x, n, g, false))
        && v.rays.iter().all(|g| shp_lp_contains(tree, market, x, n, g, true))
        && v.lines.iter().all(|g| {
            let neg: Vec<Rat> = g.iter().map(|a| -a).collect();
            shp_lp_contains(tree, market, x, n, g, true) && shp_lp_contains(tree, market, x, n, &neg, true)
        });
    if !gens_ok {
        return false;
    }
    let h = set.hrep();
    let bound = |a: &[Rat], b: &Rat| shp_lp_support(tree, market, x, n, a) >= ExtRat::Finite(b.clone());
    h.ineqs.iter().all(|r| bound(&r.a, &r.b))
        && h.eqs.iter().all(|r| {
            let neg: Vec<Rat> = r.a.iter().map(|a| -a).collect();
            bound(&r.a, &r.b) && bound(&neg, &-r.b.clone())
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;
    use crate::polycalc::ivec;

    #[test]
    fn discard_only_market_gives_max() {
        let tree = ScenarioTree::uniform(&[2, 2], 2, 2).unwrap();
        let market = vec![Polyhedron::orthant_at(ivec(&[0, 0])); tree.len()];
        let x = NodeVector::from_fn(&tree, 2, |n| ivec(&[n as i64 - 5, 2 - n as i64]));
        let (sets, empty) = shp_recursion(&tree, &market, &x).unwrap();
        assert!(empty.is_none());
        // R(X) = SHP(−X): corner is the max over leaves of −X.
        assert_eq!(sets[0].as_corner(), Some(ivec(&[2, 4])));
        assert!(shp_matches_oracle(&tree, &market, &x, 0, sets[0].poly()));
    }

    #[test]
    fn bid_ask_one_period() {
        let tree = ScenarioTree::uniform(&[2], 2, 2).unwrap();
        let k = bid_ask_cone(&int(2), &int(2));
        let market = vec![k; tree.len()];
        // Claim paying (1,0) in a and (0,1) in b, so X = −claim.
        let x = NodeVector::new(&tree, 1, vec![ivec(&[-1, 0]), ivec(&[0, -1])]).unwrap();
        let (sets, _) = shp_recursion(&tree, &market, &x).unwrap();
        let root = sets[0].poly();
        assert!(shp_matches_oracle(&tree, &market, &x, 0, root));
        assert!(root.contains_point(&ivec(&[1, 1])));
        assert!(!root.contains_point(&ivec(&[0, 0])));
        let zero = NodeVector::zeros(&tree, 1);
        let (s0, _) = shp_recursion(&tree, &market, &zero).unwrap();
        assert!(s0[0].contains_point(&ivec(&[0, 0])));
        assert!(s0[0].poly().contains(&market[0]).is_ok());
    }
}
