//! Average value at risk: node-wise Rockafellar–Uryasev values, the density
//! polytope of its dual, and the corresponding acceptance cones.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::num::{dot, Rat};
use crate::polycalc::{Polyhedron, Row};
use crate::scenario::{NodeVector, ScenarioTree};

/// `min_q q + (1/λ) Σ p_k (L_k − q)^+` for losses `L` with probabilities `p`.
/// The objective is piecewise linear and convex in `q`, so a breakpoint is optimal.
pub fn avar_value(probs: &[Rat], losses: &[Rat], lambda: &Rat) -> Rat {
    assert_eq!(probs.len(), losses.len());
    let inv = lambda.recip();
    losses
        .iter()
        .map(|q| {
            let tail: Rat = probs
                .iter()
                .zip(losses)
                .filter(|(_, l)| *l > q)
                .map(|(p, l)| p * (l - q))
                .sum();
            q + &inv * tail
        })
        .min()
        .expect("at least one scenario")
}

/// Vertices of `{ξ : 0 ≤ ξ ≤ 1/λ, Σ p_k ξ_k = 1}`.
pub fn density_vertices(probs: &[Rat], lambda: &Rat) -> Vec<Vec<Rat>> {
    let k = probs.len();
    let inv = lambda.recip();
    let mut rows = Vec::with_capacity(2 * k);
    for j in 0..k {
        let mut e = vec![Rat::zero(); k];
        e[j] = Rat::one();
        rows.push(Row::new(e.clone(), Rat::zero()));
        rows.push(Row::new(e.into_iter().map(|x| -x).collect(), -inv.clone()));
    }
    let eq = Row::new(probs.to_vec(), Rat::one());
    Polyhedron::from_hrep_eq(k, rows, vec![eq]).vrep().vertices.clone()
}

/// `sup_ξ Σ p_k ξ_k L_k` over the density polytope: the dual value of [`avar_value`].
pub fn avar_dual_value(probs: &[Rat], losses: &[Rat], lambda: &Rat) -> Rat {
    density_vertices(probs, lambda)
        .iter()
        .map(|xi| probs.iter().zip(xi).zip(losses).map(|((p, x), l)| p * x * l).sum::<Rat>())
        .max()
        .expect("density polytope is nonempty")
}

pub(crate) fn check_level(lambda: &Rat) -> Result<()> {
    if !lambda.is_positive() || *lambda > Rat::one() {
        return Err(Error::Model(format!("AV@R level {lambda} outside (0, 1]")));
    }
    Ok(())
}

/// Acceptance rows of the componentwise AV@R over a block of positions with
/// probabilities `probs`: for every component `i` and density vertex `ξ`,
/// `Σ_k p_k ξ_k Y_{k,i} ≥ 0` on the stacked coordinates `k * d + i`.
pub fn acceptance_rows(probs: &[Rat], d: usize, levels: &[Rat]) -> Vec<Row> {
    let k = probs.len();
    let mut rows = Vec::new();
    for (i, lambda) in levels.iter().enumerate() {
        for xi in density_vertices(probs, lambda) {
            let mut a = vec![Rat::zero(); k * d];
            for j in 0..k {
                a[j * d + i] = &probs[j] * &xi[j];
            }
            rows.push(Row::new(a, Rat::zero()));
        }
    }
    rows
}

/// Conditional AV@R of one component of `X` (adapted at `s`) at every node
/// of time `t`, with a common level.
pub fn avar_scalar_cond(tree: &ScenarioTree, x: &NodeVector<Rat>, i: usize, lambda: &Rat, t: usize) -> Result<Vec<Rat>> {
    check_level(lambda)?;
    let s = x.time();
    tree.check_times(t, s)?;
    Ok(tree
        .nodes_at(t)
        .map(|n| {
            let desc = tree.descendants_at(n, s);
            let probs: Vec<Rat> = desc.clone().map(|c| tree.cond_prob(c, n)).collect();
            let losses: Vec<Rat> = desc.map(|c| -x.at(tree, c)[i].clone()).collect();
            avar_value(&probs, &losses, lambda)
        })
        .collect())
}

/// Corners of the non-composed AV@R at time `t`: `R_t(X)(n) = r(n) + ℝ^d_+`.
pub fn risk_avar(tree: &ScenarioTree, x: &NodeVector<Rat>, levels: &[Rat], t: usize) -> Result<NodeVector<Rat>> {
    if tree.m() != tree.d() {
        return Err(Error::Unsupported("box representation needs every asset eligible".into()));
    }
    if levels.len() != tree.d() {
        return Err(Error::Dimension("one level per component expected".into()));
    }
    let cols: Vec<Vec<Rat>> = (0..tree.d()).map(|i| avar_scalar_cond(tree, x, i, &levels[i], t)).collect::<Result<_>>()?;
    Ok(NodeVector::from_fn(tree, t, |n| cols.iter().map(|c| c[tree.pos(n)].clone()).collect()))
}

/// Corners of the composed AV@R at every time, `r_t = AV@R_t(−r_{t+1})` with
/// `r_T = −X`. `levels[t]` is the per-component level used on step `t → t+1`.
pub fn compose_avar(tree: &ScenarioTree, x: &NodeVector<Rat>, levels: &[Vec<Rat>]) -> Result<Vec<NodeVector<Rat>>> {
    let horizon = tree.horizon();
    if x.time() != horizon {
        return Err(Error::Index("portfolio must be terminal".into()));
    }
    if tree.m() != tree.d() {
        return Err(Error::Unsupported("box representation needs every asset eligible".into()));
    }
    let mut out = vec![x.map(|v| -v.clone())];
    for t in (0..horizon).rev() {
        let next = out.last().unwrap();
        let r = NodeVector::from_fn(tree, t, |n| {
            let ch = tree.children(n);
            let probs: Vec<Rat> = ch.iter().map(|&c| tree.p(c).clone()).collect();
            (0..tree.d())
                .map(|i| {
                    let losses: Vec<Rat> = ch.iter().map(|&c| next.at(tree, c)[i].clone()).collect();
                    avar_value(&probs, &losses, &levels[t][i])
                })
                .collect()
        });
        out.push(r);
    }
    out.reverse();
    Ok(out)
}

/// `E[ξ L]` at a density vertex, exposed for brute-force checks.
pub fn weighted_mean(probs: &[Rat], xi: &[Rat], losses: &[Rat]) -> Rat {
    let pw: Vec<Rat> = probs.iter().zip(xi).map(|(p, x)| p * x).collect();
    dot(&pw, losses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    #[test]
    fn level_one_is_expectation() {
        let p = vec![rat(1, 4), rat(3, 4)];
        let l = vec![int(4), int(-2)];
        assert_eq!(avar_value(&p, &l, &int(1)), rat(-1, 2));
    }

    #[test]
    fn two_point_tail() {
        let p = vec![rat(1, 2), rat(1, 2)];
        // X ∈ {0, −1}: losses {0, 1}
        assert_eq!(avar_value(&p, &[int(0), int(1)], &rat(1, 2)), int(1));
        assert_eq!(avar_dual_value(&p, &[int(0), int(1)], &rat(1, 2)), int(1));
    }

    #[test]
    fn deterministic_loss() {
        let p = vec![rat(1, 3), rat(2, 3)];
        assert_eq!(avar_value(&p, &[int(5), int(5)], &rat(1, 3)), int(5));
    }

    #[test]
    fn primal_matches_dual_on_grid() {
        let p = vec![rat(1, 5), rat(3, 10), rat(1, 2)];
        for lam in [rat(1, 10), rat(1, 3), rat(1, 2), rat(4, 5), int(1)] {
            for l in [[int(1), int(-2), int(3)], [rat(1, 2), int(0), int(0)], [int(-1), int(-1), int(7)]] {
                assert_eq!(avar_value(&p, &l, &lam), avar_dual_value(&p, &l, &lam));
            }
        }
    }

    #[test]
    fn density_vertices_binary() {
        let p = vec![rat(1, 2), rat(1, 2)];
        let v = density_vertices(&p, &rat(2, 3));
        assert_eq!(v, vec![vec![rat(1, 2), rat(3, 2)], vec![rat(3, 2), rat(1, 2)]]);
        assert_eq!(density_vertices(&p, &int(1)), vec![vec![int(1), int(1)]]);
    }
}
