//! Acceptance sets on the leaf space of each node and the risk measures
//! they induce.
//!
//! `A_t(n)` lives in `ℝ^{d·L(n)}` where `L(n)` is the number of leaves below
//! `n`; coordinate `k * d + i` is component `i` at the `k`-th leaf. Positions
//! adapted at an earlier time are replicated over the leaves below them.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::num::Rat;
use crate::polycalc::{Polyhedron, UpperPolyhedron, VRep};
use crate::scenario::{NodeId, NodeVector, ScenarioTree};

/// The `(d·L(n)) × (k·K)` matrix that copies `k` leading coordinates of each
/// time-`s` descendant of `n` to every leaf below it (`K` descendants).
pub fn replication(tree: &ScenarioTree, n: NodeId, s: usize, k: usize) -> Vec<Vec<Rat>> {
    let d = tree.d();
    let leaves = tree.leaves(n);
    let desc = tree.descendants_at(n, s);
    let cols = k * desc.len();
    let mut e = vec![vec![Rat::zero(); cols]; d * leaves.len()];
    for (lp, l) in leaves.enumerate() {
        let a = tree.ancestor_at(l, s) - desc.start;
        for i in 0..k {
            e[lp * d + i][a * k + i] = Rat::one();
        }
    }
    e
}

/// Values of an adapted vector replicated over the leaves of `n`.
pub fn stack_leaves(tree: &ScenarioTree, x: &NodeVector<Rat>, n: NodeId) -> Vec<Rat> {
    tree.leaves(n).flat_map(|l| x.at_ancestor(tree, l).to_vec()).collect()
}

/// Values of an adapted vector at the time-`s` descendants of `n`, first `k`
/// coordinates of each.
pub fn stack_at(tree: &ScenarioTree, x: &NodeVector<Rat>, n: NodeId, k: usize) -> Vec<Rat> {
    tree.descendants_at(n, x.time()).flat_map(|c| x.at(tree, c)[..k].to_vec()).collect()
}

fn apply(e: &[Vec<Rat>], x: &[Rat]) -> Vec<Rat> {
    e.iter().map(|row| row.iter().zip(x).filter(|(a, _)| !a.is_zero()).map(|(a, b)| a * b).sum()).collect()
}

/// Generators of a set, transported by a linear map.
pub(crate) fn map_vrep(v: &VRep, e: &[Vec<Rat>]) -> VRep {
    VRep {
        vertices: v.vertices.iter().map(|x| apply(e, x)).collect(),
        rays: v.rays.iter().map(|x| apply(e, x)).collect(),
        lines: v.lines.iter().map(|x| apply(e, x)).collect(),
    }
}

/// Generators of a set placed in a block of a larger space, zero elsewhere.
pub(crate) fn embed_vrep(v: &VRep, offset: usize, dim: usize) -> VRep {
    let place = |x: &Vec<Rat>| {
        let mut out = vec![Rat::zero(); dim];
        out[offset..offset + x.len()].clone_from_slice(x);
        out
    };
    VRep {
        vertices: v.vertices.iter().map(place).collect(),
        rays: v.rays.iter().map(place).collect(),
        lines: v.lines.iter().map(place).collect(),
    }
}

/// Minkowski sum of generator lists in a common space.
pub(crate) fn sum_vreps(dim: usize, parts: &[VRep]) -> Polyhedron {
    let mut vertices = vec![vec![Rat::zero(); dim]];
    let mut rays = Vec::new();
    let mut lines = Vec::new();
    for v in parts {
        if v.is_empty() {
            return Polyhedron::empty(dim);
        }
        let mut next = Vec::with_capacity(vertices.len() * v.vertices.len());
        for a in &vertices {
            for b in &v.vertices {
                next.push(a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<Rat>>());
            }
        }
        next.sort();
        next.dedup();
        vertices = next;
        rays.extend(v.rays.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned());
        lines.extend(v.lines.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned());
    }
    Polyhedron::from_vrep(dim, vertices, rays, lines)
}

/// Acceptance sets of every node, indexed by node id.
#[derive(Clone, Debug)]
pub struct AcceptanceFamily {
    sets: Vec<Polyhedron>,
}

impl AcceptanceFamily {
    pub fn from_sets(tree: &ScenarioTree, sets: Vec<Polyhedron>) -> Result<Self> {
        if sets.len() != tree.len() {
            return Err(Error::Dimension("one acceptance set per node expected".into()));
        }
        for (n, a) in sets.iter().enumerate() {
            if a.dim() != tree.d() * tree.leaves(n).len() {
                return Err(Error::Dimension(format!("acceptance set at {} has dimension {}", tree.name(n), a.dim())));
            }
        }
        Ok(AcceptanceFamily { sets })
    }

    /// Backward construction `A_t(n) = inc(n) ⊕ Π_c A_{t+1}(c)`. `inc(n)` is
    /// given as generators on the leaf space of `n`; `terminal(l)` is the
    /// acceptance set of leaf `l` in `ℝ^d`.
    pub fn compose(
        tree: &ScenarioTree,
        inc: impl Fn(NodeId) -> Result<VRep> + Sync,
        terminal: impl Fn(NodeId) -> Polyhedron + Sync,
    ) -> Result<Self> {
        let horizon = tree.horizon();
        let mut sets: Vec<Option<Polyhedron>> = vec![None; tree.len()];
        for l in tree.nodes_at(horizon) {
            sets[l] = Some(terminal(l));
        }
        for t in (0..horizon).rev() {
            let built: Vec<Result<Polyhedron>> = tree
                .nodes_at(t)
                .into_par_iter()
                .map(|n| {
                    let d = tree.d();
                    let dim = d * tree.leaves(n).len();
                    let mut parts = vec![inc(n)?];
                    let mut off = 0;
                    for &c in tree.children(n) {
                        let a = sets[c].as_ref().unwrap();
                        parts.push(embed_vrep(a.vrep(), off, dim));
                        off += a.dim();
                    }
                    Ok(sum_vreps(dim, &parts))
                })
                .collect();
            for (n, a) in tree.nodes_at(t).zip(built) {
                sets[n] = Some(a?);
            }
        }
        Ok(AcceptanceFamily { sets: sets.into_iter().map(Option::unwrap).collect() })
    }

    /// Builds each set independently, in parallel.
    pub fn direct(tree: &ScenarioTree, f: impl Fn(NodeId) -> Result<Polyhedron> + Sync + Send) -> Result<Self> {
        let sets = (0..tree.len()).into_par_iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::from_sets(tree, sets)
    }

    pub fn at(&self, n: NodeId) -> &Polyhedron {
        &self.sets[n]
    }

    pub fn sets(&self) -> &[Polyhedron] {
        &self.sets
    }
}

/// `R_t(X)(n) = {u ∈ M : X + u ∈ A_t(n)}` with `u` replicated over the leaves.
pub fn risk_from_acceptance(tree: &ScenarioTree, a: &Polyhedron, x: &NodeVector<Rat>, n: NodeId) -> UpperPolyhedron {
    let m = tree.m();
    let e = replication(tree, n, tree.time(n), m);
    let c = stack_leaves(tree, x, n);
    UpperPolyhedron::from_poly_unchecked(tree.d(), a.preimage(&e, m, &c))
}

/// `A_{t,s}(n) = A_t(n) ∩ M_s` in the coordinates of the eligible values at
/// the time-`s` descendants of `n`.
pub fn stepped(tree: &ScenarioTree, a: &Polyhedron, n: NodeId, s: usize) -> Polyhedron {
    let m = tree.m();
    let k = m * tree.descendants_at(n, s).len();
    let e = replication(tree, n, s, m);
    a.preimage(&e, k, &vec![Rat::zero(); a.dim()])
}

/// `A_{t,s}(n) ⊕ Π_c A_s(c)` on the leaf space of `n`, the right-hand side of
/// the recursive acceptance identity.
pub fn stepped_sum(tree: &ScenarioTree, family: &AcceptanceFamily, n: NodeId, s: usize) -> Polyhedron {
    let d = tree.d();
    let dim = d * tree.leaves(n).len();
    let step = stepped(tree, family.at(n), n, s);
    let e = replication(tree, n, s, tree.m());
    let mut parts = vec![map_vrep(step.vrep(), &e)];
    let mut off = 0;
    for c in tree.descendants_at(n, s) {
        let a = family.at(c);
        parts.push(embed_vrep(a.vrep(), off, dim));
        off += a.dim();
    }
    sum_vreps(dim, &parts)
}
