//! Finite filtered probability spaces as scenario trees, adapted random
//! vectors, vector probability measures and conditional expectations.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{fmt_rat, parse_rat, Backend, Rat, Scalar};
use crate::polycalc::{Polyhedron, UpperPolyhedron};

pub type NodeId = usize;

#[derive(Clone, Debug)]
struct Node {
    name: String,
    parent: Option<NodeId>,
    time: usize,
    p: Rat,
    children: Vec<NodeId>,
}

/// Rooted tree with strictly positive transition probabilities.
///
/// Nodes are numbered breadth first, so the nodes at each time form a
/// contiguous index range and the descendants of a node at any later time
/// form a contiguous range as well.
#[derive(Clone, Debug)]
pub struct ScenarioTree {
    nodes: Vec<Node>,
    level_start: Vec<usize>,
    prob: Vec<Rat>,
    d: usize,
    m: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeJson {
    pub d: usize,
    pub m: usize,
    pub nodes: Vec<NodeJson>,
}

impl ScenarioTree {
    /// Builds a tree from `(name, parent, p(child | parent))` triples. The
    /// root is the unique entry without a parent.
    pub fn from_edges(d: usize, m: usize, entries: &[(String, Option<String>, Rat)]) -> Result<Self> {
        if d == 0 || m == 0 || m > d {
            return Err(Error::Tree(format!("need 1 <= m <= d, got m = {m}, d = {d}")));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, (name, _, _)) in entries.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return Err(Error::Tree(format!("duplicate node id {name:?}")));
            }
        }
        let roots: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].1.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Tree(format!("expected exactly one root, found {}", roots.len())));
        }
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); entries.len()];
        for (i, (name, parent, p)) in entries.iter().enumerate() {
            if let Some(par) = parent {
                let &pi = index
                    .get(par.as_str())
                    .ok_or_else(|| Error::Tree(format!("node {name:?} has unknown parent {par:?}")))?;
                if !p.is_positive() {
                    return Err(Error::Tree(format!("edge into {name:?} has nonpositive probability")));
                }
                kids[pi].push(i);
            }
        }
        // Breadth-first renumbering.
        let mut order = vec![roots[0]];
        let mut time_of = vec![0usize];
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            let t = time_of[head];
            for &c in &kids[v] {
                order.push(c);
                time_of.push(t + 1);
            }
            head += 1;
        }
        if order.len() != entries.len() {
            return Err(Error::Tree("tree is not connected".into()));
        }
        let mut new_id = vec![0; entries.len()];
        for (k, &v) in order.iter().enumerate() {
            new_id[v] = k;
        }
        let mut nodes: Vec<Node> = order
            .iter()
            .zip(&time_of)
            .map(|(&v, &t)| Node {
                name: entries[v].0.clone(),
                parent: entries[v].1.as_ref().map(|p| new_id[index[p.as_str()]]),
                time: t,
                p: if entries[v].1.is_some() { entries[v].2.clone() } else { Rat::one() },
                children: kids[v].iter().map(|&c| new_id[c]).collect(),
            })
            .collect();
        for n in nodes.iter_mut() {
            n.children.sort();
        }
        let horizon = *time_of.iter().max().unwrap();
        for n in &nodes {
            if n.children.is_empty() && n.time != horizon {
                return Err(Error::Tree(format!("leaf {:?} at time {} before horizon {horizon}", n.name, n.time)));
            }
            if !n.children.is_empty() {
                let s: Rat = n.children.iter().map(|&c| nodes[c].p.clone()).sum();
                if !s.is_one() {
                    return Err(Error::Tree(format!("children of {:?} have total probability {}", n.name, fmt_rat(&s))));
                }
            }
        }
        let mut level_start = vec![0; horizon + 2];
        for t in 0..=horizon {
            level_start[t + 1] = level_start[t] + nodes.iter().filter(|n| n.time == t).count();
        }
        let mut prob = vec![Rat::one(); nodes.len()];
        for i in 1..nodes.len() {
            let par = nodes[i].parent.unwrap();
            prob[i] = &prob[par] * &nodes[i].p;
        }
        Ok(ScenarioTree { nodes, level_start, prob, d, m })
    }

    /// A tree where every node at time `t` has `branching[t]` equally likely children.
    pub fn uniform(branching: &[usize], d: usize, m: usize) -> Result<Self> {
        let mut entries = vec![("r".to_string(), None, Rat::one())];
        let mut frontier = vec!["r".to_string()];
        for &k in branching {
            if k == 0 {
                return Err(Error::Tree("branching factor zero".into()));
            }
            let mut next = Vec::new();
            for par in &frontier {
                for c in 0..k {
                    let name = format!("{par}{c}");
                    entries.push((name.clone(), Some(par.clone()), Rat::new(1.into(), (k as i64).into())));
                    next.push(name);
                }
            }
            frontier = next;
        }
        Self::from_edges(d, m, &entries)
    }

    pub fn from_json(j: &TreeJson) -> Result<Self> {
        let mut entries = Vec::with_capacity(j.nodes.len());
        for n in &j.nodes {
            let p = match (&n.parent, &n.p) {
                (None, _) => Rat::one(),
                (Some(_), Some(p)) => parse_rat(p)?,
                (Some(_), None) => return Err(Error::Parse(format!("node {:?} lacks a probability", n.id))),
            };
            entries.push((n.id.clone(), n.parent.clone(), p));
        }
        Self::from_edges(j.d, j.m, &entries)
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            d: self.d,
            m: self.m,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeJson {
                    id: n.name.clone(),
                    parent: n.parent.map(|p| self.nodes[p].name.clone()),
                    p: n.parent.map(|_| fmt_rat(&n.p)),
                })
                .collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.level_start.len() - 2
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The same tree with a different number of eligible assets.
    pub fn with_eligible(&self, m: usize) -> Result<Self> {
        if m == 0 || m > self.d {
            return Err(Error::Tree(format!("need 1 <= m <= d, got m = {m}")));
        }
        let mut t = self.clone();
        t.m = m;
        Ok(t)
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn name(&self, n: NodeId) -> &str {
        &self.nodes[n].name
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    pub fn time(&self, n: NodeId) -> usize {
        self.nodes[n].time
    }

    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        self.nodes[n].parent
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.nodes[n].children
    }

    /// Reference transition probability `p(n | parent(n))`; one at the root.
    pub fn p(&self, n: NodeId) -> &Rat {
        &self.nodes[n].p
    }

    /// Unconditional reference probability of reaching `n`.
    pub fn prob(&self, n: NodeId) -> &Rat {
        &self.prob[n]
    }

    /// `P(n | a)` for a descendant `n` of `a`.
    pub fn cond_prob(&self, n: NodeId, a: NodeId) -> Rat {
        &self.prob[n] / &self.prob[a]
    }

    pub fn nodes_at(&self, t: usize) -> Range<NodeId> {
        self.level_start[t]..self.level_start[t + 1]
    }

    pub fn count_at(&self, t: usize) -> usize {
        self.level_start[t + 1] - self.level_start[t]
    }

    /// Position of `n` among the nodes of its time.
    pub fn pos(&self, n: NodeId) -> usize {
        n - self.level_start[self.time(n)]
    }

    pub fn ancestor_at(&self, mut n: NodeId, t: usize) -> NodeId {
        assert!(t <= self.time(n), "ancestor time after node time");
        while self.time(n) > t {
            n = self.parent(n).unwrap();
        }
        n
    }

    pub fn is_descendant(&self, n: NodeId, a: NodeId) -> bool {
        self.time(n) >= self.time(a) && self.ancestor_at(n, self.time(a)) == a
    }

    /// Descendants of `n` at time `s ≥ time(n)`, as a contiguous id range.
    pub fn descendants_at(&self, n: NodeId, s: usize) -> Range<NodeId> {
        assert!(s >= self.time(n) && s <= self.horizon());
        let (mut lo, mut hi) = (n, n);
        for _ in self.time(n)..s {
            lo = self.nodes[lo].children[0];
            hi = *self.nodes[hi].children.last().unwrap();
        }
        lo..hi + 1
    }

    pub fn leaves(&self, n: NodeId) -> Range<NodeId> {
        self.descendants_at(n, self.horizon())
    }

    pub fn check_times(&self, t: usize, s: usize) -> Result<()> {
        if t > s || s > self.horizon() {
            return Err(Error::Index(format!("need 0 <= t <= s <= {}, got t = {t}, s = {s}", self.horizon())));
        }
        Ok(())
    }
}

/// An adapted random vector: one `d`-vector per node at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeVector<S: Scalar> {
    t: usize,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> NodeVector<S> {
    pub fn new(tree: &ScenarioTree, t: usize, values: Vec<Vec<S>>) -> Result<Self> {
        if t > tree.horizon() {
            return Err(Error::Index(format!("time {t} beyond horizon {}", tree.horizon())));
        }
        if values.len() != tree.count_at(t) {
            return Err(Error::Dimension(format!("{} vectors for {} nodes at time {t}", values.len(), tree.count_at(t))));
        }
        if values.iter().any(|v| v.len() != tree.d()) {
            return Err(Error::Dimension(format!("vector length differs from d = {}", tree.d())));
        }
        Ok(NodeVector { t, values })
    }

    pub fn from_fn(tree: &ScenarioTree, t: usize, mut f: impl FnMut(NodeId) -> Vec<S>) -> Self {
        let values = tree.nodes_at(t).map(&mut f).collect();
        Self::new(tree, t, values).expect("generated node vector is well formed")
    }

    pub fn constant(tree: &ScenarioTree, t: usize, v: Vec<S>) -> Self {
        Self::from_fn(tree, t, |_| v.clone())
    }

    pub fn zeros(tree: &ScenarioTree, t: usize) -> Self {
        Self::constant(tree, t, vec![S::zero_value(); tree.d()])
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn backend(&self) -> Backend {
        S::BACKEND
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn at(&self, tree: &ScenarioTree, n: NodeId) -> &[S] {
        assert_eq!(tree.time(n), self.t, "node time differs from vector time");
        &self.values[tree.pos(n)]
    }

    /// The value seen at `n` for a vector adapted at an earlier time.
    pub fn at_ancestor(&self, tree: &ScenarioTree, n: NodeId) -> &[S] {
        self.at(tree, tree.ancestor_at(n, self.t))
    }

    /// Re-indexes an `F_t`-measurable vector as an `F_s`-measurable one.
    pub fn lift(&self, tree: &ScenarioTree, s: usize) -> Self {
        assert!(s >= self.t);
        Self::from_fn(tree, s, |n| self.at_ancestor(tree, n).to_vec())
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        NodeVector { t: self.t, values: self.values.iter().map(|v| v.iter().map(&f).collect()).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        if self.t != other.t || self.values.len() != other.values.len() {
            return Err(Error::Dimension("node vectors at different times".into()));
        }
        Ok(NodeVector {
            t: self.t,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect()).collect(),
        })
    }
}

impl NodeVector<Rat> {
    pub fn to_float(&self) -> NodeVector<f64> {
        NodeVector { t: self.t, values: self.values.iter().map(|v| v.iter().map(f64::from_rat).collect()).collect() }
    }

    pub fn to_json(&self, tree: &ScenarioTree) -> BTreeMap<String, Vec<String>> {
        tree.nodes_at(self.t)
            .map(|n| (tree.name(n).to_string(), self.at(tree, n).iter().map(fmt_rat).collect()))
            .collect()
    }

    pub fn from_json(tree: &ScenarioTree, t: usize, j: &BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut values = Vec::with_capacity(tree.count_at(t));
        for n in tree.nodes_at(t) {
            let v = j
                .get(tree.name(n))
                .ok_or_else(|| Error::Parse(format!("missing value for node {:?}", tree.name(n))))?;
            values.push(v.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?);
        }
        if j.len() != values.len() {
            return Err(Error::Parse(format!("node vector at time {t} names nodes from another time")));
        }
        Self::new(tree, t, values)
    }
}

/// A node vector of either backend, as read from or written to JSON.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyNodeVector {
    Exact(NodeVector<Rat>),
    Float(NodeVector<f64>),
}

impl AnyNodeVector {
    pub fn backend(&self) -> Backend {
        match self {
            AnyNodeVector::Exact(_) => Backend::Exact,
            AnyNodeVector::Float(_) => Backend::Float,
        }
    }

    /// Componentwise sum; combining different backends is rejected.
    pub fn add(&self, other: &AnyNodeVector) -> Result<AnyNodeVector> {
        match (self, other) {
            (AnyNodeVector::Exact(a), AnyNodeVector::Exact(b)) => Ok(AnyNodeVector::Exact(a.zip_with(b, |x, y| x + y)?)),
            (AnyNodeVector::Float(a), AnyNodeVector::Float(b)) => Ok(AnyNodeVector::Float(a.zip_with(b, |x, y| x + y)?)),
            _ => Err(Error::Backend(format!("cannot combine {:?} with {:?} node vectors", self.backend(), other.backend()))),
        }
    }
}

/// `d` probability measures given by transition probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorMeasure {
    /// `trans[i][n] = q_i(n | parent(n))`, one at the root.
    trans: Vec<Vec<Rat>>,
}

impl VectorMeasure {
    pub fn new(tree: &ScenarioTree, trans: Vec<Vec<Rat>>) -> Result<Self> {
        if trans.len() != tree.d() {
            return Err(Error::Dimension(format!("{} components for d = {}", trans.len(), tree.d())));
        }
        for (i, q) in trans.iter().enumerate() {
            if q.len() != tree.len() {
                return Err(Error::Dimension(format!("component {i} has {} entries for {} nodes", q.len(), tree.len())));
            }
            if q.iter().any(|x| x.is_negative()) {
                return Err(Error::Dual(format!("component {i} has a negative transition")));
            }
            if !q[tree.root()].is_one() {
                return Err(Error::Dual(format!("component {i} root entry must be 1")));
            }
            for n in 0..tree.len() {
                let ch = tree.children(n);
                if !ch.is_empty() {
                    let s: Rat = ch.iter().map(|&c| q[c].clone()).sum();
                    if !s.is_one() {
                        return Err(Error::Dual(format!("component {i} transitions out of {:?} sum to {}", tree.name(n), fmt_rat(&s))));
                    }
                }
            }
        }
        Ok(VectorMeasure { trans })
    }

    /// The reference measure in every component.
    pub fn reference(tree: &ScenarioTree) -> Self {
        let q: Vec<Rat> = (0..tree.len()).map(|n| tree.p(n).clone()).collect();
        VectorMeasure { trans: vec![q; tree.d()] }
    }

    pub fn components(&self) -> usize {
        self.trans.len()
    }

    pub fn transition(&self, i: usize, n: NodeId) -> &Rat {
        &self.trans[i][n]
    }

    pub fn transitions(&self) -> &[Vec<Rat>] {
        &self.trans
    }

    /// `Q_i(n)`, the probability of reaching `n` under component `i`.
    pub fn mass(&self, tree: &ScenarioTree, i: usize, mut n: NodeId) -> Rat {
        let mut q = Rat::one();
        while let Some(par) = tree.parent(n) {
            q *= &self.trans[i][n];
            n = par;
        }
        q
    }

    /// `dQ_i/dP` restricted to the partition at time `time(n)`, evaluated at `n`.
    pub fn density(&self, tree: &ScenarioTree, i: usize, n: NodeId) -> Rat {
        self.mass(tree, i, n) / tree.prob(n)
    }

    pub fn is_equivalent(&self) -> bool {
        self.trans.iter().all(|q| q.iter().all(|x| x.is_positive()))
    }

    /// Whether every component agrees with the reference on `F_t`.
    pub fn equals_reference_until(&self, tree: &ScenarioTree, t: usize) -> bool {
        (1..tree.len()).filter(|&n| tree.time(n) <= t).all(|n| self.trans.iter().all(|q| q[n] == *tree.p(n)))
    }

    pub fn to_json(&self, tree: &ScenarioTree) -> Vec<BTreeMap<String, String>> {
        self.trans
            .iter()
            .map(|q| (1..tree.len()).map(|n| (tree.name(n).to_string(), fmt_rat(&q[n]))).collect())
            .collect()
    }

    pub fn from_json(tree: &ScenarioTree, j: &[BTreeMap<String, String>]) -> Result<Self> {
        let mut trans = Vec::with_capacity(j.len());
        for comp in j {
            let mut q = vec![Rat::one(); tree.len()];
            for (name, v) in comp {
                let n = tree.node_by_name(name).ok_or_else(|| Error::Parse(format!("unknown node {name:?}")))?;
                if n == tree.root() {
                    return Err(Error::Parse("the root has no transition probability".into()));
                }
                q[n] = parse_rat(v)?;
            }
            for n in 1..tree.len() {
                if !comp.contains_key(tree.name(n)) {
                    q[n] = tree.p(n).clone();
                }
            }
            trans.push(q);
        }
        Self::new(tree, trans)
    }
}

/// `ξ_{t,s}(Q)` evaluated at a single node `n` at time `s`.
pub fn xi_at(tree: &ScenarioTree, q: &VectorMeasure, t: usize, n: NodeId) -> Vec<Rat> {
    let a = tree.ancestor_at(n, t);
    (0..tree.d())
        .map(|i| {
            let da = q.density(tree, i, a);
            if da.is_zero() {
                Rat::one()
            } else {
                q.density(tree, i, n) / da
            }
        })
        .collect()
}

/// `ξ_{t,s}(Q)` as a node vector at time `s`.
pub fn xi(tree: &ScenarioTree, q: &VectorMeasure, t: usize, s: usize) -> Result<NodeVector<Rat>> {
    tree.check_times(t, s)?;
    check_measure(tree, q)?;
    Ok(NodeVector::from_fn(tree, s, |n| xi_at(tree, q, t, n)))
}

fn check_measure(tree: &ScenarioTree, q: &VectorMeasure) -> Result<()> {
    if q.components() != tree.d() || q.trans.iter().any(|c| c.len() != tree.len()) {
        return Err(Error::Dimension("measure does not match the tree".into()));
    }
    Ok(())
}

/// `E^Q[X | F_t]`, componentwise, for `X` adapted at a later time.
pub fn cond_expect<S: Scalar>(tree: &ScenarioTree, q: &VectorMeasure, x: &NodeVector<S>, t: usize) -> Result<NodeVector<S>> {
    let s = x.time();
    tree.check_times(t, s)?;
    check_measure(tree, q)?;
    Ok(NodeVector::from_fn(tree, t, |a| {
        let mut acc = vec![S::zero_value(); tree.d()];
        for n in tree.descendants_at(a, s) {
            let w = tree.cond_prob(n, a);
            let xi = xi_at(tree, q, t, n);
            for (i, v) in x.at(tree, n).iter().enumerate() {
                let f = S::from_rat(&(&w * &xi[i]));
                acc[i] = acc[i].plus(&f.times(v));
            }
        }
        acc
    }))
}

/// `w_t^s(Q, w) = diag(w) ξ_{t,s}(Q)`.
pub fn w_ts(tree: &ScenarioTree, q: &VectorMeasure, w: &NodeVector<Rat>, s: usize) -> Result<NodeVector<Rat>> {
    let t = w.time();
    tree.check_times(t, s)?;
    check_measure(tree, q)?;
    Ok(NodeVector::from_fn(tree, s, |n| {
        let xi = xi_at(tree, q, t, n);
        w.at_ancestor(tree, n).iter().zip(&xi).map(|(a, b)| a * b).collect()
    }))
}

/// Result of a set-valued conditional expectation at one node.
#[derive(Clone, Debug, PartialEq)]
pub struct CondSet {
    pub set: UpperPolyhedron,
    /// A descendant with an empty set that forced the result to be empty
    /// while other descendants were nonempty.
    pub empty_from: Option<NodeId>,
}

/// `E^Q[A | F_t]` for a family of upper sets indexed by the nodes at time
/// `s`: at each time-`t` node the weighted Minkowski sum of
/// `P(c | n) diag(ξ_{t,s}(c)) A(c)` over its time-`s` descendants `c`.
pub fn cond_expect_set(tree: &ScenarioTree, q: &VectorMeasure, sets: &[UpperPolyhedron], s: usize, t: usize) -> Result<Vec<CondSet>> {
    tree.check_times(t, s)?;
    check_measure(tree, q)?;
    if sets.len() != tree.count_at(s) {
        return Err(Error::Dimension(format!("{} sets for {} nodes at time {s}", sets.len(), tree.count_at(s))));
    }
    let m = tree.m();
    if sets.iter().any(|a| a.m() != m || a.d() != tree.d()) {
        return Err(Error::Dimension("set dimensions differ from the tree".into()));
    }
    let out = tree
        .nodes_at(t)
        .map(|a| {
            let desc = tree.descendants_at(a, s);
            let empties: Vec<NodeId> = desc.clone().filter(|&c| sets[tree.pos(c)].is_empty()).collect();
            if !empties.is_empty() {
                let mixed = empties.len() < desc.len();
                return CondSet { set: UpperPolyhedron::empty(tree.d(), m), empty_from: mixed.then_some(empties[0]) };
            }
            let parts: Vec<(Vec<Rat>, &Polyhedron)> = desc
                .map(|c| {
                    let w = tree.cond_prob(c, a);
                    let xi = xi_at(tree, q, t, c);
                    (xi[..m].iter().map(|x| x * &w).collect(), sets[tree.pos(c)].poly())
                })
                .collect();
            let sum = Polyhedron::minkowski_sum_scaled(m, parts.iter().map(|(k, p)| (k.as_slice(), *p)));
            CondSet { set: UpperPolyhedron::from_poly_unchecked(tree.d(), sum), empty_from: None }
        })
        .collect();
    Ok(out)
}
