//! Set-valued conditional risk measures built from acceptance sets, with the
//! average value at risk, entropic and superhedging families.

pub mod acceptance;
pub mod avar;
pub mod entropic;
pub mod shp;

use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{fmt_rat, ExtRat, Rat};
use crate::polycalc::{PolyJson, Polyhedron, Row, UpperPolyhedron, VRep};
use crate::scenario::{NodeId, NodeVector, ScenarioTree};

pub use acceptance::{risk_from_acceptance, AcceptanceFamily};

#[derive(Clone, Debug)]
pub enum RiskModel {
    /// `levels[t][i]` is the level of component `i` on the step `t → t+1`.
    /// The non-composed variant applies `levels[t]` to the whole subtree.
    Avar { levels: Vec<Vec<Rat>>, composed: bool },
    Entropic { rates: Vec<f64> },
    /// Solvency set `K_t(n)` of every node, indexed by node id.
    Shp { market: Vec<Polyhedron> },
    /// One-step acceptance set of every internal node on the eligible values
    /// of its children (`ℝ^{m·k}`, child-major).
    Custom { one_step: Vec<Option<Polyhedron>> },
}

impl RiskModel {
    pub fn name(&self) -> &'static str {
        match self {
            RiskModel::Avar { composed: true, .. } => "avar-composed",
            RiskModel::Avar { composed: false, .. } => "avar",
            RiskModel::Entropic { .. } => "entropic",
            RiskModel::Shp { .. } => "shp",
            RiskModel::Custom { .. } => "custom",
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        !matches!(self, RiskModel::Entropic { .. })
    }

    /// Whether every acceptance set is a cone.
    pub fn is_coherent(&self) -> bool {
        match self {
            RiskModel::Avar { .. } => true,
            RiskModel::Entropic { .. } => false,
            RiskModel::Shp { market } => market.iter().all(|k| k.is_cone()),
            RiskModel::Custom { one_step } => one_step.iter().flatten().all(|a| a.is_cone()),
        }
    }

    pub fn is_composed(&self) -> bool {
        !matches!(self, RiskModel::Avar { composed: false, .. })
    }

    pub fn validate(&self, tree: &ScenarioTree) -> Result<()> {
        let (d, m) = (tree.d(), tree.m());
        match self {
            RiskModel::Avar { levels, .. } => {
                if levels.len() != tree.horizon() || levels.iter().any(|l| l.len() != d) {
                    return Err(Error::Dimension(format!("AV@R needs {} rows of {d} levels", tree.horizon())));
                }
                levels.iter().flatten().try_for_each(avar::check_level)
            }
            RiskModel::Entropic { rates } => entropic::check_rates(tree, rates),
            RiskModel::Shp { market } => shp::validate_market(tree, market),
            RiskModel::Custom { one_step } => {
                if one_step.len() != tree.len() {
                    return Err(Error::Dimension("one entry per node expected".into()));
                }
                for (n, a) in one_step.iter().enumerate() {
                    let k = tree.children(n).len();
                    match a {
                        None if k == 0 => {}
                        None => return Err(Error::Model(format!("missing one-step set at {}", tree.name(n)))),
                        Some(a) if a.dim() != m * k => {
                            return Err(Error::Dimension(format!("one-step set at {} has dimension {}", tree.name(n), a.dim())))
                        }
                        Some(a) => {
                            if !a.contains_point(&vec![Rat::zero(); m * k]) {
                                return Err(Error::Model(format!("one-step set at {} does not accept zero", tree.name(n))));
                            }
                            let rc = a.recession_cone();
                            for j in 0..m * k {
                                let mut e = vec![Rat::zero(); m * k];
                                e[j] = Rat::one();
                                if !rc.contains_point(&e) {
                                    return Err(Error::Model(format!("one-step set at {} is not upper", tree.name(n))));
                                }
                            }
                            // normalized: the accepted constants are exactly R^m_+
                            let e: Vec<Vec<Rat>> = (0..m * k)
                                .map(|j| (0..m).map(|i| if j % m == i { Rat::one() } else { Rat::zero() }).collect())
                                .collect();
                            let constants = a.preimage(&e, m, &vec![Rat::zero(); m * k]);
                            if !constants.set_eq(&orthant_leaf(m)) {
                                return Err(Error::Model(format!("one-step set at {} is not normalized", tree.name(n))));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// The value of a set process at one node.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeSet {
    Poly(UpperPolyhedron),
    /// `r + ℝ^d_+` in floating point.
    FloatCorner(Vec<f64>),
}

impl NodeSet {
    pub fn as_poly(&self) -> Option<&UpperPolyhedron> {
        match self {
            NodeSet::Poly(p) => Some(p),
            NodeSet::FloatCorner(_) => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            NodeSet::Poly(p) => p.is_empty(),
            NodeSet::FloatCorner(_) => false,
        }
    }
}

/// One set per node at every time, `slices[t][pos]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetProcess {
    pub slices: Vec<Vec<NodeSet>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSetJson {
    pub node: String,
    pub t: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub float_corner: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<PolyJson>,
}

impl SetProcess {
    pub fn at(&self, tree: &ScenarioTree, n: NodeId) -> &NodeSet {
        &self.slices[tree.time(n)][tree.pos(n)]
    }

    /// Per-node dump; polyhedra that are translated orthants also carry
    /// their corner.
    pub fn to_json(&self, tree: &ScenarioTree) -> Vec<NodeSetJson> {
        let mut out = Vec::new();
        for (t, slice) in self.slices.iter().enumerate() {
            for (n, set) in tree.nodes_at(t).zip(slice) {
                let mut j = NodeSetJson { node: tree.name(n).to_string(), t, corner: None, float_corner: None, set: None };
                match set {
                    NodeSet::Poly(p) => {
                        j.corner = p.as_corner().map(|c| c.iter().map(fmt_rat).collect());
                        j.set = Some(p.to_json());
                    }
                    NodeSet::FloatCorner(c) => j.float_corner = Some(c.clone()),
                }
                out.push(j);
            }
        }
        out
    }
}

/// A risk model on a tree with lazily built acceptance sets.
#[derive(Debug)]
pub struct RiskEngine {
    tree: ScenarioTree,
    model: RiskModel,
    family: OnceLock<AcceptanceFamily>,
}

impl RiskEngine {
    pub fn new(tree: ScenarioTree, model: RiskModel) -> Result<Self> {
        model.validate(&tree)?;
        Ok(RiskEngine { tree, model, family: OnceLock::new() })
    }

    pub fn tree(&self) -> &ScenarioTree {
        &self.tree
    }

    pub fn model(&self) -> &RiskModel {
        &self.model
    }

    fn polyhedral(&self) -> Result<()> {
        if self.model.is_polyhedral() {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("{} has no polyhedral acceptance sets", self.model.name())))
        }
    }

    /// Acceptance sets `A_t(n)` for every node.
    pub fn family(&self) -> Result<&AcceptanceFamily> {
        if let Some(f) = self.family.get() {
            return Ok(f);
        }
        self.polyhedral()?;
        let f = build_family(&self.tree, &self.model)?;
        Ok(self.family.get_or_init(|| f))
    }

    pub fn acceptance(&self, n: NodeId) -> Result<&Polyhedron> {
        Ok(self.family()?.at(n))
    }

    /// `A_{t,s}(n)` on the eligible values of the time-`s` descendants of `n`.
    pub fn stepped_acceptance(&self, n: NodeId, s: usize) -> Result<Polyhedron> {
        self.tree.check_times(self.tree.time(n), s)?;
        Ok(acceptance::stepped(&self.tree, self.acceptance(n)?, n, s))
    }

    /// `R_t(X)(n)` through the acceptance set of `n`.
    pub fn risk_at(&self, x: &NodeVector<Rat>, n: NodeId) -> Result<UpperPolyhedron> {
        self.tree.check_times(self.tree.time(n), x.time())?;
        Ok(risk_from_acceptance(&self.tree, self.acceptance(n)?, x, n))
    }

    /// Corners of `R_t(X)` when the family is a box family with every asset
    /// eligible.
    pub fn corners(&self, x: &NodeVector<Rat>, t: usize) -> Result<Option<NodeVector<Rat>>> {
        let tree = &self.tree;
        tree.check_times(t, x.time())?;
        if tree.m() != tree.d() {
            return Ok(None);
        }
        match &self.model {
            RiskModel::Avar { levels, composed: true } => {
                let xt = x.lift(tree, tree.horizon());
                Ok(Some(avar::compose_avar(tree, &xt, levels)?.swap_remove(t)))
            }
            RiskModel::Avar { levels, composed: false } => {
                if t == tree.horizon() {
                    Ok(Some(x.lift(tree, t).map(|v| -v.clone())))
                } else {
                    Ok(Some(avar::risk_avar(tree, x, &levels[t], t)?))
                }
            }
            _ => Ok(None),
        }
    }

    /// `R_t(X)` at every time-`t` node. Box families with every asset
    /// eligible use their corners; the rest go through acceptance sets.
    pub fn risk(&self, x: &NodeVector<Rat>, t: usize) -> Result<Vec<NodeSet>> {
        let tree = &self.tree;
        tree.check_times(t, x.time())?;
        if let RiskModel::Entropic { rates } = &self.model {
            let xt = x.to_float().lift(tree, tree.horizon());
            let r = entropic::compose_entropic(tree, &xt, rates)?;
            return Ok(r[t].values().iter().map(|c| NodeSet::FloatCorner(c.clone())).collect());
        }
        if let Some(c) = self.corners(x, t)? {
            return Ok(c.values().iter().map(|v| NodeSet::Poly(UpperPolyhedron::corner(tree.d(), v.clone()))).collect());
        }
        tree.nodes_at(t).map(|n| self.risk_at(x, n).map(NodeSet::Poly)).collect()
    }

    pub fn risk_process(&self, x: &NodeVector<Rat>) -> Result<SetProcess> {
        let slices = (0..=x.time()).map(|t| self.risk(x, t)).collect::<Result<_>>()?;
        Ok(SetProcess { slices })
    }

    /// `inf_{u ∈ R_t(X)(n)} w·u` for `w` on the eligible coordinates.
    pub fn support_at(&self, x: &NodeVector<Rat>, n: NodeId, w: &[Rat]) -> Result<ExtRat> {
        let m = self.tree.m();
        if let Some(c) = self.corners(x, self.tree.time(n))? {
            if w[..m].iter().any(|v| *v < Rat::zero()) {
                return Ok(ExtRat::NegInf);
            }
            let r = c.at(&self.tree, n);
            return Ok(ExtRat::Finite(w[..m].iter().zip(r).map(|(a, b)| a * b).sum()));
        }
        Ok(self.risk_at(x, n)?.support_value(&w[..m]))
    }
}

fn orthant_leaf(d: usize) -> Polyhedron {
    Polyhedron::orthant_at(vec![Rat::zero(); d])
}

/// Generators of `(A ∩ M_{t+1})` for a one-step set on the eligible child
/// values, replicated over the leaves of `n`.
fn one_step_inc(tree: &ScenarioTree, n: NodeId, a: &Polyhedron) -> VRep {
    let e = acceptance::replication(tree, n, tree.time(n) + 1, tree.m());
    acceptance::map_vrep(a.vrep(), &e)
}

/// One-step AV@R acceptance on the eligible values of the children of `n`.
pub fn avar_one_step(tree: &ScenarioTree, n: NodeId, levels: &[Rat]) -> Polyhedron {
    let m = tree.m();
    let probs: Vec<Rat> = tree.children(n).iter().map(|&c| tree.p(c).clone()).collect();
    let rows = avar::acceptance_rows(&probs, m, &levels[..m]);
    Polyhedron::from_hrep(m * probs.len(), rows)
}

/// Non-composed AV@R acceptance on the whole leaf space of `n`.
pub fn avar_vanilla(tree: &ScenarioTree, n: NodeId, levels: &[Vec<Rat>]) -> Polyhedron {
    let d = tree.d();
    let t = tree.time(n);
    if t == tree.horizon() {
        return orthant_leaf(d);
    }
    let probs: Vec<Rat> = tree.leaves(n).map(|l| tree.cond_prob(l, n)).collect();
    let rows: Vec<Row> = avar::acceptance_rows(&probs, d, &levels[t]);
    Polyhedron::from_hrep(d * probs.len(), rows)
}

fn build_family(tree: &ScenarioTree, model: &RiskModel) -> Result<AcceptanceFamily> {
    let d = tree.d();
    match model {
        RiskModel::Avar { levels, composed: false } => AcceptanceFamily::direct(tree, |n| Ok(avar_vanilla(tree, n, levels))),
        RiskModel::Avar { levels, composed: true } => AcceptanceFamily::compose(
            tree,
            |n| Ok(one_step_inc(tree, n, &avar_one_step(tree, n, &levels[tree.time(n)]))),
            |_| orthant_leaf(d),
        ),
        RiskModel::Custom { one_step } => AcceptanceFamily::compose(
            tree,
            |n| Ok(one_step_inc(tree, n, one_step[n].as_ref().expect("validated"))),
            |_| orthant_leaf(d),
        ),
        RiskModel::Shp { market } => AcceptanceFamily::compose(
            tree,
            |n| {
                let e = acceptance::replication(tree, n, tree.time(n), d);
                Ok(acceptance::map_vrep(market[n].vrep(), &e))
            },
            |l| market[l].clone(),
        ),
        RiskModel::Entropic { .. } => Err(Error::Unsupported("entropic acceptance sets are not polyhedral".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::polycalc::ivec;
    use crate::scenario::cond_expect;
    use crate::scenario::VectorMeasure;

    fn ones(tree: &ScenarioTree, lam: Rat) -> Vec<Vec<Rat>> {
        vec![vec![lam; tree.d()]; tree.horizon()]
    }

    #[test]
    fn level_one_is_conditional_expectation() {
        let tree = ScenarioTree::uniform(&[2, 3], 2, 2).unwrap();
        let x = NodeVector::from_fn(&tree, 2, |n| ivec(&[n as i64 % 3 - 1, 4 - n as i64 % 5]));
        let model = RiskModel::Avar { levels: ones(&tree, int(1)), composed: true };
        let eng = RiskEngine::new(tree.clone(), model).unwrap();
        let p = VectorMeasure::reference(&tree);
        for t in 0..=2 {
            let e = cond_expect(&tree, &p, &x, t).unwrap();
            for n in tree.nodes_at(t) {
                let want: Vec<Rat> = e.at(&tree, n).iter().map(|v| -v.clone()).collect();
                assert_eq!(eng.risk_at(&x, n).unwrap().as_corner(), Some(want));
            }
        }
    }

    #[test]
    fn box_path_agrees_with_acceptance_route() {
        let tree = ScenarioTree::uniform(&[2, 2], 2, 2).unwrap();
        let x = NodeVector::from_fn(&tree, 2, |n| ivec(&[(n as i64 * 7) % 5 - 2, (n as i64 * 3) % 4 - 1]));
        let levels = vec![vec![rat(1, 2), rat(2, 3)], vec![rat(1, 3), int(1)]];
        for composed in [true, false] {
            let eng = RiskEngine::new(tree.clone(), RiskModel::Avar { levels: levels.clone(), composed }).unwrap();
            for t in 0..=2 {
                let c = eng.corners(&x, t).unwrap().unwrap();
                for n in tree.nodes_at(t) {
                    assert_eq!(eng.risk_at(&x, n).unwrap().as_corner(), Some(c.at(&tree, n).to_vec()), "t={t} composed={composed}");
                }
            }
        }
    }

    #[test]
    fn custom_passthrough() {
        let tree = ScenarioTree::uniform(&[2], 1, 1).unwrap();
        let a = Polyhedron::from_hrep(2, vec![Row::new(ivec(&[1, 1]), int(0)), Row::new(ivec(&[1, 0]), int(-1)), Row::new(ivec(&[0, 1]), int(-1))]);
        let model = RiskModel::Custom { one_step: vec![Some(a.clone()), None, None] };
        let eng = RiskEngine::new(tree, model).unwrap();
        assert_eq!(eng.stepped_acceptance(0, 1).unwrap(), a);
    }

    #[test]
    fn invalid_levels_rejected() {
        let tree = ScenarioTree::uniform(&[2], 1, 1).unwrap();
        assert!(RiskEngine::new(tree.clone(), RiskModel::Avar { levels: vec![vec![int(2)]], composed: true }).is_err());
        assert!(RiskEngine::new(tree, RiskModel::Entropic { rates: vec![-1.0] }).is_err());
    }
}
