//! Instance files: a tree, named portfolios, a risk model, dual pairs and a
//! list of checks, all in JSON with rationals written as `"p/q"` strings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::duals::{in_wt, sample_dual_pairs, sample_price_systems, DualPair, DualPairJson, SamplerConfig};
use crate::error::{Error, Result};
use crate::num::{parse_rat, Rat};
use crate::polycalc::{Polyhedron, Row};
use crate::riskmeasures::shp::bid_ask_cone;
use crate::riskmeasures::{RiskEngine, RiskModel};
use crate::scenario::{NodeVector, ScenarioTree, TreeJson};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeSpec {
    Explicit(TreeJson),
    /// Equal branching at every time, equal probabilities; nodes are named
    /// `r`, `r0`, `r01`, …
    Uniform { branching: Vec<usize>, d: usize, m: usize },
}

/// A polyhedron given by inequalities `a·x ≥ b` (rows `[a…, b]`), by
/// generators, or as a two-asset bid-ask cone.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolySpec {
    BidAsk { bid_ask: [String; 2] },
    HRep {
        ineqs: Vec<Vec<String>>,
        #[serde(default)]
        eqs: Vec<Vec<String>>,
    },
    VRep {
        vertices: Vec<Vec<String>>,
        #[serde(default)]
        rays: Vec<Vec<String>>,
        #[serde(default)]
        lines: Vec<Vec<String>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeSets {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<PolySpec>,
    #[serde(default)]
    pub nodes: BTreeMap<String, PolySpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ModelSpec {
    Avar {
        /// One row of levels per step `t → t+1`, or a single row used at
        /// every step.
        levels: Vec<Vec<String>>,
        #[serde(default = "yes")]
        composed: bool,
    },
    Entropic { rates: Vec<f64> },
    Shp { market: NodeSets },
    Custom { one_step: NodeSets },
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SamplerSpec {
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, flatten)]
    pub config: Option<SamplerConfig>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DualSpec {
    #[serde(default)]
    pub pairs: Vec<DualPairJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    /// Direction `w_0` for worst-case pairs and scalarizations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default)]
    pub name: String,
    pub tree: TreeSpec,
    /// Named positions; every node of one portfolio must sit at the same time.
    pub portfolios: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub model: ModelSpec,
    #[serde(default)]
    pub duals: DualSpec,
    #[serde(default)]
    pub checks: Vec<CheckSpec>,
}

/// A loaded and cross-checked instance.
#[derive(Debug)]
pub struct Instance {
    pub name: String,
    pub engine: RiskEngine,
    pub portfolios: Vec<(String, NodeVector<Rat>)>,
    pub pairs: Vec<DualPair>,
    pub sampler: Option<SamplerSpec>,
    pub checks: Vec<CheckSpec>,
}

fn rats(v: &[String]) -> Result<Vec<Rat>> {
    v.iter().map(|s| parse_rat(s)).collect()
}

fn rows(dim: usize, v: &[Vec<String>]) -> Result<Vec<Row>> {
    v.iter()
        .map(|r| {
            if r.len() != dim + 1 {
                return Err(Error::Dimension(format!("row of length {} in dimension {dim}", r.len())));
            }
            let mut a = rats(r)?;
            let b = a.pop().unwrap();
            Ok(Row::new(a, b))
        })
        .collect()
}

impl PolySpec {
    pub fn build(&self, dim: usize) -> Result<Polyhedron> {
        let gens = |v: &[Vec<String>]| -> Result<Vec<Vec<Rat>>> {
            v.iter()
                .map(|g| {
                    if g.len() != dim {
                        return Err(Error::Dimension(format!("generator of length {} in dimension {dim}", g.len())));
                    }
                    rats(g)
                })
                .collect()
        };
        match self {
            PolySpec::BidAsk { bid_ask } => {
                if dim != 2 {
                    return Err(Error::Dimension("bid-ask cones need two assets".into()));
                }
                Ok(bid_ask_cone(&parse_rat(&bid_ask[0])?, &parse_rat(&bid_ask[1])?))
            }
            PolySpec::HRep { ineqs, eqs } => Ok(Polyhedron::from_hrep_eq(dim, rows(dim, ineqs)?, rows(dim, eqs)?)),
            PolySpec::VRep { vertices, rays, lines } => Ok(Polyhedron::from_vrep(dim, gens(vertices)?, gens(rays)?, gens(lines)?)),
        }
    }
}

impl NodeSets {
    fn resolve(&self, tree: &ScenarioTree, dim: impl Fn(usize) -> usize, skip_leaves: bool) -> Result<Vec<Option<Polyhedron>>> {
        for name in self.nodes.keys() {
            if tree.node_by_name(name).is_none() {
                return Err(Error::Parse(format!("unknown node {name:?}")));
            }
        }
        (0..tree.len())
            .map(|n| {
                if skip_leaves && tree.children(n).is_empty() {
                    return Ok(None);
                }
                match self.nodes.get(tree.name(n)).or(self.default.as_ref()) {
                    Some(p) => p.build(dim(n)).map(Some),
                    None => Err(Error::Parse(format!("no set given for node {:?}", tree.name(n)))),
                }
            })
            .collect()
    }
}

impl ModelSpec {
    pub fn build(&self, tree: &ScenarioTree) -> Result<RiskModel> {
        Ok(match self {
            ModelSpec::Avar { levels, composed } => {
                let mut l: Vec<Vec<Rat>> = levels.iter().map(|r| rats(r)).collect::<Result<_>>()?;
                if l.len() == 1 && tree.horizon() > 1 {
                    l = vec![l[0].clone(); tree.horizon()];
                }
                RiskModel::Avar { levels: l, composed: *composed }
            }
            ModelSpec::Entropic { rates } => RiskModel::Entropic { rates: rates.clone() },
            ModelSpec::Shp { market } => {
                let sets = market.resolve(tree, |_| tree.d(), false)?;
                RiskModel::Shp { market: sets.into_iter().map(Option::unwrap).collect() }
            }
            ModelSpec::Custom { one_step } => {
                let m = tree.m();
                RiskModel::Custom { one_step: one_step.resolve(tree, |n| m * tree.children(n).len(), true)? }
            }
        })
    }
}

impl InstanceFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(&self) -> Result<Instance> {
        let tree = match &self.tree {
            TreeSpec::Explicit(j) => ScenarioTree::from_json(j)?,
            TreeSpec::Uniform { branching, d, m } => ScenarioTree::uniform(branching, *d, *m)?,
        };
        let model = self.model.build(&tree)?;
        let mut portfolios = Vec::new();
        for (name, values) in &self.portfolios {
            let first = values.keys().next().ok_or_else(|| Error::Parse(format!("portfolio {name:?} is empty")))?;
            let n = tree.node_by_name(first).ok_or_else(|| Error::Parse(format!("unknown node {first:?} in portfolio {name:?}")))?;
            portfolios.push((name.clone(), NodeVector::from_json(&tree, tree.time(n), values)?));
        }
        let mut pairs = Vec::new();
        for (k, j) in self.duals.pairs.iter().enumerate() {
            let pair = DualPair::from_json(&tree, j)?;
            let mem = in_wt(&tree, &pair);
            if !mem.member {
                return Err(Error::Dual(format!("pair {k}: {}", mem.failed.unwrap_or_default())));
            }
            pairs.push(pair);
        }
        for c in &self.checks {
            if let Some(d) = &c.direction {
                if d.len() != tree.d() {
                    return Err(Error::Dimension(format!("check {:?}: direction of length {}", c.name, d.len())));
                }
                rats(d)?;
            }
            let h = tree.horizon();
            if c.t.is_some_and(|t| t > h) || c.s.is_some_and(|s| s > h) {
                return Err(Error::Index(format!("check {:?}: time beyond horizon {h}", c.name)));
            }
        }
        Ok(Instance {
            name: self.name.clone(),
            engine: RiskEngine::new(tree, model)?,
            portfolios,
            pairs,
            sampler: self.duals.sampler.clone(),
            checks: self.checks.clone(),
        })
    }
}

impl Instance {
    pub fn from_path(path: &Path) -> Result<Self> {
        InstanceFile::read(path)?.load()
    }

    pub fn tree(&self) -> &ScenarioTree {
        self.engine.tree()
    }

    pub fn portfolio(&self, name: &str) -> Result<&NodeVector<Rat>> {
        self.portfolios
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, x)| x)
            .ok_or_else(|| Error::Parse(format!("no portfolio named {name:?}")))
    }

    /// The explicit pairs at time `t` followed by `count` sampled ones
    /// (the sampler's count when `count` is `None`). Superhedging models
    /// sample consistent price systems.
    pub fn pairs_at(&self, t: usize, count: Option<usize>, seed: Option<u64>) -> Vec<DualPair> {
        let mut out: Vec<DualPair> = self.pairs.iter().filter(|p| p.t == t).cloned().collect();
        let spec = self.sampler.clone().unwrap_or_default();
        let count = count.unwrap_or(spec.count);
        if count > 0 {
            let seed = seed.unwrap_or(spec.seed);
            match self.engine.model() {
                RiskModel::Shp { market } => out.extend(sample_price_systems(self.tree(), market, t, count, seed)),
                _ => out.extend(sample_dual_pairs(self.tree(), t, count, seed, &spec.config.unwrap_or_default())),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_uniform_avar() {
        let text = r#"{
            "tree": {"branching": [2], "d": 1, "m": 1},
            "portfolios": {"X": {"r0": ["1"], "r1": ["-1"]}},
            "model": {"type": "avar", "levels": [["1/2"]]},
            "duals": {"sampler": {"count": 3, "seed": 5}}
        }"#;
        let inst = InstanceFile::parse(text).unwrap().load().unwrap();
        assert_eq!(inst.portfolio("X").unwrap().time(), 1);
        assert_eq!(inst.pairs_at(0, None, None).len(), 3);
        assert!(inst.engine.model().is_composed());
    }

    #[test]
    fn rejects_unknown_node() {
        let text = r#"{
            "tree": {"branching": [2], "d": 1, "m": 1},
            "portfolios": {"X": {"zz": ["1"]}},
            "model": {"type": "entropic", "rates": [1.0]}
        }"#;
        assert!(matches!(InstanceFile::parse(text).unwrap().load(), Err(Error::Parse(_))));
    }
}
