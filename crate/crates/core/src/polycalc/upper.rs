use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::polyhedron::{Polyhedron, Row, Violation};
use crate::error::{Error, Result};
use crate::num::{dot, serde_rat_mat, ExtRat, Rat};

/// A closed convex upper set inside the eligible subspace `ℝ^m × {0}^{d−m}`.
///
/// The set is stored as a polyhedron over the eligible coordinates only; the
/// remaining `d − m` coordinates are identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperPolyhedron {
    d: usize,
    poly: Polyhedron,
}

impl UpperPolyhedron {
    pub fn new(d: usize, poly: Polyhedron) -> Result<Self> {
        let m = poly.dim();
        if m == 0 || m > d {
            return Err(Error::Dimension(format!("eligible dimension {m} with d = {d}")));
        }
        let u = UpperPolyhedron { d, poly };
        if !u.is_empty() {
            let rc = u.poly.recession_cone();
            for i in 0..m {
                let mut e = vec![Rat::zero(); m];
                e[i] = Rat::one();
                if !rc.contains_point(&e) {
                    return Err(Error::Dimension(format!("set is not upper along coordinate {i}")));
                }
            }
        }
        Ok(u)
    }

    /// `c + ℝ^m_+`.
    pub fn corner(d: usize, c: Vec<Rat>) -> Self {
        UpperPolyhedron { d, poly: Polyhedron::orthant_at(c) }
    }

    pub fn empty(d: usize, m: usize) -> Self {
        UpperPolyhedron { d, poly: Polyhedron::empty(m) }
    }

    pub fn whole(d: usize, m: usize) -> Self {
        UpperPolyhedron { d, poly: Polyhedron::whole(m) }
    }

    pub(crate) fn from_poly_unchecked(d: usize, poly: Polyhedron) -> Self {
        UpperPolyhedron { d, poly }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.poly.dim()
    }

    pub fn poly(&self) -> &Polyhedron {
        &self.poly
    }

    pub fn is_empty(&self) -> bool {
        self.poly.is_empty()
    }

    fn eligible<'a>(&self, w: &'a [Rat]) -> &'a [Rat] {
        assert_eq!(w.len(), self.d, "vector dimension");
        &w[..self.m()]
    }

    pub fn support_value(&self, w: &[Rat]) -> ExtRat {
        self.poly.support_value(self.eligible(w))
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        assert_eq!(x.len(), self.d);
        x[self.m()..].iter().all(|v| v.is_zero()) && self.poly.contains_point(&x[..self.m()])
    }

    pub fn contains(&self, other: &UpperPolyhedron) -> std::result::Result<(), Violation> {
        self.poly.contains(&other.poly)
    }

    pub fn minkowski_sum(&self, other: &UpperPolyhedron) -> UpperPolyhedron {
        UpperPolyhedron { d: self.d, poly: self.poly.minkowski_sum(&other.poly) }
    }

    pub fn intersect(&self, other: &UpperPolyhedron) -> UpperPolyhedron {
        UpperPolyhedron { d: self.d, poly: self.poly.intersect(&other.poly) }
    }

    pub fn translate(&self, t: &[Rat]) -> UpperPolyhedron {
        UpperPolyhedron { d: self.d, poly: self.poly.translate(self.eligible(t)) }
    }

    pub fn recession_cone(&self) -> UpperPolyhedron {
        UpperPolyhedron { d: self.d, poly: self.poly.recession_cone() }
    }

    /// The lower corner when the set is `c + ℝ^m_+`.
    pub fn as_corner(&self) -> Option<Vec<Rat>> {
        let v = self.poly.vrep();
        if v.vertices.len() == 1 && v.lines.is_empty() && v.rays.len() == self.m() {
            let mut c = v.vertices[0].clone();
            c.resize(self.d, Rat::zero());
            let is_orthant = v.rays.iter().all(|r| r.iter().filter(|x| !x.is_zero()).count() == 1);
            is_orthant.then_some(c)
        } else {
            None
        }
    }

    fn lift(&self, x: &[Rat]) -> Vec<Rat> {
        let mut v = x.to_vec();
        v.resize(self.d, Rat::zero());
        v
    }

    pub fn to_json(&self) -> PolyJson {
        let h = self.poly.hrep();
        let v = self.poly.vrep();
        let mut ineqs: Vec<Vec<Rat>> = Vec::new();
        for r in &h.ineqs {
            let mut row = self.lift(&r.a);
            row.push(r.b.clone());
            ineqs.push(row);
        }
        let mut rays: Vec<Vec<Rat>> = v.rays.iter().map(|r| self.lift(r)).collect();
        for l in &v.lines {
            rays.push(self.lift(l));
            rays.push(self.lift(&l.iter().map(|x| -x).collect::<Vec<_>>()));
        }
        PolyJson {
            ineqs,
            vertices: v.vertices.iter().map(|x| self.lift(x)).collect(),
            rays,
            mask: self.m(),
            empty: h.empty,
        }
    }

    pub fn from_json(d: usize, j: &PolyJson) -> Result<Self> {
        let m = j.mask;
        if m == 0 || m > d {
            return Err(Error::Parse(format!("mask {m} out of range for d = {d}")));
        }
        if j.empty {
            return Ok(Self::empty(d, m));
        }
        let check = |v: &Vec<Rat>, len: usize| -> Result<()> {
            if v.len() != len {
                return Err(Error::Parse(format!("expected {len} entries, got {}", v.len())));
            }
            if v[m..d].iter().any(|x| !x.is_zero()) {
                return Err(Error::Parse("nonzero entry on a non-eligible coordinate".into()));
            }
            Ok(())
        };
        let poly = if !j.vertices.is_empty() {
            for v in j.vertices.iter().chain(&j.rays) {
                check(v, d)?;
            }
            Polyhedron::from_vrep(
                m,
                j.vertices.iter().map(|v| v[..m].to_vec()).collect(),
                j.rays.iter().map(|v| v[..m].to_vec()).collect(),
                vec![],
            )
        } else {
            let mut rows = Vec::new();
            for r in &j.ineqs {
                check(r, d + 1)?;
                rows.push(Row::new(r[..m].to_vec(), r[d].clone()));
            }
            Polyhedron::from_hrep(m, rows)
        };
        Self::new(d, poly)
    }
}

/// Canonical JSON form of an upper polyhedron in ℝ^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    #[serde(with = "serde_rat_mat")]
    pub ineqs: Vec<Vec<Rat>>,
    #[serde(with = "serde_rat_mat")]
    pub vertices: Vec<Vec<Rat>>,
    #[serde(with = "serde_rat_mat")]
    pub rays: Vec<Vec<Rat>>,
    pub mask: usize,
    pub empty: bool,
}

/// `{u ∈ M : w·u ≥ b}` with `b = +∞` meaning `∅` and `b = −∞` meaning `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfspaceSet {
    w: Vec<Rat>,
    b: ExtRat,
    m: usize,
}

impl HalfspaceSet {
    pub fn new(w: Vec<Rat>, b: ExtRat, m: usize) -> Result<Self> {
        if m == 0 || m > w.len() {
            return Err(Error::Dimension(format!("mask {m} for direction of length {}", w.len())));
        }
        if b != ExtRat::NegInf && w[..m].iter().all(|x| x.is_zero()) {
            return Err(Error::Dimension("halfspace direction vanishes on the eligible subspace".into()));
        }
        Ok(HalfspaceSet { w, b, m })
    }

    /// The whole eligible subspace `M`.
    pub fn subspace(d: usize, m: usize) -> Self {
        HalfspaceSet { w: vec![Rat::zero(); d], b: ExtRat::NegInf, m }
    }

    pub fn w(&self) -> &[Rat] {
        &self.w
    }

    pub fn threshold(&self) -> &ExtRat {
        &self.b
    }

    pub fn contains_point(&self, u: &[Rat]) -> bool {
        if u[self.m..].iter().any(|x| !x.is_zero()) {
            return false;
        }
        match &self.b {
            ExtRat::NegInf => true,
            ExtRat::PosInf => false,
            ExtRat::Finite(b) => dot(&self.w, u) >= *b,
        }
    }

    pub fn to_upper(&self) -> UpperPolyhedron {
        let d = self.w.len();
        UpperPolyhedron { d, poly: Polyhedron::halfspace(self.w[..self.m].to_vec(), &self.b) }
    }
}
