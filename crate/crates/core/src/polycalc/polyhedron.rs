use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::dd::{cone_generators, IVec};
use crate::linalg::{canonical_basis, reduce};
use crate::num::{dot, primitive, serde_rat, serde_rat_vec, ExtRat, Rat};

/// The inequality `a·x ≥ b`, or the equation `a·x = b` when stored among
/// equalities.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Row {
    #[serde(with = "serde_rat_vec")]
    pub a: Vec<Rat>,
    #[serde(with = "serde_rat")]
    pub b: Rat,
}

impl Row {
    pub fn new(a: Vec<Rat>, b: Rat) -> Self {
        Row { a, b }
    }

    pub fn slack(&self, x: &[Rat]) -> Rat {
        dot(&self.a, x) - &self.b
    }

    pub fn is_trivial(&self) -> bool {
        self.a.iter().all(|x| x.is_zero())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HRep {
    pub eqs: Vec<Row>,
    pub ineqs: Vec<Row>,
    pub empty: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VRep {
    pub vertices: Vec<Vec<Rat>>,
    pub rays: Vec<Vec<Rat>>,
    pub lines: Vec<Vec<Rat>>,
}

impl VRep {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Which generator of the contained set broke containment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Vertex,
    Ray,
    Line,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: GeneratorKind,
    #[serde(with = "serde_rat_vec")]
    pub generator: Vec<Rat>,
    pub row: Row,
    pub equality: bool,
}

/// A closed convex polyhedron in ℝ^dim with exact rational data.
///
/// At least one of the two canonical representations is always present; the
/// other is derived on first use and cached.
#[derive(Clone)]
pub struct Polyhedron {
    dim: usize,
    h: OnceLock<HRep>,
    v: OnceLock<VRep>,
}

fn to_ivec(v: &[Rat]) -> IVec {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let mut out: IVec = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    super::dd::make_primitive(&mut out);
    out
}

fn to_rvec(v: &[BigInt]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

fn hom_row(r: &Row) -> IVec {
    let mut v = r.a.clone();
    v.push(-r.b.clone());
    to_ivec(&v)
}

fn empty_hrep(dim: usize) -> HRep {
    HRep { eqs: vec![], ineqs: vec![Row::new(vec![Rat::zero(); dim], Rat::one())], empty: true }
}

pub(crate) fn canonical_vrep(dim: usize, vertices: Vec<Vec<Rat>>, rays: Vec<Vec<Rat>>, lines: Vec<Vec<Rat>>) -> VRep {
    if vertices.is_empty() {
        return VRep::default();
    }
    let (unit, pivots, ints) = canonical_basis(lines, dim);
    let mut rs: Vec<Vec<Rat>> = rays
        .into_iter()
        .filter_map(|mut r| {
            reduce(&mut r, &unit, &pivots);
            if r.iter().all(|x| x.is_zero()) {
                None
            } else {
                Some(primitive(&r))
            }
        })
        .collect();
    rs.sort();
    rs.dedup();
    let mut vs: Vec<Vec<Rat>> = vertices
        .into_iter()
        .map(|mut v| {
            reduce(&mut v, &unit, &pivots);
            v
        })
        .collect();
    vs.sort();
    vs.dedup();
    VRep { vertices: vs, rays: rs, lines: ints }
}

pub(crate) fn canonical_hrep(dim: usize, eqs: Vec<Row>, ineqs: Vec<Row>) -> HRep {
    let eq_rows: Vec<Vec<Rat>> = eqs
        .into_iter()
        .map(|r| {
            let mut v = r.a;
            v.push(r.b);
            v
        })
        .collect();
    let (unit, pivots, ints) = canonical_basis(eq_rows, dim);
    let mut rows: Vec<Row> = Vec::new();
    for r in ineqs {
        let mut v = r.a;
        v.push(r.b);
        reduce(&mut v, &unit, &pivots);
        if v[..dim].iter().all(|x| x.is_zero()) {
            if v[dim].is_positive() {
                return empty_hrep(dim);
            }
            continue;
        }
        let mut p = primitive(&v);
        let b = p.pop().unwrap();
        rows.push(Row::new(p, b));
    }
    rows.sort();
    rows.dedup();
    let eqs = ints
        .into_iter()
        .map(|mut v| {
            let b = v.pop().unwrap();
            Row::new(v, b)
        })
        .collect();
    HRep { eqs, ineqs: rows, empty: false }
}

fn hrep_to_vrep(dim: usize, ineqs: &[Row], eqs: &[Row]) -> VRep {
    let mut hin: Vec<IVec> = ineqs.iter().map(hom_row).collect();
    let mut x0 = vec![BigInt::zero(); dim + 1];
    x0[dim] = BigInt::one();
    hin.push(x0);
    let heq: Vec<IVec> = eqs.iter().map(hom_row).collect();
    let g = cone_generators(dim + 1, &hin, &heq);
    let mut vertices = Vec::new();
    let mut rays = Vec::new();
    for r in g.rays {
        let last = r[dim].clone();
        let v = to_rvec(&r[..dim]);
        if last.is_positive() {
            let s = Rat::from_integer(last);
            vertices.push(v.into_iter().map(|x| x / &s).collect());
        } else {
            rays.push(v);
        }
    }
    let lines = g
        .lines
        .iter()
        .map(|l| {
            debug_assert!(l[dim].is_zero());
            to_rvec(&l[..dim])
        })
        .collect();
    canonical_vrep(dim, vertices, rays, lines)
}

fn vrep_to_hrep(dim: usize, v: &VRep) -> HRep {
    if v.vertices.is_empty() {
        return empty_hrep(dim);
    }
    let mut ineqs: Vec<IVec> = Vec::new();
    for p in &v.vertices {
        let mut q = p.clone();
        q.push(Rat::one());
        ineqs.push(to_ivec(&q));
    }
    for r in &v.rays {
        let mut q = r.clone();
        q.push(Rat::zero());
        ineqs.push(to_ivec(&q));
    }
    let eqs: Vec<IVec> = v
        .lines
        .iter()
        .map(|l| {
            let mut q = l.clone();
            q.push(Rat::zero());
            to_ivec(&q)
        })
        .collect();
    let g = cone_generators(dim + 1, &ineqs, &eqs);
    let split = |y: &IVec| {
        let a = to_rvec(&y[..dim]);
        let c = Rat::from_integer(y[dim].clone());
        Row::new(a, -c)
    };
    let rows: Vec<Row> = g.rays.iter().map(split).filter(|r| !r.is_trivial()).collect();
    let eq_rows: Vec<Row> = g.lines.iter().map(split).filter(|r| !r.is_trivial()).collect();
    canonical_hrep(dim, eq_rows, rows)
}

impl Polyhedron {
    pub fn from_hrep(dim: usize, ineqs: Vec<Row>) -> Self {
        Self::from_hrep_eq(dim, ineqs, vec![])
    }

    pub fn from_hrep_eq(dim: usize, ineqs: Vec<Row>, eqs: Vec<Row>) -> Self {
        for r in ineqs.iter().chain(&eqs) {
            assert_eq!(r.a.len(), dim, "row dimension");
        }
        let v = hrep_to_vrep(dim, &ineqs, &eqs);
        Self::from_canonical_vrep(dim, v)
    }

    pub fn from_vrep(dim: usize, vertices: Vec<Vec<Rat>>, rays: Vec<Vec<Rat>>, lines: Vec<Vec<Rat>>) -> Self {
        for g in vertices.iter().chain(&rays).chain(&lines) {
            assert_eq!(g.len(), dim, "generator dimension");
        }
        if vertices.is_empty() {
            return Self::empty(dim);
        }
        let raw = VRep { vertices, rays, lines };
        let h = vrep_to_hrep(dim, &raw);
        Self::from_canonical_hrep(dim, h)
    }

    pub(crate) fn from_canonical_vrep(dim: usize, v: VRep) -> Self {
        let p = Polyhedron { dim, h: OnceLock::new(), v: OnceLock::new() };
        let _ = p.v.set(v);
        p
    }

    pub(crate) fn from_canonical_hrep(dim: usize, h: HRep) -> Self {
        let p = Polyhedron { dim, h: OnceLock::new(), v: OnceLock::new() };
        if h.empty {
            let _ = p.v.set(VRep::default());
        }
        let _ = p.h.set(h);
        p
    }

    pub fn empty(dim: usize) -> Self {
        let p = Polyhedron { dim, h: OnceLock::new(), v: OnceLock::new() };
        let _ = p.h.set(empty_hrep(dim));
        let _ = p.v.set(VRep::default());
        p
    }

    pub fn whole(dim: usize) -> Self {
        let p = Polyhedron { dim, h: OnceLock::new(), v: OnceLock::new() };
        let _ = p.h.set(HRep::default());
        let lines = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        let _ = p.v.set(VRep { vertices: vec![vec![Rat::zero(); dim]], rays: vec![], lines });
        p
    }

    pub fn point(x: Vec<Rat>) -> Self {
        let dim = x.len();
        Self::from_canonical_vrep(dim, canonical_vrep(dim, vec![x], vec![], vec![]))
    }

    /// `x + ℝ^dim_+`.
    pub fn orthant_at(x: Vec<Rat>) -> Self {
        let dim = x.len();
        let rays = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Self::from_canonical_vrep(dim, canonical_vrep(dim, vec![x], rays, vec![]))
    }

    /// `{x : w·x ≥ b}`; `PosInf` gives the empty set, `NegInf` the space.
    pub fn halfspace(w: Vec<Rat>, b: &ExtRat) -> Self {
        let dim = w.len();
        match b {
            ExtRat::PosInf => Self::empty(dim),
            ExtRat::NegInf => Self::whole(dim),
            ExtRat::Finite(b) => Self::from_hrep(dim, vec![Row::new(w, b.clone())]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hrep(&self) -> &HRep {
        self.h.get_or_init(|| vrep_to_hrep(self.dim, self.v.get().expect("one representation present")))
    }

    pub fn vrep(&self) -> &VRep {
        self.v.get_or_init(|| {
            let h = self.h.get().expect("one representation present");
            if h.empty {
                VRep::default()
            } else {
                hrep_to_vrep(self.dim, &h.ineqs, &h.eqs)
            }
        })
    }

    pub fn is_empty(&self) -> bool {
        if let Some(h) = self.h.get() {
            if h.empty {
                return true;
            }
        }
        self.vrep().is_empty()
    }

    pub fn is_whole(&self) -> bool {
        !self.is_empty() && self.vrep().lines.len() == self.dim
    }

    pub fn is_cone(&self) -> bool {
        let v = self.vrep();
        v.vertices.len() == 1 && v.vertices[0].iter().all(|x| x.is_zero())
    }

    pub fn contains_point(&self, x: &[Rat]) -> bool {
        let h = self.hrep();
        !h.empty && h.eqs.iter().all(|r| r.slack(x).is_zero()) && h.ineqs.iter().all(|r| !r.slack(x).is_negative())
    }

    /// Tests `other ⊆ self`. On failure, names the generator of `other` and
    /// the row of `self` it violates.
    pub fn contains(&self, other: &Polyhedron) -> Result<(), Violation> {
        assert_eq!(self.dim, other.dim);
        let v = other.vrep();
        if v.is_empty() {
            return Ok(());
        }
        let h = self.hrep();
        let zero = Rat::zero();
        let check = |kind: GeneratorKind, g: &Vec<Rat>, hom: bool| -> Result<(), Violation> {
            let val = |r: &Row| if hom { dot(&r.a, g) } else { r.slack(g) };
            for r in &h.eqs {
                if !val(r).is_zero() {
                    return Err(Violation { kind, generator: g.clone(), row: r.clone(), equality: true });
                }
            }
            for r in &h.ineqs {
                let s = val(r);
                let bad = match kind {
                    GeneratorKind::Line => !s.is_zero(),
                    _ => s < zero,
                };
                if bad {
                    return Err(Violation { kind, generator: g.clone(), row: r.clone(), equality: false });
                }
            }
            Ok(())
        };
        for g in &v.vertices {
            check(GeneratorKind::Vertex, g, false)?;
        }
        for g in &v.rays {
            check(GeneratorKind::Ray, g, true)?;
        }
        for g in &v.lines {
            check(GeneratorKind::Line, g, true)?;
        }
        Ok(())
    }

    pub fn set_eq(&self, other: &Polyhedron) -> bool {
        self.dim == other.dim && self.hrep() == other.hrep()
    }

    pub fn intersect(&self, other: &Polyhedron) -> Polyhedron {
        assert_eq!(self.dim, other.dim);
        if self.is_empty() || other.is_empty() {
            return Self::empty(self.dim);
        }
        let (a, b) = (self.hrep(), other.hrep());
        let ineqs = a.ineqs.iter().chain(&b.ineqs).cloned().collect();
        let eqs = a.eqs.iter().chain(&b.eqs).cloned().collect();
        Self::from_hrep_eq(self.dim, ineqs, eqs)
    }

    pub fn minkowski_sum(&self, other: &Polyhedron) -> Polyhedron {
        Self::minkowski_sum_all(self.dim, [self, other])
    }

    pub fn minkowski_sum_all<'a>(dim: usize, sets: impl IntoIterator<Item = &'a Polyhedron>) -> Polyhedron {
        let mut vertices = vec![vec![Rat::zero(); dim]];
        let mut rays = Vec::new();
        let mut lines = Vec::new();
        for s in sets {
            assert_eq!(s.dim, dim);
            let v = s.vrep();
            if v.is_empty() {
                return Self::empty(dim);
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
            rays.extend(v.rays.iter().cloned());
            lines.extend(v.lines.iter().cloned());
        }
        Self::from_vrep(dim, vertices, rays, lines)
    }

    /// `Σ_k diag(scale_k) P_k`, a weighted Minkowski sum with nonnegative
    /// diagonal weights.
    pub fn minkowski_sum_scaled<'a>(dim: usize, parts: impl IntoIterator<Item = (&'a [Rat], &'a Polyhedron)>) -> Polyhedron {
        let mut vertices = vec![vec![Rat::zero(); dim]];
        let mut rays = Vec::new();
        let mut lines = Vec::new();
        for (k, s) in parts {
            assert_eq!(s.dim, dim);
            assert_eq!(k.len(), dim);
            let v = s.vrep();
            if v.is_empty() {
                return Self::empty(dim);
            }
            let sc = |x: &Vec<Rat>| x.iter().zip(k).map(|(a, b)| a * b).collect::<Vec<Rat>>();
            let mut scaled: Vec<Vec<Rat>> = v.vertices.iter().map(sc).collect();
            scaled.sort();
            scaled.dedup();
            let mut next = Vec::with_capacity(vertices.len() * scaled.len());
            for a in &vertices {
                for b in &scaled {
                    next.push(a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<Rat>>());
                }
            }
            next.sort();
            next.dedup();
            vertices = next;
            rays.extend(v.rays.iter().map(sc).filter(|r| r.iter().any(|x| !x.is_zero())));
            lines.extend(v.lines.iter().map(sc).filter(|r| r.iter().any(|x| !x.is_zero())));
        }
        Self::from_vrep(dim, vertices, rays, lines)
    }

    /// `A −· B = {x : x + B ⊆ A}`. The flag is set when `B` is empty, in
    /// which case the containment is vacuous and the whole space is returned.
    pub fn minkowski_subtract(&self, b: &Polyhedron) -> (Polyhedron, bool) {
        assert_eq!(self.dim, b.dim);
        let bv = b.vrep();
        if bv.is_empty() {
            return (Self::whole(self.dim), true);
        }
        if self.is_empty() {
            return (Self::empty(self.dim), false);
        }
        let h = self.hrep();
        for r in &h.ineqs {
            if bv.rays.iter().any(|g| dot(&r.a, g).is_negative()) || bv.lines.iter().any(|g| !dot(&r.a, g).is_zero()) {
                return (Self::empty(self.dim), false);
            }
        }
        for r in &h.eqs {
            if bv.rays.iter().chain(&bv.lines).any(|g| !dot(&r.a, g).is_zero()) {
                return (Self::empty(self.dim), false);
            }
        }
        let mut ineqs = Vec::with_capacity(h.ineqs.len());
        for r in &h.ineqs {
            let m = bv.vertices.iter().map(|v| dot(&r.a, v)).min().unwrap();
            ineqs.push(Row::new(r.a.clone(), &r.b - m));
        }
        let mut eqs = Vec::with_capacity(h.eqs.len());
        for r in &h.eqs {
            let vals: Vec<Rat> = bv.vertices.iter().map(|v| dot(&r.a, v)).collect();
            if vals.iter().any(|x| *x != vals[0]) {
                return (Self::empty(self.dim), false);
            }
            eqs.push(Row::new(r.a.clone(), &r.b - &vals[0]));
        }
        (Self::from_hrep_eq(self.dim, ineqs, eqs), false)
    }

    /// `inf_{x ∈ self} w·x`.
    pub fn support_value(&self, w: &[Rat]) -> ExtRat {
        let v = self.vrep();
        if v.is_empty() {
            return ExtRat::PosInf;
        }
        if v.rays.iter().any(|r| dot(w, r).is_negative()) || v.lines.iter().any(|l| !dot(w, l).is_zero()) {
            return ExtRat::NegInf;
        }
        ExtRat::Finite(v.vertices.iter().map(|x| dot(w, x)).min().unwrap())
    }

    /// A minimizer of `w·x` when the infimum is finite.
    pub fn argmin(&self, w: &[Rat]) -> Option<Vec<Rat>> {
        match self.support_value(w) {
            ExtRat::Finite(m) => self.vrep().vertices.iter().find(|x| dot(w, x) == m).cloned(),
            _ => None,
        }
    }

    pub fn recession_cone(&self) -> Polyhedron {
        let v = self.vrep();
        assert!(!v.is_empty(), "recession cone of the empty set");
        Self::from_canonical_vrep(
            self.dim,
            VRep { vertices: vec![vec![Rat::zero(); self.dim]], rays: v.rays.clone(), lines: v.lines.clone() },
        )
    }

    pub fn translate(&self, t: &[Rat]) -> Polyhedron {
        assert_eq!(t.len(), self.dim);
        if self.is_empty() {
            return self.clone();
        }
        let v = self.vrep();
        let vertices = v.vertices.iter().map(|x| x.iter().zip(t).map(|(a, b)| a + b).collect()).collect();
        let out = Self::from_canonical_vrep(self.dim, canonical_vrep(self.dim, vertices, v.rays.clone(), v.lines.clone()));
        if let Some(h) = self.h.get() {
            let shift = |r: &Row| Row::new(r.a.clone(), &r.b + dot(&r.a, t));
            let _ = out.h.set(canonical_hrep(self.dim, h.eqs.iter().map(shift).collect(), h.ineqs.iter().map(shift).collect()));
        }
        out
    }

    /// Image under the linear map `x ↦ M x` where `M` has `out_dim` rows.
    pub fn linear_image(&self, m: &[Vec<Rat>]) -> Polyhedron {
        let out_dim = m.len();
        let v = self.vrep();
        if v.is_empty() {
            return Self::empty(out_dim);
        }
        let map = |x: &Vec<Rat>| m.iter().map(|row| dot(row, x)).collect::<Vec<Rat>>();
        Self::from_vrep(
            out_dim,
            v.vertices.iter().map(map).collect(),
            v.rays.iter().map(map).collect(),
            v.lines.iter().map(map).collect(),
        )
    }

    /// Preimage `{u ∈ ℝ^k : E u + c ∈ self}` where `e` is `dim × k`.
    pub fn preimage(&self, e: &[Vec<Rat>], k: usize, c: &[Rat]) -> Polyhedron {
        assert_eq!(e.len(), self.dim);
        let h = self.hrep();
        if h.empty {
            return Self::empty(k);
        }
        let pull = |r: &Row| {
            let mut a = vec![Rat::zero(); k];
            for (i, ai) in r.a.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                for (j, eij) in e[i].iter().enumerate() {
                    if !eij.is_zero() {
                        a[j] += ai * eij;
                    }
                }
            }
            Row::new(a, &r.b - dot(&r.a, c))
        };
        Self::from_hrep_eq(k, h.ineqs.iter().map(pull).collect(), h.eqs.iter().map(pull).collect())
    }

    /// Cartesian product, coordinates of `self` first.
    pub fn product(&self, other: &Polyhedron) -> Polyhedron {
        Self::product_all(&[self, other])
    }

    pub fn product_all(parts: &[&Polyhedron]) -> Polyhedron {
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        if parts.iter().any(|p| p.is_empty()) {
            return Self::empty(dim);
        }
        let mut ineqs = Vec::new();
        let mut eqs = Vec::new();
        let mut off = 0;
        for p in parts {
            let h = p.hrep();
            let lift = |r: &Row| {
                let mut a = vec![Rat::zero(); dim];
                a[off..off + p.dim].clone_from_slice(&r.a);
                Row::new(a, r.b.clone())
            };
            ineqs.extend(h.ineqs.iter().map(lift));
            eqs.extend(h.eqs.iter().map(lift));
            off += p.dim;
        }
        let h = canonical_hrep(dim, eqs, ineqs);
        Self::from_canonical_hrep(dim, h)
    }

    /// Projection onto the listed coordinates by dropping the others from the
    /// generators.
    pub fn project_generators(&self, keep: &[usize]) -> Polyhedron {
        let v = self.vrep();
        if v.is_empty() {
            return Self::empty(keep.len());
        }
        let pick = |x: &Vec<Rat>| keep.iter().map(|&i| x[i].clone()).collect::<Vec<Rat>>();
        Self::from_vrep(
            keep.len(),
            v.vertices.iter().map(pick).collect(),
            v.rays.iter().map(pick).collect(),
            v.lines.iter().map(pick).collect(),
        )
    }
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.set_eq(other)
    }
}

impl fmt::Debug for Polyhedron {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = self.hrep();
        let v = self.vrep();
        f.debug_struct("Polyhedron")
            .field("dim", &self.dim)
            .field("empty", &h.empty)
            .field("eqs", &h.eqs.iter().map(|r| format_row(r, "=")).collect::<Vec<_>>())
            .field("ineqs", &h.ineqs.iter().map(|r| format_row(r, ">=")).collect::<Vec<_>>())
            .field("vertices", &v.vertices.iter().map(|x| format_vec(x)).collect::<Vec<_>>())
            .field("rays", &v.rays.iter().map(|x| format_vec(x)).collect::<Vec<_>>())
            .field("lines", &v.lines.iter().map(|x| format_vec(x)).collect::<Vec<_>>())
            .finish()
    }
}

pub fn format_vec(x: &[Rat]) -> String {
    let parts: Vec<String> = x.iter().map(crate::num::fmt_rat).collect();
    format!("({})", parts.join(", "))
}

fn format_row(r: &Row, op: &str) -> String {
    format!("{}·x {} {}", format_vec(&r.a), op, crate::num::fmt_rat(&r.b))
}
