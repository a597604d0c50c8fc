//! The subtraction and closure identities on upper sets in dimension ≤ 4.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use riskset::num::{dot, int, ExtRat, Rat};
use riskset::polycalc::Polyhedron;

pub fn rv(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| int(x)).collect()
}

fn unit(d: usize, i: usize) -> Vec<Rat> {
    (0..d).map(|j| if i == j { int(1) } else { int(0) }).collect()
}

#[derive(Clone, Debug)]
pub struct Case {
    pub a: Polyhedron,
    pub b: Polyhedron,
    /// Nonnegative, nonzero normal of `G = {w·x ≥ 0}`.
    pub w: Vec<Rat>,
    /// Arbitrary direction for support values.
    pub v: Vec<Rat>,
    pub shift: i64,
}

/// A few vertices plus the orthant, sometimes an extra ray.
fn upper(d: usize) -> impl Strategy<Value = Polyhedron> {
    (
        prop::collection::vec(prop::collection::vec(-3i64..=3, d), 1..=4),
        prop::option::weighted(0.2, prop::collection::vec(-2i64..=2, d)),
    )
        .prop_map(move |(verts, extra)| {
            let mut rays: Vec<Vec<Rat>> = (0..d).map(|i| unit(d, i)).collect();
            if let Some(r) = extra.filter(|r| r.iter().any(|&x| x != 0)) {
                rays.push(rv(&r));
            }
            Polyhedron::from_vrep(d, verts.iter().map(|v| rv(v)).collect(), rays, vec![])
        })
}

pub fn case() -> impl Strategy<Value = Case> {
    (1usize..=4).prop_flat_map(|d| {
        (
            upper(d),
            upper(d),
            prop::collection::vec(0i64..=3, d).prop_filter("nonzero", |w| w.iter().any(|&x| x != 0)),
            prop::collection::vec(-1i64..=3, d),
            0i64..=3,
        )
            .prop_map(|(a, b, w, v, shift)| Case { a, b, w: rv(&w), v: rv(&v), shift })
    })
}

fn g(w: &[Rat]) -> Polyhedron {
    Polyhedron::halfspace(w.to_vec(), &ExtRat::zero())
}

/// `G −· B` from the support value of `B`.
fn halfspace_minus(w: &[Rat], b: &Polyhedron) -> Polyhedron {
    match b.support_value(w) {
        ExtRat::PosInf => Polyhedron::whole(w.len()),
        ExtRat::NegInf => Polyhedron::empty(w.len()),
        ExtRat::Finite(s) => Polyhedron::halfspace(w.to_vec(), &ExtRat::Finite(-s)),
    }
}

fn brute_support(p: &Polyhedron, w: &[Rat]) -> ExtRat {
    let v = p.vrep();
    if v.is_empty() {
        return ExtRat::PosInf;
    }
    if v.rays.iter().any(|r| dot(w, r) < int(0)) || v.lines.iter().any(|l| dot(w, l) != int(0)) {
        return ExtRat::NegInf;
    }
    ExtRat::Finite(v.vertices.iter().map(|x| dot(w, x)).min().unwrap())
}

/// `G −· (A + B) = (G −· A) + (G −· B)`.
pub fn halfspace_minus_sum(c: &Case) -> Result<(), TestCaseError> {
    let g = g(&c.w);
    let lhs = g.minkowski_subtract(&c.a.minkowski_sum(&c.b)).0;
    let rhs = g.minkowski_subtract(&c.a).0.minkowski_sum(&g.minkowski_subtract(&c.b).0);
    prop_assert!(lhs.set_eq(&rhs));
    prop_assert!(lhs.set_eq(&halfspace_minus(&c.w, &c.a.minkowski_sum(&c.b))));
    Ok(())
}

/// `A + B + G = (A + G) −· (G −· B)`.
pub fn sum_with_halfspace_is_subtraction(c: &Case) -> Result<(), TestCaseError> {
    let g = g(&c.w);
    let lhs = c.a.minkowski_sum(&c.b).minkowski_sum(&g);
    let rhs = c.a.minkowski_sum(&g).minkowski_subtract(&g.minkowski_subtract(&c.b).0).0;
    prop_assert!(lhs.set_eq(&rhs));
    Ok(())
}

/// `A + G ⊆ B + G` gives `(A + G) −· (B + G) ⊆ G` when both infima are
/// finite.
pub fn ordered_sums_subtract_into_g(c: &Case) -> Result<(), TestCaseError> {
    let g = g(&c.w);
    let d = c.w.len();
    let a = if c.shift == 0 { c.a.clone() } else { c.b.translate(&vec![int(c.shift); d]) };
    if !(a.support_value(&c.w).is_finite() && c.b.support_value(&c.w).is_finite()) {
        return Err(TestCaseError::reject("infinite support"));
    }
    let (ag, bg) = (a.minkowski_sum(&g), c.b.minkowski_sum(&g));
    if bg.contains(&ag).is_ok() {
        let (diff, _) = ag.minkowski_subtract(&bg);
        prop_assert!(g.contains(&diff).is_ok());
    }
    Ok(())
}

/// Support values add over sums and `(A −· B) + B ⊆ A`.
pub fn support_is_additive(c: &Case) -> Result<(), TestCaseError> {
    let (sa, sb) = (c.a.support_value(&c.v), c.b.support_value(&c.v));
    prop_assert_eq!(&sa, &brute_support(&c.a, &c.v));
    if sa.is_finite() && sb.is_finite() {
        prop_assert_eq!(c.a.minkowski_sum(&c.b).support_value(&c.v), sa + sb);
    }
    let (diff, _) = c.a.minkowski_subtract(&c.b);
    prop_assert!(c.a.contains(&diff.minkowski_sum(&c.b)).is_ok());
    Ok(())
}

pub type Law = fn(&Case) -> Result<(), TestCaseError>;

pub const LAWS: [(&str, Law); 4] = [
    ("G −· (A+B) = (G −· A) + (G −· B)", halfspace_minus_sum),
    ("A + B + G = (A+G) −· (G −· B)", sum_with_halfspace_is_subtraction),
    ("(A+G) −· (B+G) ⊆ G", ordered_sums_subtract_into_g),
    ("support additivity", support_is_additive),
];
