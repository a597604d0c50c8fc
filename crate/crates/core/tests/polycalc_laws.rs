mod common;

use common::laws;
use proptest::prelude::*;
use riskset::num::{dot, int, rat, ExtRat, Rat};
use riskset::polycalc::{Polyhedron, Row};

const CASES: u32 = 500;

fn rv(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| int(x)).collect()
}

/// Random H-representation with at most 8 rows.
fn hrep(d: usize) -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
    prop::collection::vec((prop::collection::vec(-3i64..=3, d), -4i64..=4), 1..=8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn hrep_round_trip(rows in (1usize..=4).prop_flat_map(hrep)) {
        let d = rows[0].0.len();
        let p = Polyhedron::from_hrep(d, rows.iter().map(|(a, b)| Row::new(rv(a), int(*b))).collect());
        let v = p.vrep().clone();
        let q = Polyhedron::from_vrep(d, v.vertices, v.rays, v.lines);
        prop_assert!(p.contains(&q).is_ok());
        prop_assert!(q.contains(&p).is_ok());
        // every original row holds on every generator
        for (a, b) in &rows {
            let a = rv(a);
            for x in &q.vrep().vertices {
                prop_assert!(dot(&a, x) >= int(*b));
            }
        }
    }

    #[test]
    fn vrep_round_trip(d in 1usize..=4, seed in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..=6), rays in prop::collection::vec(prop::collection::vec(-1i64..=2, 4), 0..=3)) {
        let verts: Vec<Vec<Rat>> = seed.iter().map(|v| rv(&v[..d])).collect();
        let rays: Vec<Vec<Rat>> = rays.iter().map(|r| rv(&r[..d])).filter(|r| r.iter().any(|x| *x != int(0))).collect();
        let p = Polyhedron::from_vrep(d, verts.clone(), rays.clone(), vec![]);
        let h = p.hrep().clone();
        let q = Polyhedron::from_hrep_eq(d, h.ineqs, h.eqs);
        prop_assert!(p.set_eq(&q));
        for x in &verts {
            prop_assert!(q.contains_point(x));
        }
    }

    #[test]
    fn halfspace_minus_sum(c in laws::case()) {
        laws::halfspace_minus_sum(&c)?;
    }

    #[test]
    fn sum_with_halfspace_is_subtraction(c in laws::case()) {
        laws::sum_with_halfspace_is_subtraction(&c)?;
    }

    #[test]
    fn ordered_halfspace_sums_subtract_into_g(c in laws::case()) {
        laws::ordered_sums_subtract_into_g(&c)?;
    }

    #[test]
    fn support_is_additive(c in laws::case()) {
        laws::support_is_additive(&c)?;
    }
}

#[test]
fn spec_examples() {
    let orth = Polyhedron::orthant_at(rv(&[0, 0]));
    assert_eq!(orth.vrep().vertices, vec![rv(&[0, 0])]);
    let tri = Polyhedron::from_hrep(2, vec![Row::new(rv(&[1, 1]), int(1)), Row::new(rv(&[1, 0]), int(0)), Row::new(rv(&[0, 1]), int(0))]);
    let mut v = tri.vrep().vertices.clone();
    v.sort();
    assert_eq!(v, vec![rv(&[0, 1]), rv(&[1, 0])]);
    let (d, _) = orth.minkowski_subtract(&Polyhedron::point(rv(&[1, 1])));
    assert!(d.set_eq(&Polyhedron::orthant_at(rv(&[-1, -1]))));
    let h0 = Polyhedron::halfspace(rv(&[1, 1]), &ExtRat::zero());
    let h1 = Polyhedron::halfspace(rv(&[1, 1]), &ExtRat::Finite(int(1)));
    assert!(h0.minkowski_subtract(&h1).0.set_eq(&Polyhedron::halfspace(rv(&[1, 1]), &ExtRat::Finite(int(-1)))));
    let neg_ray = Polyhedron::from_vrep(2, vec![rv(&[0, 0])], vec![rv(&[-1, 0])], vec![]);
    assert!(orth.minkowski_subtract(&neg_ray).0.is_empty());
    let (whole, vacuous) = orth.minkowski_subtract(&Polyhedron::empty(2));
    assert!(vacuous && whole.is_whole());
    assert_eq!(Polyhedron::orthant_at(rv(&[1, 2])).support_value(&rv(&[1, 0])), ExtRat::Finite(int(1)));
    assert_eq!(orth.support_value(&rv(&[1, -1])), ExtRat::NegInf);
    let v = orth.contains(&Polyhedron::orthant_at(rv(&[1, 1])));
    assert!(v.is_ok());
    let err = Polyhedron::orthant_at(rv(&[1, 1])).contains(&orth).unwrap_err();
    assert_eq!(err.generator, rv(&[0, 0]));
    let sum = Polyhedron::from_vrep(2, vec![rv(&[0, 0]), rv(&[1, 0]), rv(&[0, 1])], vec![rv(&[1, 0]), rv(&[0, 1])], vec![])
        .minkowski_sum(&Polyhedron::orthant_at(rv(&[1, 1])));
    assert!(sum.set_eq(&Polyhedron::orthant_at(rv(&[1, 1]))));
    let cone = Polyhedron::from_vrep(2, vec![rv(&[1, 0]), rv(&[0, 1])], vec![rv(&[1, 1])], vec![]).recession_cone();
    assert!(cone.set_eq(&Polyhedron::from_vrep(2, vec![rv(&[0, 0])], vec![rv(&[1, 1])], vec![])));
    let proj = Polyhedron::from_hrep(2, vec![Row::new(rv(&[1, 1]), int(1)), Row::new(rv(&[0, 1]), int(0))]).project_generators(&[0]);
    assert!(proj.is_whole());
    assert_eq!(rat(1, 2) + rat(1, 2), int(1));
}
