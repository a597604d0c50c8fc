//! Fourier–Motzkin elimination with Chernikov's redundancy rule.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::polyhedron::{Polyhedron, Row};
use crate::num::{primitive, Rat};

struct Tracked {
    a: Vec<Rat>,
    b: Rat,
    history: BTreeSet<usize>,
}

/// Projects onto the coordinates in `keep` (in that order) by eliminating all
/// others from the H-representation.
pub fn project(p: &Polyhedron, keep: &[usize]) -> Polyhedron {
    let n = p.dim();
    if p.is_empty() {
        return Polyhedron::empty(keep.len());
    }
    let h = p.hrep();
    let mut eqs: Vec<(Vec<Rat>, Rat)> = h.eqs.iter().map(|r| (r.a.clone(), r.b.clone())).collect();
    let mut rows: Vec<Tracked> = h
        .ineqs
        .iter()
        .enumerate()
        .map(|(i, r)| Tracked { a: r.a.clone(), b: r.b.clone(), history: BTreeSet::from([i]) })
        .collect();
    let eliminate: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let mut steps = 0usize;

    for &j in &eliminate {
        if let Some(k) = eqs.iter().position(|(a, _)| !a[j].is_zero()) {
            let (ea, eb) = eqs.swap_remove(k);
            let piv = ea[j].clone();
            let sub = |a: &mut Vec<Rat>, b: &mut Rat| {
                if a[j].is_zero() {
                    return;
                }
                let f = &a[j] / &piv;
                for (x, y) in a.iter_mut().zip(&ea) {
                    *x -= &f * y;
                }
                *b -= &f * &eb;
            };
            for (a, b) in eqs.iter_mut() {
                sub(a, b);
            }
            for r in rows.iter_mut() {
                sub(&mut r.a, &mut r.b);
            }
            continue;
        }
        steps += 1;
        let (mut pos, mut neg, mut zero) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows.drain(..) {
            if r.a[j].is_positive() {
                pos.push(r);
            } else if r.a[j].is_negative() {
                neg.push(r);
            } else {
                zero.push(r);
            }
        }
        for p in &pos {
            for q in &neg {
                let history: BTreeSet<usize> = p.history.union(&q.history).copied().collect();
                if history.len() > steps + 1 {
                    continue;
                }
                let (cp, cq) = (-q.a[j].clone(), p.a[j].clone());
                let mut v: Vec<Rat> = p.a.iter().zip(&q.a).map(|(x, y)| &cp * x + &cq * y).collect();
                v.push(&cp * &p.b + &cq * &q.b);
                let mut v = primitive(&v);
                let b = v.pop().unwrap();
                zero.push(Tracked { a: v, b, history });
            }
        }
        rows = zero;
    }

    let shrink = |a: &[Rat]| keep.iter().map(|&i| a[i].clone()).collect::<Vec<Rat>>();
    let ineqs: Vec<Row> = rows.iter().map(|r| Row::new(shrink(&r.a), r.b.clone())).collect();
    let eq_rows: Vec<Row> = eqs.iter().map(|(a, b)| Row::new(shrink(a), b.clone())).collect();
    for r in ineqs.iter().chain(&eq_rows) {
        if r.is_trivial() {
            let infeasible = if eq_rows.contains(r) { !r.b.is_zero() } else { r.b.is_positive() };
            if infeasible {
                return Polyhedron::empty(keep.len());
            }
        }
    }
    let ineqs = ineqs.into_iter().filter(|r| !r.is_trivial()).collect();
    let eq_rows = eq_rows.into_iter().filter(|r| !r.is_trivial()).collect();
    Polyhedron::from_hrep_eq(keep.len(), ineqs, eq_rows)
}
