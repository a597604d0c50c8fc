//! Double description method for polyhedral cones over the integers.
//!
//! The cone is `{x : a·x ≥ 0 for a in ineqs, a·x = 0 for a in eqs}`. Output is
//! a minimal set of extreme rays together with a basis of the lineality
//! space. All vectors are kept primitive, so arithmetic stays in `BigInt`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

pub type IVec = Vec<BigInt>;

#[derive(Clone, Debug, Default)]
pub struct ConeGenerators {
    pub rays: Vec<IVec>,
    pub lines: Vec<IVec>,
}

pub fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    let mut s = BigInt::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn make_primitive(v: &mut IVec) {
    let mut g = BigInt::zero();
    for x in v.iter() {
        g = g.gcd(x);
        if g == BigInt::from(1) {
            return;
        }
    }
    if !g.is_zero() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
}

/// `p·u + q·v`, made primitive.
fn combine(p: &BigInt, u: &[BigInt], q: &BigInt, v: &[BigInt]) -> IVec {
    let mut out: IVec = u.iter().zip(v).map(|(x, y)| p * x + q * y).collect();
    make_primitive(&mut out);
    out
}

#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn superset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    v: IVec,
    zeros: Bits,
}

pub fn cone_generators(dim: usize, ineqs: &[IVec], eqs: &[IVec]) -> ConeGenerators {
    let total = ineqs.len() + eqs.len();
    let mut lines: Vec<IVec> = (0..dim)
        .map(|i| {
            let mut v = vec![BigInt::zero(); dim];
            v[i] = BigInt::from(1);
            v
        })
        .collect();
    let mut rays: Vec<Ray> = Vec::new();
    // Rows of the constraints seen so far, used to keep lineality bookkeeping exact.
    let order: Vec<(bool, &IVec)> = eqs.iter().map(|a| (true, a)).chain(ineqs.iter().map(|a| (false, a))).collect();

    for (k, &(is_eq, a)) in order.iter().enumerate() {
        if a.iter().all(|x| x.is_zero()) {
            for r in rays.iter_mut() {
                r.zeros.set(k);
            }
            continue;
        }
        if let Some(j) = lines.iter().position(|l| !idot(a, l).is_zero()) {
            let mut l = lines.swap_remove(j);
            let mut al = idot(a, &l);
            if al.is_negative() {
                for x in l.iter_mut() {
                    *x = -x.clone();
                }
                al = -al;
            }
            for other in lines.iter_mut() {
                let ao = idot(a, other);
                if !ao.is_zero() {
                    *other = combine(&al, other, &(-ao), &l);
                }
            }
            for r in rays.iter_mut() {
                let ar = idot(a, &r.v);
                if !ar.is_zero() {
                    r.v = combine(&al, &r.v, &(-ar), &l);
                }
                r.zeros.set(k);
            }
            if !is_eq {
                let mut zeros = Bits::new(total);
                for i in 0..k {
                    zeros.set(i);
                }
                rays.push(Ray { v: l, zeros });
            }
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| idot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let need = dim.saturating_sub(lines.len() + 2);
        let mut new_rays = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zeros.and(&rays[n].zeros);
                if common.count() < need {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(i, r)| i == p || i == n || !r.zeros.superset_of(&common));
                if !adjacent {
                    continue;
                }
                let v = combine(&vals[p], &rays[n].v, &(-vals[n].clone()), &rays[p].v);
                let mut zeros = common;
                zeros.set(k);
                new_rays.push(Ray { v, zeros });
            }
        }
        let mut kept = Vec::with_capacity(rays.len() + new_rays.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if vals[i].is_zero() {
                r.zeros.set(k);
                kept.push(r);
            } else if vals[i].is_positive() && !is_eq {
                kept.push(r);
            }
        }
        kept.extend(new_rays);
        rays = kept;
    }
    ConeGenerators { rays: rays.into_iter().map(|r| r.v).collect(), lines }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(v: &[i64]) -> IVec {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn orthant() {
        let g = cone_generators(2, &[iv(&[1, 0]), iv(&[0, 1])], &[]);
        assert!(g.lines.is_empty());
        let mut rays = g.rays;
        rays.sort();
        assert_eq!(rays, vec![iv(&[0, 1]), iv(&[1, 0])]);
    }

    #[test]
    fn halfspace_has_lineality() {
        let g = cone_generators(3, &[iv(&[1, 1, 0])], &[]);
        assert_eq!(g.lines.len(), 2);
        assert_eq!(g.rays.len(), 1);
    }

    #[test]
    fn square_pyramid() {
        // Cone over a square: four facets, four extreme rays.
        let g = cone_generators(
            3,
            &[iv(&[1, 0, 1]), iv(&[-1, 0, 1]), iv(&[0, 1, 1]), iv(&[0, -1, 1])],
            &[],
        );
        assert!(g.lines.is_empty());
        assert_eq!(g.rays.len(), 4);
    }

    #[test]
    fn equality_cuts() {
        let g = cone_generators(3, &[iv(&[1, 0, 0]), iv(&[0, 1, 0]), iv(&[0, 0, 1])], &[iv(&[1, 1, -1])]);
        assert!(g.lines.is_empty());
        assert_eq!(g.rays.len(), 2);
        for r in &g.rays {
            assert!(idot(&iv(&[1, 1, -1]), r).is_zero());
        }
    }
}
