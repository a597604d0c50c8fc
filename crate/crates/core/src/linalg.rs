//! Small dense exact linear algebra helpers.

use num_traits::{Signed, Zero};

use crate::num::{primitive, Rat};

/// Reduced row echelon form. Returns the nonzero rows and their pivot columns.
/// Rows are scaled so that every pivot equals one.
pub fn rref(mut rows: Vec<Vec<Rat>>, ncols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][col].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(rows: &[Vec<Rat>], ncols: usize) -> usize {
    rref(rows.to_vec(), ncols).1.len()
}

/// Eliminates the pivot coordinates of `v` using an RREF basis.
pub fn reduce(v: &mut [Rat], basis: &[Vec<Rat>], pivots: &[usize]) {
    for (row, &p) in basis.iter().zip(pivots) {
        if !v[p].is_zero() {
            let f = v[p].clone();
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
    }
}

/// RREF basis scaled to primitive integer rows with positive pivots.
pub fn canonical_basis(rows: Vec<Vec<Rat>>, ncols: usize) -> (Vec<Vec<Rat>>, Vec<usize>, Vec<Vec<Rat>>) {
    let (unit, pivots) = rref(rows, ncols);
    let ints = unit
        .iter()
        .map(|r| {
            let p = primitive(r);
            if p.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                p.into_iter().map(|x| -x).collect()
            } else {
                p
            }
        })
        .collect();
    (unit, pivots, ints)
}

/// Basis of the null space `{x : rows·x = 0}`.
pub fn nullspace(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let (r, pivots) = rref(rows.to_vec(), ncols);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::from_integer(1.into());
        for (row, &p) in r.iter().zip(&pivots) {
            v[p] = -row[free].clone();
        }
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    #[test]
    fn rref_and_nullspace() {
        let rows = vec![vec![int(1), int(2), int(3)], vec![int(2), int(4), int(6)], vec![int(0), int(1), int(1)]];
        let (r, p) = rref(rows.clone(), 3);
        assert_eq!(p, vec![0, 1]);
        assert_eq!(r.len(), 2);
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 1);
        for row in &rows {
            assert!(crate::num::dot(row, &ns[0]).is_zero());
        }
    }
}
