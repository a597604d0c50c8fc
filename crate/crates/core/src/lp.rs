//! Exact rational linear programming: dense two-phase simplex with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::num::Rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Ge,
    Le,
    Eq,
}

/// `minimize c·x` subject to linear rows; variables are nonnegative unless
/// marked free.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub n: usize,
    pub objective: Vec<Rat>,
    pub rows: Vec<(Vec<Rat>, Cmp, Rat)>,
    pub free: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rat, x: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rat> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram { n, objective: vec![Rat::zero(); n], rows: Vec::new(), free: vec![false; n] }
    }

    pub fn all_free(mut self) -> Self {
        self.free = vec![true; self.n];
        self
    }

    pub fn row(&mut self, a: Vec<Rat>, cmp: Cmp, b: Rat) {
        assert_eq!(a.len(), self.n);
        self.rows.push((a, cmp, b));
    }

    pub fn minimize(&self) -> LpOutcome {
        // Column layout: for each variable either x (nonneg) or x+, x- (free),
        // then one slack per inequality row.
        let mut col_of = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for &f in &self.free {
            col_of.push(ncols);
            ncols += if f { 2 } else { 1 };
        }
        let nslack = self.rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let total = ncols + nslack;
        let m = self.rows.len();

        let mut a = vec![vec![Rat::zero(); total]; m];
        let mut b = vec![Rat::zero(); m];
        let mut slack = ncols;
        for (i, (row, cmp, rhs)) in self.rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                a[i][col_of[j]] = v.clone();
                if self.free[j] {
                    a[i][col_of[j] + 1] = -v.clone();
                }
            }
            match cmp {
                Cmp::Ge => {
                    a[i][slack] = -Rat::one();
                    slack += 1;
                }
                Cmp::Le => {
                    a[i][slack] = Rat::one();
                    slack += 1;
                }
                Cmp::Eq => {}
            }
            b[i] = rhs.clone();
            if b[i].is_negative() {
                for x in a[i].iter_mut() {
                    *x = -x.clone();
                }
                b[i] = -b[i].clone();
            }
        }
        let mut c = vec![Rat::zero(); total];
        for (j, v) in self.objective.iter().enumerate() {
            c[col_of[j]] = v.clone();
            if self.free[j] {
                c[col_of[j] + 1] = -v.clone();
            }
        }

        match simplex_standard(a, b, c) {
            Std::Optimal(value, y) => {
                let x = (0..self.n)
                    .map(|j| {
                        let mut v = y[col_of[j]].clone();
                        if self.free[j] {
                            v -= &y[col_of[j] + 1];
                        }
                        v
                    })
                    .collect();
                LpOutcome::Optimal { value, x }
            }
            Std::Infeasible => LpOutcome::Infeasible,
            Std::Unbounded => LpOutcome::Unbounded,
        }
    }

    pub fn maximize(&self) -> LpOutcome {
        let mut neg = self.clone();
        for v in neg.objective.iter_mut() {
            *v = -v.clone();
        }
        match neg.minimize() {
            LpOutcome::Optimal { value, x } => LpOutcome::Optimal { value: -value, x },
            other => other,
        }
    }
}

enum Std {
    Optimal(Rat, Vec<Rat>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize, obj: &mut [Rat], obj_val: &mut Rat) {
        let inv = self.rows[r][col].recip();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][col].is_zero() {
                continue;
            }
            let f = self.rows[i][col].clone();
            for (x, y) in self.rows[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[col].is_zero() {
            let f = obj[col].clone();
            for (x, y) in obj.iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            *obj_val -= &f * &prhs;
        }
        self.basis[r] = col;
    }

    /// Runs Bland's rule on reduced costs `obj` (minimization) restricted to
    /// columns `< limit`. Returns false when unbounded.
    fn run(&mut self, obj: &mut [Rat], obj_val: &mut Rat, limit: usize) -> bool {
        loop {
            let Some(col) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, col, obj, obj_val);
        }
    }
}

/// `min c·x, Ax = b, x ≥ 0` with `b ≥ 0`.
fn simplex_standard(a: Vec<Vec<Rat>>, b: Vec<Rat>, c: Vec<Rat>) -> Std {
    let m = a.len();
    let n = c.len();
    // Phase one with one artificial per row.
    let mut rows: Vec<Vec<Rat>> = a
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.extend((0..m).map(|k| if k == i { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let mut tab = Tableau { rows: std::mem::take(&mut rows), rhs: b, basis: (n..n + m).collect() };
    let mut obj1 = vec![Rat::zero(); n + m];
    let mut val1 = Rat::zero();
    for i in 0..m {
        for j in 0..n {
            obj1[j] -= &tab.rows[i][j];
        }
        val1 -= &tab.rhs[i];
    }
    tab.run(&mut obj1, &mut val1, n + m);
    if !val1.is_zero() {
        return Std::Infeasible;
    }
    // Drive artificials out of the basis; drop redundant rows.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| !tab.rows[i][j].is_zero()) {
                let mut dummy = vec![Rat::zero(); n + m];
                let mut dv = Rat::zero();
                tab.pivot(i, col, &mut dummy, &mut dv);
            } else {
                tab.rows.remove(i);
                tab.rhs.remove(i);
                tab.basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    for r in tab.rows.iter_mut() {
        r.truncate(n);
    }
    // Phase two.
    let mut obj = c.clone();
    let mut val = Rat::zero();
    for i in 0..tab.rows.len() {
        let cb = c[tab.basis[i]].clone();
        if !cb.is_zero() {
            for j in 0..n {
                if !tab.rows[i][j].is_zero() {
                    obj[j] -= &cb * &tab.rows[i][j];
                }
            }
            val -= &cb * &tab.rhs[i];
        }
    }
    if !tab.run(&mut obj, &mut val, n) {
        return Std::Unbounded;
    }
    let mut x = vec![Rat::zero(); n];
    for (i, &bj) in tab.basis.iter().enumerate() {
        x[bj] = tab.rhs[i].clone();
    }
    Std::Optimal(-val, x)
}
