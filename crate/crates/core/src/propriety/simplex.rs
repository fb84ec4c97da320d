//! Dense two-phase simplex for `min cᵀz  s.t.  A z ≤ b, z ≥ 0`, using
//! Bland's rule so degenerate pivots cannot cycle. Meant for the handful of
//! rows and columns that arise from interval-censored designs.

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpStatus {
    Optimal { z: Vec<f64>, value: f64 },
    Infeasible { phase_one_value: f64 },
    Unbounded,
    IterationLimit,
}

struct Tableau {
    // rows: m constraints, then objective row; last column is the rhs
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the objective in the last row, restricted
    /// to columns `< allowed`. Returns `None` on the iteration limit,
    /// `Some(false)` when unbounded.
    fn optimise(&mut self, allowed: usize) -> Option<bool> {
        let m = self.basis.len();
        let rhs = self.n_cols;
        for _ in 0..50_000 {
            // Bland: lowest-index column with negative reduced cost
            let Some(c) = (0..allowed).find(|&j| self.t[m][j] < -EPS) else {
                return Some(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][rhs] / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - EPS
                                || (ratio <= br + EPS && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Some(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        None
    }
}

/// Solves `min cᵀz` subject to `A z ≤ b`, `z ≥ 0`.
pub fn solve(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpStatus {
    let m = a.len();
    let n = c.len();
    // columns: n originals, m slacks, m artificials, then rhs
    let n_cols = n + 2 * m;
    let mut t = vec![vec![0.0; n_cols + 1]; m + 1];
    let mut basis = vec![0; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = sign;
        t[i][n + m + i] = 1.0;
        t[i][n_cols] = sign * b[i];
        basis[i] = n + m + i;
    }
    // phase one: minimise the sum of artificials
    for i in 0..m {
        for j in 0..=n_cols {
            if j < n + m || j == n_cols {
                t[m][j] -= t[i][j];
            }
        }
    }
    let mut tab = Tableau { t, basis, n_cols };
    if tab.optimise(n + m).is_none() {
        return LpStatus::IterationLimit;
    }
    let phase_one_value = -tab.t[m][n_cols];
    let scale = 1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if phase_one_value > 1e-9 * scale {
        return LpStatus::Infeasible { phase_one_value };
    }
    // drive remaining artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] >= n + m {
            if let Some(c) = (0..n + m).find(|&j| tab.t[r][j].abs() > EPS) {
                tab.pivot(r, c);
            }
        }
    }
    // phase two objective
    for j in 0..=n_cols {
        tab.t[m][j] = if j < n { c[j] } else { 0.0 };
    }
    for r in 0..m {
        let bj = tab.basis[r];
        let f = tab.t[m][bj];
        if f != 0.0 {
            for j in 0..=n_cols {
                tab.t[m][j] -= f * tab.t[r][j];
            }
        }
    }
    match tab.optimise(n + m) {
        None => LpStatus::IterationLimit,
        Some(false) => LpStatus::Unbounded,
        Some(true) => {
            let mut z = vec![0.0; n];
            for r in 0..m {
                if tab.basis[r] < n {
                    z[tab.basis[r]] = tab.t[r][n_cols];
                }
            }
            let value = c.iter().zip(&z).map(|(a, b)| a * b).sum();
            LpStatus::Optimal { z, value }
        }
    }
}
