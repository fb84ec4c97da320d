//! Small dense linear-algebra helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Numerical rank from a column-pivoted QR, counting diagonal entries of R
/// above `rel_tol * |R[0,0]|`.
pub fn rank(x: &DMatrix<f64>, rel_tol: f64) -> usize {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0;
    }
    let r = x.clone().col_piv_qr().unpack_r();
    let k = r.nrows().min(r.ncols());
    let lead = r[(0, 0)].abs();
    if lead == 0.0 {
        return 0;
    }
    (0..k).filter(|&i| r[(i, i)].abs() > rel_tol * lead).count()
}

/// Ordinary least squares. Returns the coefficients and residual vector.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.len(),
        });
    }
    let svd = x.clone().svd(true, true);
    let beta = svd
        .solve(y, 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let resid = y - x * &beta;
    Ok((beta, resid))
}

/// Sample mean and covariance of the rows of `rows` (unbiased).
pub fn mean_cov(rows: &[Vec<f64>]) -> (DVector<f64>, DMatrix<f64>) {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut mean = DVector::zeros(d);
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    mean /= n as f64;
    let mut cov = DMatrix::zeros(d, d);
    for r in rows {
        for i in 0..d {
            let di = r[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (r[j] - mean[j]);
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for i in 0..d {
        for j in 0..=i {
            cov[(i, j)] /= denom;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    (mean, cov)
}
