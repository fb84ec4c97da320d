//! Importance-sampling estimate of the marginal likelihood.
//!
//! The proposal is a multivariate Student-t with 5 degrees of freedom,
//! centred at the posterior mean of the unconstrained draws with twice their
//! covariance as scale matrix.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg;

const PROPOSAL_DF: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub log_marginal: f64,
    /// Monte Carlo standard error of `log_marginal` (delta method).
    pub log_se: f64,
    pub ess: f64,
    pub n_is: usize,
    /// False when the weight ESS falls below 1% of `n_is`.
    pub reliable: bool,
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// IS evidence for an arbitrary log-density on ℝ^d, with the proposal
/// fitted to `draws` (rows on the same scale as `target`).
pub fn log_marginal_is_target<F>(
    draws: &[Vec<f64>],
    target: F,
    n_is: usize,
    seed: u64,
) -> Result<EvidenceEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = draws.first().map_or(0, Vec::len);
    if draws.len() < 2 * d + 2 || d == 0 {
        return Err(Error::Selection(format!(
            "{} draws are too few to fit a {d}-dimensional proposal",
            draws.len()
        )));
    }
    if n_is < 2 {
        return Err(Error::Selection("n_is must be at least 2".into()));
    }
    let (mean, cov) = linalg::mean_cov(draws);
    let scale = cov * 2.0;
    let chol = scale
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Selection("posterior covariance of the draws is not positive definite; the chain is too short or has not mixed".into()))?;
    let l = chol.l();
    let log_det = 2.0 * l.diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let nu = PROPOSAL_DF;
    let df = d as f64;
    let log_norm =
        ln_gamma((nu + df) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * df * (nu * PI).ln() - 0.5 * log_det;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = ChiSquared::new(nu).map_err(|e| Error::Selection(e.to_string()))?;
    let mut points = Vec::with_capacity(n_is);
    let mut log_q = Vec::with_capacity(n_is);
    for _ in 0..n_is {
        let z = DVector::from_iterator(d, (0..d).map(|_| StandardNormal.sample(&mut rng)));
        let w: f64 = chi.sample(&mut rng);
        let step = &l * &z * (nu / w).sqrt();
        let u = &mean + &step;
        // Mahalanobis distance of the step: |L⁻¹ step|² = (ν/w)|z|²
        let maha = z.norm_squared() * nu / w;
        log_q.push(log_norm - 0.5 * (nu + df) * (maha / nu).ln_1p());
        points.push(u.iter().copied().collect::<Vec<f64>>());
    }
    use rayon::prelude::*;
    let log_w: Vec<f64> = points
        .par_iter()
        .zip(log_q.par_iter())
        .map(|(u, lq)| {
            let lp = target(u);
            if lp.is_finite() {
                lp - lq
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();

    let n = n_is as f64;
    let lse = log_sum_exp(&log_w);
    if !lse.is_finite() {
        return Err(Error::Selection("all importance weights are zero".into()));
    }
    let log_marginal = lse - n.ln();
    // normalised weights relative to the mean weight
    let rel: Vec<f64> = log_w.iter().map(|lw| (lw - log_marginal).exp()).collect();
    let var = rel.iter().map(|r| (r - 1.0).powi(2)).sum::<f64>() / (n - 1.0);
    let log_se = (var / n).sqrt();
    let sum_sq: f64 = rel.iter().map(|r| r * r).sum();
    let ess = n * n / sum_sq;
    Ok(EvidenceEstimate {
        log_marginal,
        log_se,
        ess,
        n_is,
        reliable: ess >= 0.01 * n,
    })
}

/// Log-density of a multivariate Student-t, exposed for tests.
pub fn mvt_logpdf(x: &[f64], mean: &[f64], scale: &DMatrix<f64>, nu: f64) -> Option<f64> {
    let d = x.len();
    let chol = scale.clone().cholesky()?;
    let diff = DVector::from_iterator(d, x.iter().zip(mean).map(|(a, b)| a - b));
    let sol = chol.l().solve_lower_triangular(&diff)?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let df = d as f64;
    Some(
        ln_gamma((nu + df) / 2.0)
            - ln_gamma(nu / 2.0)
            - 0.5 * df * (nu * PI).ln()
            - 0.5 * log_det
            - 0.5 * (nu + df) * (sol.norm_squared() / nu).ln_1p(),
    )
}
