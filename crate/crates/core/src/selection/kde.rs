use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{gamma_logprior, ModelSpec};
use crate::sampler::{quantile_sorted, Chain};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeOptions {
    /// Fixed bandwidth; Silverman's rule when absent.
    pub bandwidth: Option<f64>,
    /// Reflect the kernel mass at the edges of the skewness domain.
    pub reflect: bool,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions {
            bandwidth: None,
            reflect: true,
        }
    }
}

/// `0.9 · min(sd, IQR/1.34) · n^{-1/5}`; falls back to the standard
/// deviation when the IQR is zero.
pub fn silverman_bandwidth(x: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    // rounding noise on a constant chain counts as zero spread
    if !(sd > 1e-12 * m.abs().max(1.0)) {
        return None;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Some(0.9 * spread * n.powf(-0.2))
}

/// Gaussian kernel density estimate at `x`, with reflection about any
/// finite `bounds`.
pub fn kde_at(samples: &[f64], x: f64, h: f64, bounds: (f64, f64), reflect: bool) -> f64 {
    let norm = 1.0 / ((2.0 * PI).sqrt() * h * samples.len() as f64);
    let k = |d: f64| (-0.5 * (d / h).powi(2)).exp();
    let mut s = 0.0;
    for &v in samples {
        s += k(x - v);
        if reflect {
            if bounds.0.is_finite() {
                s += k(x - (2.0 * bounds.0 - v));
            }
            if bounds.1.is_finite() {
                s += k(x - (2.0 * bounds.1 - v));
            }
        }
    }
    s * norm
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SavageDickey {
    /// Evidence for symmetry against the free-skewness model.
    pub bf01: f64,
    pub posterior_density: f64,
    pub prior_density: f64,
    pub bandwidth: f64,
}

/// Savage–Dickey ratio for the symmetric sub-model: posterior density of the
/// skewness parameter at its symmetry point over the prior density there.
pub fn savage_dickey_bf(
    chain: &Chain,
    spec: &ModelSpec,
    opts: &KdeOptions,
) -> Result<SavageDickey> {
    if !spec.two_piece {
        return Err(Error::Selection(
            "Savage-Dickey needs a model with free skewness".into(),
        ));
    }
    let j = chain
        .index_of("gamma")
        .ok_or_else(|| Error::Selection("chain has no gamma column".into()))?;
    let g = chain.column(j);
    let h = match opts.bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => {
            return Err(Error::Selection(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
        None => silverman_bandwidth(&g)
            .ok_or_else(|| Error::Selection("gamma draws have zero variance".into()))?,
    };
    let par = spec.parameterisation;
    let at = par.symmetry_point();
    let post = kde_at(&g, at, h, par.bounds(), opts.reflect);
    let prior = gamma_logprior(at, spec.a0, spec.b0, par)?.exp();
    Ok(SavageDickey {
        bf01: post / prior,
        posterior_density: post,
        prior_density: prior,
        bandwidth: h,
    })
}
