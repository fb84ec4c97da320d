//! Bijection between constrained parameters and ℝ^k.
//!
//! σ ↦ ln σ, γ ↦ atanh γ (epsilon-skew) or ln γ (inverse-scale), δ ↦ ln δ.

use std::f64::consts::LN_2;

use super::{ModelSpec, ParameterVector};
use crate::distributions::SkewParameterisation;
use crate::error::{Error, Result};

pub fn to_unconstrained(theta: &ParameterVector, spec: &ModelSpec) -> Vec<f64> {
    let mut v = theta.beta.clone();
    v.push(theta.sigma.ln());
    if spec.two_piece {
        v.push(match spec.parameterisation {
            SkewParameterisation::EpsilonSkew => theta.gamma.atanh(),
            SkewParameterisation::InverseScale => theta.gamma.ln(),
        });
    }
    if let Some(d) = theta.delta {
        v.push(d.ln());
    }
    v
}

/// Inverse map, returning the parameters and `ln |∂θ/∂u|`.
pub fn from_unconstrained(u: &[f64], p: usize, spec: &ModelSpec) -> Result<(ParameterVector, f64)> {
    let dim = spec.n_params(p);
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.len(),
        });
    }
    Ok(map_back(u, p, spec))
}

pub(crate) fn map_back(u: &[f64], p: usize, spec: &ModelSpec) -> (ParameterVector, f64) {
    let mut log_jac = u[p];
    let sigma = u[p].exp();
    let mut k = p + 1;
    let gamma = if spec.two_piece {
        let g = u[k];
        k += 1;
        match spec.parameterisation {
            SkewParameterisation::EpsilonSkew => {
                // ln(1 - tanh² g) = 2 (ln 2 - |g| - ln(1 + e^{-2|g|}))
                let ag = g.abs();
                log_jac += 2.0 * (LN_2 - ag - (-2.0 * ag).exp().ln_1p());
                g.tanh()
            }
            SkewParameterisation::InverseScale => {
                log_jac += g;
                g.exp()
            }
        }
    } else {
        spec.parameterisation.symmetry_point()
    };
    let delta = if spec.has_free_delta() {
        log_jac += u[k];
        Some(u[k].exp())
    } else {
        None
    };
    (
        ParameterVector {
            beta: u[..p].to_vec(),
            sigma,
            gamma,
            delta,
        },
        log_jac,
    )
}
