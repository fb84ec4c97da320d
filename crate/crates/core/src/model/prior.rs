use statrs::function::beta::ln_beta;

use super::likelihood::{error_distribution, loglik_unchecked};
use super::{Dataset, ModelSpec, ParameterVector};
use crate::distributions::SkewParameterisation;
use crate::error::{Error, Result};

/// Normalised log-density of the skewness prior induced by a
/// `Beta(a0, b0)` law on `a(γ) / (a(γ) + b(γ))`.
///
/// For the epsilon-skew parameterisation with `a0 = b0 = ½` this is
/// `(1/π)(1 - γ²)^{-1/2}`; with `a0 = b0 = 1` it is uniform on (-1, 1).
pub fn gamma_logprior(
    gamma: f64,
    a0: f64,
    b0: f64,
    parameterisation: SkewParameterisation,
) -> Result<f64> {
    parameterisation.check(gamma)?;
    if !(a0 > 0.0 && b0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma prior needs a0, b0 > 0, got ({a0}, {b0})"
        )));
    }
    Ok(gamma_logprior_unchecked(gamma, a0, b0, parameterisation))
}

pub(crate) fn gamma_logprior_unchecked(
    gamma: f64,
    a0: f64,
    b0: f64,
    par: SkewParameterisation,
) -> f64 {
    let (a, b) = par.ab_unchecked(gamma);
    let (da, db) = par.ab_derivative(gamma);
    (da * b - a * db).abs().ln() - (a0 + b0) * (a + b).ln()
        + (a0 - 1.0) * a.ln()
        + (b0 - 1.0) * b.ln()
        - ln_beta(a0, b0)
}

/// Log-density `ln(2dδ) - 3 ln(δ + d)` of the degrees-of-freedom prior,
/// whose mode is at `δ = d/2`.
pub fn delta_logprior(delta: f64, d: f64) -> Result<f64> {
    if !(delta > 0.0 && d > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta prior needs delta > 0 and d > 0, got ({delta}, {d})"
        )));
    }
    Ok((2.0 * d * delta).ln() - 3.0 * (delta + d).ln())
}

/// Unnormalised log-posterior: log-likelihood plus `-q ln σ` plus the proper
/// priors on γ (two-piece models) and δ (free Student-t shape).
pub fn logposterior(theta: &ParameterVector, data: &Dataset, spec: &ModelSpec) -> Result<f64> {
    theta.validate(data.p(), spec)?;
    spec.validate()?;
    let dist = error_distribution(theta, spec)?;
    Ok(logposterior_unchecked(theta, &dist, data, spec))
}

pub(crate) fn log_prior_unchecked(theta: &ParameterVector, spec: &ModelSpec) -> f64 {
    let mut lp = -spec.q * theta.sigma.ln();
    if spec.two_piece {
        lp += gamma_logprior_unchecked(theta.gamma, spec.a0, spec.b0, spec.parameterisation);
    }
    if let Some(delta) = theta.delta {
        lp += (2.0 * spec.d * delta).ln() - 3.0 * (delta + spec.d).ln();
    }
    lp
}

pub(crate) fn logposterior_unchecked(
    theta: &ParameterVector,
    dist: &crate::distributions::TwoPiece,
    data: &Dataset,
    spec: &ModelSpec,
) -> f64 {
    let lp = log_prior_unchecked(theta, spec);
    if !lp.is_finite() {
        return f64::NEG_INFINITY;
    }
    let ll = loglik_unchecked(dist, &theta.beta, data);
    if ll == f64::NEG_INFINITY {
        return ll;
    }
    ll + lp
}
