use super::{CensoredObservation, Dataset, ModelSpec, ParameterVector};
use crate::distributions::{TwoPiece, TwoPieceParams};
use crate::error::Result;

pub(crate) fn error_distribution(theta: &ParameterVector, spec: &ModelSpec) -> Result<TwoPiece> {
    TwoPiece::new(TwoPieceParams {
        mu: 0.0,
        sigma: theta.sigma,
        gamma: theta.gamma,
        baseline: theta.baseline(spec),
        parameterisation: spec.parameterisation,
    })
}

/// Log-likelihood contribution of a single observation given its linear
/// predictor: a log-density for exact responses, a log-probability otherwise.
#[inline]
pub(crate) fn contribution(dist: &TwoPiece, obs: &CensoredObservation, eta: f64) -> f64 {
    match *obs {
        CensoredObservation::Exact { y } => dist.ln_pdf(y - eta),
        CensoredObservation::Right { y } => dist.ln_sf(y - eta),
        CensoredObservation::Left { y } => dist.ln_cdf(y - eta),
        CensoredObservation::Interval { lower, upper } => {
            dist.ln_interval(lower - eta, upper - eta)
        }
    }
}

/// Sum of per-observation contributions; `-inf` as soon as any censored
/// contribution carries zero probability.
pub fn loglikelihood(theta: &ParameterVector, data: &Dataset, spec: &ModelSpec) -> Result<f64> {
    theta.validate(data.p(), spec)?;
    let dist = error_distribution(theta, spec)?;
    Ok(loglik_unchecked(&dist, &theta.beta, data))
}

pub(crate) fn loglik_unchecked(dist: &TwoPiece, beta: &[f64], data: &Dataset) -> f64 {
    let mut total = 0.0;
    for (i, obs) in data.responses().iter().enumerate() {
        let c = contribution(dist, obs, data.linear_predictor(i, beta));
        if c == f64::NEG_INFINITY || c.is_nan() {
            return f64::NEG_INFINITY;
        }
        total += c;
    }
    total
}

/// Per-observation log-likelihood contributions.
pub fn log_contributions(
    theta: &ParameterVector,
    data: &Dataset,
    spec: &ModelSpec,
) -> Result<Vec<f64>> {
    theta.validate(data.p(), spec)?;
    let dist = error_distribution(theta, spec)?;
    Ok(data
        .responses()
        .iter()
        .enumerate()
        .map(|(i, obs)| contribution(&dist, obs, data.linear_predictor(i, &theta.beta)))
        .collect())
}
