use super::likelihood::error_distribution;
use super::prior::logposterior_unchecked;
use super::transform::{map_back, to_unconstrained};
use super::{Dataset, ModelSpec, ParameterVector};
use crate::error::Result;

/// A dataset paired with a model: the target the sampler and the
/// optimiser work on.
#[derive(Debug, Clone, Copy)]
pub struct Posterior<'a> {
    pub data: &'a Dataset,
    pub spec: &'a ModelSpec,
}

impl<'a> Posterior<'a> {
    pub fn new(data: &'a Dataset, spec: &'a ModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Posterior { data, spec })
    }

    pub fn dim(&self) -> usize {
        self.spec.n_params(self.data.p())
    }

    pub fn parameter_names(&self) -> Vec<String> {
        self.spec.parameter_names(self.data.names())
    }

    pub fn to_unconstrained(&self, theta: &ParameterVector) -> Vec<f64> {
        to_unconstrained(theta, self.spec)
    }

    pub fn from_unconstrained(&self, u: &[f64]) -> ParameterVector {
        map_back(u, self.data.p(), self.spec).0
    }

    fn eval(&self, theta: &ParameterVector, with_prior: bool) -> f64 {
        if !(theta.sigma > 0.0 && theta.sigma.is_finite())
            || !self.spec.parameterisation.contains(theta.gamma)
        {
            return f64::NEG_INFINITY;
        }
        if let Some(d) = theta.delta {
            if !(d > 0.0 && d.is_finite()) {
                return f64::NEG_INFINITY;
            }
        }
        if theta.beta.iter().any(|b| !b.is_finite()) {
            return f64::NEG_INFINITY;
        }
        let Ok(dist) = error_distribution(theta, self.spec) else {
            return f64::NEG_INFINITY;
        };
        let v = if with_prior {
            logposterior_unchecked(theta, &dist, self.data, self.spec)
        } else {
            super::likelihood::loglik_unchecked(&dist, &theta.beta, self.data)
        };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// Log-posterior on the constrained scale; `-inf` outside the support.
    pub fn ln_posterior(&self, theta: &ParameterVector) -> f64 {
        self.eval(theta, true)
    }

    pub fn ln_likelihood(&self, theta: &ParameterVector) -> f64 {
        self.eval(theta, false)
    }

    /// Log-posterior density of the unconstrained vector (Jacobian included).
    pub fn ln_density_unconstrained(&self, u: &[f64]) -> f64 {
        let (theta, log_jac) = map_back(u, self.data.p(), self.spec);
        let v = self.eval(&theta, true);
        if v == f64::NEG_INFINITY {
            v
        } else {
            v + log_jac
        }
    }

    /// Log-likelihood as a function of the unconstrained vector.
    pub fn ln_likelihood_unconstrained(&self, u: &[f64]) -> f64 {
        self.eval(&map_back(u, self.data.p(), self.spec).0, false)
    }

    /// Default starting point: least-squares β, residual standard deviation
    /// for σ, γ at the symmetry point and δ = 5.
    pub fn initial_point(&self) -> Result<ParameterVector> {
        let (beta, sd) = self.data.least_squares_start()?;
        Ok(ParameterVector {
            beta,
            sigma: sd,
            gamma: self.spec.parameterisation.symmetry_point(),
            delta: self.spec.has_free_delta().then_some(5.0),
        })
    }
}
