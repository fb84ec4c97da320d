//! Regression model with two-piece errors and censored responses.
//!
//! Errors are centred at their mode (zero); any re-centring happens after
//! sampling. The improper part of the prior is `σ^{-q}` with a flat prior
//! on the regression coefficients.

mod likelihood;
mod posterior;
mod prior;
mod transform;

pub use likelihood::{log_contributions, loglikelihood};
pub use posterior::Posterior;
pub use prior::{delta_logprior, gamma_logprior, logposterior};
pub use transform::{from_unconstrained, to_unconstrained};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{BaselineKind, SkewParameterisation};
use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance for the full-column-rank check on load.
pub const RANK_TOL: f64 = 1e-10;

/// One response on the model scale (log-time for AFT fits).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CensoredObservation {
    Exact { y: f64 },
    Right { y: f64 },
    Left { y: f64 },
    Interval { lower: f64, upper: f64 },
}

impl CensoredObservation {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match *self {
            CensoredObservation::Exact { y }
            | CensoredObservation::Right { y }
            | CensoredObservation::Left { y } => {
                if y.is_finite() {
                    Ok(())
                } else {
                    bad(format!("response must be finite, got {y}"))
                }
            }
            CensoredObservation::Interval { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    bad(format!(
                        "interval bounds must be finite, got [{lower}, {upper}]"
                    ))
                } else if lower >= upper {
                    bad(format!(
                        "interval requires lower < upper, got [{lower}, {upper}]"
                    ))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CensoredObservation::Exact { .. })
    }

    pub fn is_interval(&self) -> bool {
        matches!(self, CensoredObservation::Interval { .. })
    }

    /// A representative point value, used for initial least-squares fits.
    pub fn point(&self) -> f64 {
        match *self {
            CensoredObservation::Exact { y }
            | CensoredObservation::Right { y }
            | CensoredObservation::Left { y } => y,
            CensoredObservation::Interval { lower, upper } => 0.5 * (lower + upper),
        }
    }
}

/// Design matrix and censored responses.
#[derive(Debug, Clone)]
pub struct Dataset {
    design: DMatrix<f64>,
    // row-major copy for the likelihood loop
    rows: Vec<f64>,
    responses: Vec<CensoredObservation>,
    names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shapes, finiteness and full column rank.
    pub fn new(
        design: DMatrix<f64>,
        responses: Vec<CensoredObservation>,
        names: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = design.shape();
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter(
                "dataset needs n >= 1 and p >= 1".into(),
            ));
        }
        if responses.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: responses.len(),
            });
        }
        if names.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: names.len(),
            });
        }
        if design.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "design matrix has non-finite entries".into(),
            ));
        }
        for r in &responses {
            r.validate()?;
        }
        let rank = linalg::rank(&design, RANK_TOL);
        if rank < p {
            return Err(Error::RankDeficient { rank, cols: p });
        }
        let rows = (0..n)
            .flat_map(|i| (0..p).map(move |j| (i, j)))
            .map(|(i, j)| design[(i, j)])
            .collect();
        Ok(Dataset {
            design,
            rows,
            responses,
            names,
        })
    }

    /// Convenience constructor from row slices with generic column names.
    pub fn from_rows(rows: &[Vec<f64>], responses: Vec<CensoredObservation>) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidParameter("ragged design rows".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let design = DMatrix::from_row_slice(rows.len(), p, &flat);
        let names = (1..=p).map(|j| format!("beta{j}")).collect();
        Self::new(design, responses, names)
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    pub fn responses(&self) -> &[CensoredObservation] {
        &self.responses
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.p();
        &self.rows[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn linear_predictor(&self, i: usize, beta: &[f64]) -> f64 {
        self.row(i).iter().zip(beta).map(|(x, b)| x * b).sum()
    }

    pub fn n_exact(&self) -> usize {
        self.responses.iter().filter(|r| r.is_exact()).count()
    }

    pub fn n_interval(&self) -> usize {
        self.responses.iter().filter(|r| r.is_interval()).count()
    }

    pub fn n_censored(&self) -> usize {
        self.n() - self.n_exact()
    }

    /// Index of a column of all ones, if present.
    pub fn intercept_column(&self) -> Option<usize> {
        (0..self.p()).find(|&j| self.design.column(j).iter().all(|&v| v == 1.0))
    }

    /// Rows selected by `keep`, as a plain design matrix and response list.
    /// Unlike [`Dataset::new`] this does not require full rank.
    pub fn select(
        &self,
        keep: impl Fn(&CensoredObservation) -> bool,
    ) -> (DMatrix<f64>, Vec<CensoredObservation>) {
        let idx: Vec<usize> = (0..self.n())
            .filter(|&i| keep(&self.responses[i]))
            .collect();
        let p = self.p();
        let m = DMatrix::from_fn(idx.len(), p, |r, c| self.design[(idx[r], c)]);
        let resp = idx.iter().map(|&i| self.responses[i]).collect();
        (m, resp)
    }

    /// Least-squares fit of the point responses: coefficients and residual
    /// standard deviation.
    pub fn least_squares_start(&self) -> Result<(Vec<f64>, f64)> {
        let y = DVector::from_iterator(self.n(), self.responses.iter().map(|r| r.point()));
        let (beta, resid) = linalg::least_squares(&self.design, &y)?;
        let dof = self.n().saturating_sub(self.p()).max(1) as f64;
        let mut sd = (resid.norm_squared() / dof).sqrt();
        if !(sd > 0.0 && sd.is_finite()) {
            sd = 1.0;
        }
        Ok((beta.iter().copied().collect(), sd))
    }
}

/// Where the error distribution of a chain is centred. Chains come out of
/// the sampler mode-centred; median centring shifts the intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentringRule {
    #[default]
    Mode,
    Median,
}

impl std::str::FromStr for CentringRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mode" => Ok(CentringRule::Mode),
            "median" => Ok(CentringRule::Median),
            _ => Err(Error::Config(format!(
                "centring must be mode or median, got '{s}'"
            ))),
        }
    }
}

/// Error family, prior hyperparameters and parameterisation of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Baseline family; for the Student-t the carried `df` is the fixed value
    /// used when `free_delta` is off.
    pub baseline: BaselineKind,
    pub two_piece: bool,
    pub parameterisation: SkewParameterisation,
    /// Power of the `σ^{-q}` prior.
    pub q: f64,
    pub a0: f64,
    pub b0: f64,
    /// Hyperparameter of the degrees-of-freedom prior.
    pub d: f64,
    /// Treat the Student-t degrees of freedom as a parameter.
    pub free_delta: bool,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            baseline: BaselineKind::Normal,
            two_piece: true,
            parameterisation: SkewParameterisation::EpsilonSkew,
            q: 1.0,
            a0: 0.5,
            b0: 0.5,
            d: 10.0,
            free_delta: true,
        }
    }
}

impl ModelSpec {
    pub fn new(baseline: BaselineKind, two_piece: bool) -> Self {
        ModelSpec {
            baseline,
            two_piece,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.baseline.validate()?;
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err(Error::Domain {
                name: "q",
                value: self.q,
                domain: "[0, inf)",
            });
        }
        for (name, v) in [("a0", self.a0), ("b0", self.b0), ("d", self.d)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain {
                    name,
                    value: v,
                    domain: "(0, inf)",
                });
            }
        }
        Ok(())
    }

    pub fn has_free_delta(&self) -> bool {
        self.free_delta && self.baseline.is_student_t()
    }

    /// Number of free parameters for a design with `p` columns.
    pub fn n_params(&self, p: usize) -> usize {
        p + 1 + usize::from(self.two_piece) + usize::from(self.has_free_delta())
    }

    /// Short label such as "TP Logistic".
    pub fn label(&self) -> String {
        let fam = match self.baseline {
            BaselineKind::Normal => "Normal",
            BaselineKind::Laplace => "Laplace",
            BaselineKind::Logistic => "Logistic",
            BaselineKind::StudentT { .. } => "Student-t",
        };
        if self.two_piece {
            format!("TP {fam}")
        } else {
            fam.to_string()
        }
    }

    /// Parameter names in unconstrained-vector order.
    pub fn parameter_names(&self, beta_names: &[String]) -> Vec<String> {
        let mut names = beta_names.to_vec();
        names.push("sigma".into());
        if self.two_piece {
            names.push("gamma".into());
        }
        if self.has_free_delta() {
            names.push("delta".into());
        }
        names
    }
}

/// Model parameters `(β, σ, γ, δ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub beta: Vec<f64>,
    pub sigma: f64,
    /// Skewness; held at the symmetry point for symmetric models.
    pub gamma: f64,
    /// Degrees of freedom, present iff the spec has a free Student-t shape.
    pub delta: Option<f64>,
}

impl ParameterVector {
    pub fn validate(&self, p: usize, spec: &ModelSpec) -> Result<()> {
        if self.beta.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: self.beta.len(),
            });
        }
        if self.beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter("beta must be finite".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Domain {
                name: "sigma",
                value: self.sigma,
                domain: "(0, inf)",
            });
        }
        spec.parameterisation.check(self.gamma)?;
        match (spec.has_free_delta(), self.delta) {
            (true, Some(d)) if d > 0.0 && d.is_finite() => Ok(()),
            (true, Some(d)) => Err(Error::Domain {
                name: "delta",
                value: d,
                domain: "(0, inf)",
            }),
            (true, None) => Err(Error::InvalidParameter(
                "delta is required by the model".into(),
            )),
            (false, Some(_)) => Err(Error::InvalidParameter(
                "delta given for a model without free shape".into(),
            )),
            (false, None) => Ok(()),
        }
    }

    /// Baseline with the shape of this parameter vector applied.
    pub fn baseline(&self, spec: &ModelSpec) -> BaselineKind {
        match self.delta {
            Some(d) => spec.baseline.with_df(d),
            None => spec.baseline,
        }
    }

    /// Flat constrained-scale vector in the order of
    /// [`ModelSpec::parameter_names`].
    pub fn to_flat(&self, spec: &ModelSpec) -> Vec<f64> {
        let mut v = self.beta.clone();
        v.push(self.sigma);
        if spec.two_piece {
            v.push(self.gamma);
        }
        if let Some(d) = self.delta {
            v.push(d);
        }
        v
    }

    pub fn from_flat(v: &[f64], p: usize, spec: &ModelSpec) -> Result<Self> {
        let dim = spec.n_params(p);
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let mut k = p + 1;
        let gamma = if spec.two_piece {
            k += 1;
            v[p + 1]
        } else {
            spec.parameterisation.symmetry_point()
        };
        let delta = spec.has_free_delta().then(|| v[k]);
        Ok(ParameterVector {
            beta: v[..p].to_vec(),
            sigma: v[p],
            gamma,
            delta,
        })
    }
}
