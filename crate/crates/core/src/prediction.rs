//! Posterior-predictive distributions on the time scale and residual life
//! of right-censored subjects.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{TwoPiece, TwoPieceParams};
use crate::error::{Error, Result};
use crate::model::{Dataset, ModelSpec, ParameterVector};
use crate::sampler::Chain;

pub use crate::model::CentringRule;

/// Largest residual-life quantile searched, as a multiple of the censoring
/// time.
pub const BRACKET_LIMIT: f64 = 1e6;
const QUANTILE_RTOL: f64 = 1e-8;

fn intercept_index(chain: &Chain) -> Option<usize> {
    chain.index_of("intercept")
}

fn draw_error(theta: &ParameterVector, spec: &ModelSpec, location: f64) -> Result<TwoPiece> {
    TwoPiece::new(TwoPieceParams {
        mu: location,
        sigma: theta.sigma,
        gamma: theta.gamma,
        baseline: theta.baseline(spec),
        parameterisation: spec.parameterisation,
    })
}

/// Shifts the intercept of every draw so the error distribution is centred
/// at `rule`. Converting back to the mode undoes an earlier median shift.
pub fn recentre(chain: &Chain, spec: &ModelSpec, rule: CentringRule) -> Result<Chain> {
    let j = intercept_index(chain)
        .ok_or_else(|| Error::Prediction("re-centring needs an 'intercept' column".into()))?;
    if chain.centring == rule {
        return Ok(chain.clone());
    }
    let p = chain
        .index_of("sigma")
        .ok_or_else(|| Error::Prediction("chain has no sigma column".into()))?;
    let sign = match rule {
        CentringRule::Median => 1.0,
        CentringRule::Mode => -1.0,
    };
    let draws = chain
        .draws
        .iter()
        .map(|row| {
            let theta = ParameterVector::from_flat(row, p, spec)?;
            let m = draw_error(&theta, spec, 0.0)?.median();
            let mut out = row.clone();
            out[j] += sign * m;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(Chain {
        draws,
        centring: rule,
        ..chain.clone()
    })
}

/// Per-draw ingredients of the predictive distribution: coefficients and
/// the error law in the chain's own centring.
#[derive(Debug, Clone)]
pub struct Predictive {
    draws: Vec<(Vec<f64>, TwoPiece)>,
}

impl Predictive {
    pub fn new(chain: &Chain, spec: &ModelSpec) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::Prediction("empty chain".into()));
        }
        let p = chain
            .index_of("sigma")
            .ok_or_else(|| Error::Prediction("chain has no sigma column".into()))?;
        let j = intercept_index(chain);
        if chain.centring == CentringRule::Median && j.is_none() {
            return Err(Error::Prediction(
                "median-centred chain without intercept".into(),
            ));
        }
        let draws = chain
            .draws
            .iter()
            .map(|row| {
                let theta = ParameterVector::from_flat(row, p, spec)?;
                let law = draw_error(&theta, spec, 0.0)?;
                let loc = match chain.centring {
                    CentringRule::Mode => 0.0,
                    CentringRule::Median => -law.median(),
                };
                Ok((theta.beta.clone(), draw_error(&theta, spec, loc)?))
            })
            .collect::<Result<_>>()?;
        Ok(Predictive { draws })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        let p = self.draws[0].0.len();
        if x.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Monte Carlo average of the per-draw CDF of `log t`.
    pub fn cdf(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        if t.is_nan() || t < 0.0 {
            return Err(Error::Prediction(format!(
                "time must be non-negative, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let y = t.ln();
        let s: f64 = self
            .draws
            .iter()
            .map(|(b, law)| law.cdf(y - b.iter().zip(x).map(|(u, v)| u * v).sum::<f64>()))
            .sum();
        Ok(s / self.draws.len() as f64)
    }

    /// Averaged survival of `log t`, computed from upper tails so that far
    /// right tails keep their precision.
    fn sf(&self, t: f64, x: &[f64]) -> f64 {
        let y = t.ln();
        let s: f64 = self
            .draws
            .iter()
            .map(|(b, law)| {
                law.ln_sf(y - b.iter().zip(x).map(|(u, v)| u * v).sum::<f64>())
                    .exp()
            })
            .sum();
        s / self.draws.len() as f64
    }

    /// `P(T > t | T > censored_at)` under the predictive distribution.
    pub fn residual_survival(&self, t: f64, censored_at: f64, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        if !(censored_at > 0.0 && censored_at.is_finite()) {
            return Err(Error::Prediction(format!(
                "censoring time must be positive, got {censored_at}"
            )));
        }
        if !(t >= censored_at) {
            return Err(Error::Prediction(format!(
                "t = {t} precedes the censoring time {censored_at}"
            )));
        }
        let s0 = self.sf(censored_at, x);
        if !(s0 > 0.0) {
            return Err(Error::Prediction(format!(
                "predictive survival beyond {censored_at} is numerically zero"
            )));
        }
        if t == censored_at {
            return Ok(1.0);
        }
        Ok((self.sf(t, x) / s0).clamp(0.0, 1.0))
    }

    /// Time `t > censored_at` at which the residual-life CDF reaches `p`.
    pub fn residual_quantile(&self, p: f64, censored_at: f64, x: &[f64]) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Prediction(format!(
                "probability must lie in (0, 1), got {p}"
            )));
        }
        let target = 1.0 - p;
        let surv = |t: f64| self.residual_survival(t, censored_at, x);
        surv(censored_at)?;
        let mut lo = censored_at;
        let mut hi = censored_at * 2.0;
        while surv(hi)? > target {
            lo = hi;
            hi *= 2.0;
            if hi > BRACKET_LIMIT * censored_at {
                let left = surv(BRACKET_LIMIT * censored_at)?;
                return Err(Error::Prediction(format!(
                    "residual-life quantile {p} lies beyond {:.3e}; survival there is still {left:.3e}",
                    BRACKET_LIMIT * censored_at
                )));
            }
        }
        while hi - lo > QUANTILE_RTOL * hi {
            let mid = 0.5 * (lo + hi);
            if surv(mid)? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

pub fn predictive_cdf(t: f64, x: &[f64], chain: &Chain, spec: &ModelSpec) -> Result<f64> {
    Predictive::new(chain, spec)?.cdf(t, x)
}

pub fn residual_life_survival(
    t: f64,
    censored_at: f64,
    x: &[f64],
    chain: &Chain,
    spec: &ModelSpec,
) -> Result<f64> {
    Predictive::new(chain, spec)?.residual_survival(t, censored_at, x)
}

pub fn residual_life_quantile(
    p: f64,
    censored_at: f64,
    x: &[f64],
    chain: &Chain,
    spec: &ModelSpec,
) -> Result<f64> {
    Predictive::new(chain, spec)?.residual_quantile(p, censored_at, x)
}

/// A right-censored subject for residual-life prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subject {
    pub label: String,
    /// Censoring time on the original scale.
    pub censored_at: f64,
    pub x: Vec<f64>,
}

/// The first `k` right-censored rows of an AFT dataset, in file order.
pub fn censored_subjects(data: &Dataset, k: usize) -> Vec<Subject> {
    use crate::model::CensoredObservation::Right;
    (0..data.n())
        .filter_map(|i| match data.responses()[i] {
            Right { y } => Some((i, y)),
            _ => None,
        })
        .take(k)
        .enumerate()
        .map(|(s, (i, y))| Subject {
            label: format!("P{}", s + 1),
            censored_at: y.exp(),
            x: data.row(i).to_vec(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub probs: Vec<f64>,
    pub subjects: Vec<String>,
    /// One row per subject.
    pub values: Vec<Vec<f64>>,
}

/// Residual-life quantiles for each subject, computed in parallel.
pub fn residual_life_table(
    pred: &Predictive,
    subjects: &[Subject],
    probs: &[f64],
) -> Result<QuantileTable> {
    let values = subjects
        .par_iter()
        .map(|s| {
            probs
                .iter()
                .map(|&p| pred.residual_quantile(p, s.censored_at, &s.x))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(QuantileTable {
        probs: probs.to_vec(),
        subjects: subjects.iter().map(|s| s.label.clone()).collect(),
        values,
    })
}

fn prob_label(p: f64) -> String {
    format!("q{}", 100.0 * p)
}

impl QuantileTable {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["subject".to_string()];
        header.extend(self.probs.iter().map(|&p| prob_label(p)));
        out.write_record(&header)?;
        for (s, row) in self.subjects.iter().zip(&self.values) {
            let mut rec = vec![s.clone()];
            rec.extend(row.iter().map(|v| format!("{v:.4}")));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{:<8}", "subject");
        for &p in &self.probs {
            s.push_str(&format!("{:>10}", format!("{}%", 100.0 * p)));
        }
        s.push('\n');
        for (name, row) in self.subjects.iter().zip(&self.values) {
            s.push_str(&format!("{name:<8}"));
            for v in row {
                s.push_str(&format!("{v:>10.1}"));
            }
            s.push('\n');
        }
        s
    }
}
