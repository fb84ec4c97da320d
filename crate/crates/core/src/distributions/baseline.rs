//! Symmetric standardised baseline densities with mode at zero.
//!
//! Every baseline here is a scale mixture of normals. They are evaluated
//! through closed forms (or regularised incomplete beta functions for the
//! Student-t) instead of the mixing integral.

use libm::erfc;
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg, ln_beta};
use statrs::function::erf::erfc_inv;
use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Baseline family. The Student-t carries its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BaselineKind {
    Normal,
    Laplace,
    Logistic,
    StudentT { df: f64 },
}

impl BaselineKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BaselineKind::StudentT { df } if !(df > 0.0 && df.is_finite()) => Err(Error::Domain {
                name: "delta",
                value: df,
                domain: "(0, inf)",
            }),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaselineKind::Normal => "normal",
            BaselineKind::Laplace => "laplace",
            BaselineKind::Logistic => "logistic",
            BaselineKind::StudentT { .. } => "student-t",
        }
    }

    pub fn is_student_t(&self) -> bool {
        matches!(self, BaselineKind::StudentT { .. })
    }

    /// Same family with a new shape value; a no-op for shape-free families.
    pub fn with_df(&self, df: f64) -> BaselineKind {
        match self {
            BaselineKind::StudentT { .. } => BaselineKind::StudentT { df },
            other => *other,
        }
    }
}

/// Evaluator for a baseline with its normalising constant precomputed.
#[derive(Debug, Clone, Copy)]
pub struct Baseline {
    kind: BaselineKind,
    // ln Γ((ν+1)/2) - ln Γ(ν/2) - ½ ln(νπ) for the Student-t, unused otherwise
    t_ln_norm: f64,
}

impl Baseline {
    pub fn new(kind: BaselineKind) -> Result<Self> {
        kind.validate()?;
        let t_ln_norm = match kind {
            BaselineKind::StudentT { df } => -ln_beta(0.5 * df, 0.5) - 0.5 * df.ln(),
            _ => 0.0,
        };
        Ok(Baseline { kind, t_ln_norm })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn ln_pdf(&self, u: f64) -> f64 {
        match self.kind {
            BaselineKind::Normal => -0.5 * u * u - LN_SQRT_2PI,
            BaselineKind::Laplace => -u.abs() - LN_2,
            BaselineKind::Logistic => {
                let a = -u.abs();
                a - 2.0 * a.exp().ln_1p()
            }
            BaselineKind::StudentT { df } => {
                self.t_ln_norm - 0.5 * (df + 1.0) * (u * u / df).ln_1p()
            }
        }
    }

    pub fn pdf(&self, u: f64) -> f64 {
        self.ln_pdf(u).exp()
    }

    pub fn cdf(&self, u: f64) -> f64 {
        if u > 0.0 {
            1.0 - self.lower_tail(-u)
        } else {
            self.lower_tail(u)
        }
    }

    /// F(u) for u <= 0, where no cancellation occurs.
    fn lower_tail(&self, u: f64) -> f64 {
        match self.kind {
            BaselineKind::Normal => 0.5 * erfc(-u / SQRT_2),
            BaselineKind::Laplace => 0.5 * u.exp(),
            BaselineKind::Logistic => {
                let e = u.exp();
                e / (1.0 + e)
            }
            BaselineKind::StudentT { df } => {
                if u == f64::NEG_INFINITY {
                    return 0.0;
                }
                0.5 * beta_reg(0.5 * df, 0.5, df / (df + u * u))
            }
        }
    }

    /// ln F(u), accurate far into the lower tail.
    pub fn ln_cdf(&self, u: f64) -> f64 {
        if u > 0.0 {
            return (-self.lower_tail(-u)).ln_1p();
        }
        match self.kind {
            BaselineKind::Normal if u < -30.0 => {
                let r = 1.0 / (u * u);
                let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
                -0.5 * u * u - (-u).ln() - LN_SQRT_2PI + series.ln()
            }
            BaselineKind::Laplace => u - LN_2,
            BaselineKind::Logistic => -(u.exp().ln_1p()) + u,
            _ => self.lower_tail(u).ln(),
        }
    }

    /// Inverse distribution function on (0, 1).
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        if p > 0.5 {
            return -self.lower_quantile(1.0 - p);
        }
        self.lower_quantile(p)
    }

    fn lower_quantile(&self, p: f64) -> f64 {
        match self.kind {
            BaselineKind::Laplace => (2.0 * p).ln(),
            BaselineKind::Logistic => p.ln() - (-p).ln_1p(),
            BaselineKind::Normal => {
                let x0 = -SQRT_2 * erfc_inv(2.0 * p);
                self.polish(x0, p)
            }
            BaselineKind::StudentT { df } => {
                let y = inv_beta_reg(0.5 * df, 0.5, 2.0 * p);
                let x0 = -(df * (1.0 - y) / y).sqrt();
                self.polish(x0, p)
            }
        }
    }

    // Newton refinement of F(x) = p in the lower tail, done in log space so
    // the step stays well-scaled for tiny p.
    fn polish(&self, mut x: f64, p: f64) -> f64 {
        if !x.is_finite() {
            return x;
        }
        let ln_p = p.ln();
        for _ in 0..4 {
            let ln_f = self.ln_cdf(x);
            let resid = ln_f - ln_p;
            if resid.abs() < 1e-15 {
                break;
            }
            // d/dx ln F = f / F
            let slope = (self.ln_pdf(x) - ln_f).exp();
            if !(slope > 0.0 && slope.is_finite()) {
                break;
            }
            let step = resid / slope;
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        x
    }

    /// Density value at the mode.
    pub fn pdf_at_zero(&self) -> f64 {
        match self.kind {
            BaselineKind::Normal => 1.0 / (2.0 * PI).sqrt(),
            _ => self.pdf(0.0),
        }
    }
}
