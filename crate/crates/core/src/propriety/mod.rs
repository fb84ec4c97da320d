//! Sufficient conditions for a proper posterior under the `σ^{-q}` prior.
//!
//! Two routes are checked. With uncensored responses present, the
//! uncensored sub-sample alone must give a proper posterior (censored
//! contributions are probabilities and cannot break it). With no uncensored
//! responses, the interval-censored sub-sample is used instead, via a linear
//! feasibility problem on the log-scale intervals.

mod simplex;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use std::f64::consts::LN_2;

pub use simplex::{solve as simplex_solve, LpStatus};

use crate::distributions::{BaselineKind, SkewParameterisation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{CensoredObservation, Dataset, ModelSpec, RANK_TOL};
use crate::quadrature;

/// Default relative tolerance for deciding that `y` lies in the column space.
pub const COLUMN_SPACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Satisfied,
    Violated,
    /// Finite according to numerical integration; advisory only.
    NumericallyChecked,
    Unknown,
}

impl Verdict {
    fn rank(self) -> u8 {
        match self {
            Verdict::Satisfied => 0,
            Verdict::NumericallyChecked => 1,
            Verdict::Unknown => 2,
            Verdict::Violated => 3,
        }
    }

    /// Combines the verdicts of conditions that must all hold.
    pub fn all(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        verdicts
            .into_iter()
            .max_by_key(|v| v.rank())
            .unwrap_or(Verdict::Unknown)
    }

    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Satisfied | Verdict::NumericallyChecked)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::NumericallyChecked => "numerically checked",
            Verdict::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub verdict: Verdict,
    pub detail: String,
}

impl Check {
    fn new(verdict: Verdict, detail: impl Into<String>) -> Self {
        Check {
            verdict,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
    /// Whether the condition enters the overall verdict; necessary-only
    /// conditions are shown for information.
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProprietyReport {
    pub path: String,
    pub conditions: Vec<Condition>,
    pub overall: Verdict,
    pub note: String,
}

impl ProprietyReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("posterior propriety: {} ({})\n", self.overall, self.path);
        for c in &self.conditions {
            let tag = if c.required { "" } else { " [informational]" };
            s.push_str(&format!(
                "  {:<28} {:<20} {}{}\n",
                c.name,
                c.verdict.to_string(),
                c.detail,
                tag
            ));
        }
        if !self.note.is_empty() {
            s.push_str(&format!("  note: {}\n", self.note));
        }
        s
    }
}

/// `y ∉ C(X)`: the least-squares residual is not negligible relative to `y`.
pub fn check_column_space(y: &[f64], x: &DMatrix<f64>, tol: f64) -> Check {
    if x.nrows() != y.len() {
        return Check::new(
            Verdict::Unknown,
            format!("{} responses for {} design rows", y.len(), x.nrows()),
        );
    }
    let r = linalg::rank(x, RANK_TOL);
    if r < x.ncols() {
        return Check::new(
            Verdict::Unknown,
            format!("design has rank {r} < {} columns", x.ncols()),
        );
    }
    let yv = DVector::from_column_slice(y);
    let ynorm = yv.norm();
    if ynorm == 0.0 {
        return Check::new(Verdict::Violated, "response vector is zero");
    }
    let Ok((_, resid)) = linalg::least_squares(x, &yv) else {
        return Check::new(Verdict::Unknown, "least-squares solve failed");
    };
    let rel = resid.norm() / ynorm;
    if rel > tol {
        Check::new(
            Verdict::Satisfied,
            format!("relative residual {rel:.3e} > {tol:.0e}"),
        )
    } else {
        Check::new(
            Verdict::Violated,
            format!("responses lie in the column space (relative residual {rel:.3e})"),
        )
    }
}

/// Sample-size requirement for `n` observations and `p` coefficients.
pub fn check_sample_size(n: usize, p: usize, q: f64, baseline: BaselineKind) -> Check {
    let light = matches!(
        baseline,
        BaselineKind::Normal | BaselineKind::Logistic | BaselineKind::Laplace
    );
    if light && q >= 1.0 {
        let need = p as f64 + 1.0 - q;
        let ok = n as f64 > need;
        Check::new(
            if ok {
                Verdict::Satisfied
            } else {
                Verdict::Violated
            },
            format!("n = {n} {} p + 1 - q = {need}", if ok { ">" } else { "<=" }),
        )
    } else if q == 1.0 {
        let ok = n > p;
        Check::new(
            if ok {
                Verdict::Satisfied
            } else {
                Verdict::Violated
            },
            format!("n = {n} {} p = {p}", if ok { ">" } else { "<=" }),
        )
    } else {
        Check::new(
            Verdict::Unknown,
            format!(
                "no sample-size result for the {} baseline with q = {q}",
                baseline.name()
            ),
        )
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// ln of the skewness integrand on the unconstrained scale `s`, with either
/// `max(a, b)` (`upper = true`) or `min(a, b)` raised to `n + q - 1`.
fn ln_skew_integrand(
    s: f64,
    par: SkewParameterisation,
    q: f64,
    n: usize,
    a0: f64,
    b0: f64,
    upper: bool,
) -> f64 {
    let (ln_a, ln_b, ln_sum, ln_prior_jac) = match par {
        SkewParameterisation::EpsilonSkew => {
            // γ = tanh s, a = 2/(1 + e^{2s}), b = 2/(1 + e^{-2s}), dγ/ds = ab
            let ln_a = LN_2 - softplus(2.0 * s);
            let ln_b = LN_2 - softplus(-2.0 * s);
            let lp = LN_2 + a0 * ln_a + b0 * ln_b - (a0 + b0) * LN_2 - ln_beta(a0, b0);
            (ln_a, ln_b, LN_2, lp)
        }
        SkewParameterisation::InverseScale => {
            // γ = e^s, a = γ, b = 1/γ
            let ln_sum = s.abs() + softplus(-2.0 * s.abs());
            let lp = LN_2 + (a0 - b0) * s - (a0 + b0) * ln_sum - ln_beta(a0, b0);
            (s, -s, ln_sum, lp)
        }
    };
    let ln_h = if upper {
        ln_a.max(ln_b)
    } else {
        ln_a.min(ln_b)
    };
    (n as f64 + q - 1.0) * ln_h - n as f64 * ln_sum + ln_prior_jac
}

/// Integrates the skewness integrand over a widening symmetric window on the
/// unconstrained scale. Returns the running values.
fn widening_integral(f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut total = quadrature::integrate(&f, -1.0, 1.0, 0.0, 1e-13).0;
    let mut out = vec![total];
    let mut inner = 1.0f64;
    for _ in 0..10 {
        let outer = inner * 2.0;
        let mut k = inner;
        while k < outer {
            let hi = (k + 1.0).min(outer);
            total += quadrature::integrate(&f, k, hi, 0.0, 1e-13).0;
            total += quadrature::integrate(&f, -hi, -k, 0.0, 1e-13).0;
            k = hi;
        }
        out.push(total);
        inner = outer;
    }
    out
}

fn skew_integral_check(
    par: SkewParameterisation,
    q: f64,
    n: usize,
    gamma_prior: (f64, f64),
    upper: bool,
) -> Check {
    let (a0, b0) = gamma_prior;
    let values = widening_integral(|s| ln_skew_integrand(s, par, q, n, a0, b0, upper).exp());
    let last = values[values.len() - 1];
    let prev = values[values.len() - 2];
    if !last.is_finite() {
        return Check::new(
            Verdict::Unknown,
            "integrand overflowed on the widening window",
        );
    }
    let rel = ((last - prev) / last).abs();
    if last > 0.0 && rel < 1e-8 {
        Check::new(
            Verdict::NumericallyChecked,
            format!(
                "integral stabilised at {last:.6e} (relative change {rel:.1e}); numerical evidence only, \
                 finiteness depends on the skewness prior"
            ),
        )
    } else {
        Check::new(
            Verdict::Unknown,
            format!(
                "integral did not stabilise (last value {last:.6e}, relative change {rel:.1e})"
            ),
        )
    }
}

/// Finiteness of `∫ max(a,b)^{n+q-1} / (a+b)^n π(γ) dγ`.
pub fn check_condition_iii(
    par: SkewParameterisation,
    q: f64,
    n: usize,
    gamma_prior: (f64, f64),
) -> Check {
    if q == 1.0 {
        return Check::new(
            Verdict::Satisfied,
            "holds for any skewness prior when q = 1",
        );
    }
    if par.is_bounded() && q >= 1.0 {
        return Check::new(Verdict::Satisfied, "a and b are bounded");
    }
    skew_integral_check(par, q, n, gamma_prior, true)
}

/// Finiteness of `∫ min(a,b)^{n+q-1} / (a+b)^n π(γ) dγ` (necessary only).
pub fn check_condition_ii(
    par: SkewParameterisation,
    q: f64,
    n: usize,
    gamma_prior: (f64, f64),
) -> Check {
    if q == 1.0 {
        return Check::new(
            Verdict::Satisfied,
            "holds for any skewness prior when q = 1",
        );
    }
    if par.is_bounded() && q >= 1.0 {
        return Check::new(Verdict::Satisfied, "a and b are bounded");
    }
    skew_integral_check(par, q, n, gamma_prior, false)
}

/// Does some `η` satisfy `lo ≤ Xη ≤ hi` row-wise? Infinite bounds are
/// dropped. `Ok(true)` means feasible.
pub fn interval_system_feasible(
    x: &DMatrix<f64>,
    lo: &[f64],
    hi: &[f64],
) -> std::result::Result<bool, String> {
    let (m, p) = x.shape();
    // η = η⁺ - η⁻ with both parts non-negative
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..m {
        let row: Vec<f64> = (0..p)
            .map(|j| x[(i, j)])
            .chain((0..p).map(|j| -x[(i, j)]))
            .collect();
        if hi[i].is_finite() {
            a.push(row.clone());
            b.push(hi[i]);
        }
        if lo[i].is_finite() {
            a.push(row.iter().map(|v| -v).collect());
            b.push(-lo[i]);
        }
    }
    if a.is_empty() {
        return Ok(true);
    }
    match simplex::solve(&vec![0.0; 2 * p], &a, &b) {
        LpStatus::Optimal { .. } => Ok(true),
        LpStatus::Infeasible { .. } => Ok(false),
        other => Err(format!("simplex ended with status {other:?}")),
    }
}

/// The product of log-scale intervals misses the column space of `X`.
/// Intervals are on the original (positive) time scale.
pub fn check_interval_lp(x: &DMatrix<f64>, intervals: &[(f64, f64)]) -> Result<Check> {
    if x.nrows() != intervals.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: intervals.len(),
        });
    }
    let mut lo = Vec::with_capacity(intervals.len());
    let mut hi = Vec::with_capacity(intervals.len());
    for &(l, u) in intervals {
        if !(l > 0.0 && l < u && u.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "intervals need 0 < lower < upper < inf, got ({l}, {u})"
            )));
        }
        lo.push(l.ln());
        hi.push(u.ln());
    }
    Ok(interval_lp_check(x, &lo, &hi))
}

fn interval_lp_check(x: &DMatrix<f64>, lo: &[f64], hi: &[f64]) -> Check {
    match interval_system_feasible(x, lo, hi) {
        Ok(false) => Check::new(
            Verdict::Satisfied,
            "no coefficient vector fits inside every interval",
        ),
        Ok(true) => Check::new(
            Verdict::Violated,
            "some coefficient vector fits inside every interval",
        ),
        Err(e) => Check::new(Verdict::Unknown, e),
    }
}

fn cond(name: &str, c: Check, required: bool) -> Condition {
    Condition {
        name: name.to_string(),
        verdict: c.verdict,
        detail: c.detail,
        required,
    }
}

fn skew_conditions(spec: &ModelSpec, n: usize) -> Vec<Condition> {
    if !spec.two_piece {
        return vec![cond(
            "skewness integral",
            Check::new(Verdict::Satisfied, "symmetric model, no skewness parameter"),
            true,
        )];
    }
    let prior = (spec.a0, spec.b0);
    vec![
        cond(
            "skewness integral (upper)",
            check_condition_iii(spec.parameterisation, spec.q, n, prior),
            true,
        ),
        cond(
            "skewness integral (lower)",
            check_condition_ii(spec.parameterisation, spec.q, n, prior),
            false,
        ),
    ]
}

fn overall(conditions: &[Condition]) -> Verdict {
    Verdict::all(conditions.iter().filter(|c| c.required).map(|c| c.verdict))
}

fn uncensored_path(data: &Dataset, spec: &ModelSpec, tol: f64) -> (Vec<Condition>, Verdict) {
    let (x, resp) = data.select(CensoredObservation::is_exact);
    let y: Vec<f64> = resp.iter().map(CensoredObservation::point).collect();
    let mut cs = vec![
        cond(
            "responses outside C(X)",
            check_column_space(&y, &x, tol),
            true,
        ),
        cond(
            "sample size",
            check_sample_size(y.len(), data.p(), spec.q, spec.baseline),
            true,
        ),
    ];
    cs.extend(skew_conditions(spec, y.len()));
    let v = overall(&cs);
    (cs, v)
}

fn interval_path(data: &Dataset, spec: &ModelSpec) -> (Vec<Condition>, Verdict) {
    let (x, resp) = data.select(CensoredObservation::is_interval);
    let (lo, hi): (Vec<f64>, Vec<f64>) = resp
        .iter()
        .map(|r| match *r {
            CensoredObservation::Interval { lower, upper } => (lower, upper),
            _ => unreachable!(),
        })
        .unzip();
    let n_i = lo.len();
    let mut cs = vec![
        cond("intervals miss C(X)", interval_lp_check(&x, &lo, &hi), true),
        cond(
            "sample size",
            check_sample_size(n_i, data.p(), spec.q, spec.baseline),
            true,
        ),
    ];
    cs.extend(skew_conditions(spec, n_i));
    let v = overall(&cs);
    (cs, v)
}

/// Chooses the applicable route for `data` and collects its conditions.
pub fn propriety_report(data: &Dataset, spec: &ModelSpec, tol: f64) -> ProprietyReport {
    let n_o = data.n_exact();
    let n_i = data.n_interval();
    if n_o > 0 {
        let (conds, verdict) = uncensored_path(data, spec, tol);
        if verdict == Verdict::Violated && n_i > 0 {
            let (_, iv) = interval_path(data, spec);
            if iv.is_ok() {
                return ProprietyReport {
                    path: "uncensored sub-sample".into(),
                    conditions: conds,
                    overall: Verdict::Unknown,
                    note: "the uncensored sub-sample fails, but the interval-censored sub-sample alone \
                           would satisfy its conditions; no result covers the combination"
                        .into(),
                };
            }
        }
        let note = if verdict == Verdict::NumericallyChecked {
            "the skewness integral was only checked numerically".into()
        } else {
            String::new()
        };
        return ProprietyReport {
            path: "uncensored sub-sample".into(),
            conditions: conds,
            overall: verdict,
            note,
        };
    }
    if n_i > 0 {
        let (conds, verdict) = interval_path(data, spec);
        return ProprietyReport {
            path: "interval-censored sub-sample".into(),
            conditions: conds,
            overall: verdict,
            note: String::new(),
        };
    }
    ProprietyReport {
        path: "none".into(),
        conditions: vec![],
        overall: Verdict::Unknown,
        note: "no uncensored or interval-censored responses; no sufficient condition applies"
            .into(),
    }
}
