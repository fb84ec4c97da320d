//! Model comparison: BIC from a maximum-likelihood fit, LPML from
//! conditional predictive ordinates, Savage–Dickey ratios for symmetry and
//! importance-sampling evidence.

mod evidence;
mod kde;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub use evidence::{log_marginal_is_target, mvt_logpdf, EvidenceEstimate};
pub use kde::{kde_at, savage_dickey_bf, silverman_bandwidth, KdeOptions, SavageDickey};

use crate::error::{Error, Result};
use crate::model::{log_contributions, Dataset, ModelSpec, ParameterVector, Posterior};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::sampler::{summarize, Chain, ParameterSummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleFit {
    pub theta: ParameterVector,
    pub max_loglik: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Maximises the log-likelihood over the unconstrained parameters.
pub fn mle_fit(data: &Dataset, spec: &ModelSpec, start: &ParameterVector) -> Result<MleFit> {
    start.validate(data.p(), spec)?;
    let post = Posterior::new(data, spec)?;
    let u0 = post.to_unconstrained(start);
    let l0 = post.ln_likelihood_unconstrained(&u0);
    if !l0.is_finite() {
        return Err(Error::Optimization(format!(
            "log-likelihood is not finite at the start ({l0})"
        )));
    }
    let m = nelder_mead(
        |u| -post.ln_likelihood_unconstrained(u),
        &u0,
        &NelderMeadOptions::default(),
    );
    let (theta, ll) = if -m.value >= l0 {
        (post.from_unconstrained(&m.x), -m.value)
    } else {
        (start.clone(), l0)
    };
    Ok(MleFit {
        theta,
        max_loglik: ll,
        evals: m.evals,
        converged: m.converged,
    })
}

/// `k ln n - 2 ℓ̂` with `n` counting every observation, censored or not.
pub fn bic_value(max_loglik: f64, k: usize, n: usize) -> f64 {
    k as f64 * (n as f64).ln() - 2.0 * max_loglik
}

/// BIC from a fresh maximum-likelihood fit. Without `start` the fit begins
/// at the least-squares point.
pub fn bic(data: &Dataset, spec: &ModelSpec, start: Option<&ParameterVector>) -> Result<f64> {
    let start = match start {
        Some(s) => s.clone(),
        None => Posterior::new(data, spec)?.initial_point()?,
    };
    let fit = mle_fit(data, spec, &start)?;
    Ok(bic_value(fit.max_loglik, spec.n_params(data.p()), data.n()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lpml {
    pub lpml: f64,
    pub log_cpo: Vec<f64>,
    /// Observations with a zero likelihood contribution under some draw.
    pub zero_likelihood: Vec<usize>,
}

/// Parameter vectors of every stored draw.
pub fn chain_parameters(
    chain: &Chain,
    data: &Dataset,
    spec: &ModelSpec,
) -> Result<Vec<ParameterVector>> {
    chain
        .draws
        .iter()
        .map(|r| ParameterVector::from_flat(r, data.p(), spec))
        .collect()
}

/// Sum of log conditional predictive ordinates,
/// `log CPO_i = ln M - logsumexp_m(-ℓ_i(θ_m))`.
pub fn lpml(chain: &Chain, data: &Dataset, spec: &ModelSpec) -> Result<Lpml> {
    if chain.is_empty() {
        return Err(Error::Selection("LPML needs a non-empty chain".into()));
    }
    let thetas = chain_parameters(chain, data, spec)?;
    let contribs: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|t| log_contributions(t, data, spec))
        .collect::<Result<_>>()?;
    let m = contribs.len() as f64;
    let mut log_cpo = Vec::with_capacity(data.n());
    let mut zero = Vec::new();
    for i in 0..data.n() {
        let neg: Vec<f64> = contribs.iter().map(|c| -c[i]).collect();
        if neg.iter().any(|v| *v == f64::INFINITY || v.is_nan()) {
            zero.push(i);
            log_cpo.push(f64::NEG_INFINITY);
            continue;
        }
        log_cpo.push(m.ln() - evidence::log_sum_exp(&neg));
    }
    for &i in &zero {
        log::warn!("observation {i} has zero likelihood under at least one draw; its CPO is zero");
    }
    Ok(Lpml {
        lpml: log_cpo.iter().sum(),
        log_cpo,
        zero_likelihood: zero,
    })
}

/// IS evidence for a fitted model, using the chain to build the proposal.
pub fn log_marginal_is(
    chain: &Chain,
    data: &Dataset,
    spec: &ModelSpec,
    n_is: usize,
    seed: u64,
) -> Result<EvidenceEstimate> {
    let post = Posterior::new(data, spec)?;
    let draws: Vec<Vec<f64>> = chain_parameters(chain, data, spec)?
        .iter()
        .map(|t| post.to_unconstrained(t))
        .collect();
    let est = log_marginal_is_target(&draws, |u| post.ln_density_unconstrained(u), n_is, seed)?;
    if !est.reliable {
        log::warn!(
            "importance weights for {} are degenerate (ESS {:.1} of {n_is})",
            spec.label(),
            est.ess
        );
    }
    Ok(est)
}

/// Everything needed to place one fitted model in a comparison table.
#[derive(Debug, Clone)]
pub struct FittedModel<'a> {
    pub name: String,
    pub data: &'a Dataset,
    pub spec: ModelSpec,
    pub chain: Chain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_name: String,
    pub bic: f64,
    pub max_loglik: f64,
    pub lpml: f64,
    pub log_marginal: f64,
    pub log_marginal_se: f64,
    pub is_reliable: bool,
    /// Evidence of this model relative to the reference model.
    pub bf_vs_reference: f64,
    pub summaries: Vec<ParameterSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub n_is: usize,
    pub seed: u64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            n_is: 20_000,
            seed: 1,
        }
    }
}

fn posterior_median(chain: &Chain, data: &Dataset, spec: &ModelSpec) -> Result<ParameterVector> {
    let s = summarize(chain)?;
    let med: Vec<f64> = s.iter().map(|p| p.median).collect();
    ParameterVector::from_flat(&med, data.p(), spec)
}

/// Builds the comparison table; `reference` indexes the model whose Bayes
/// factor is one.
pub fn compare(
    models: &[FittedModel],
    reference: usize,
    opts: &CompareOptions,
) -> Result<Vec<ComparisonRow>> {
    if reference >= models.len() {
        return Err(Error::Selection(format!(
            "reference index {reference} out of range for {} models",
            models.len()
        )));
    }
    let partial: Vec<ComparisonRow> = models
        .par_iter()
        .map(|m| {
            let start = posterior_median(&m.chain, m.data, &m.spec)?;
            let fit = mle_fit(m.data, &m.spec, &start)?;
            let k = m.spec.n_params(m.data.p());
            let lp = lpml(&m.chain, m.data, &m.spec)?;
            let ev = log_marginal_is(&m.chain, m.data, &m.spec, opts.n_is, opts.seed)?;
            Ok(ComparisonRow {
                model_name: m.name.clone(),
                bic: bic_value(fit.max_loglik, k, m.data.n()),
                max_loglik: fit.max_loglik,
                lpml: lp.lpml,
                log_marginal: ev.log_marginal,
                log_marginal_se: ev.log_se,
                is_reliable: ev.reliable,
                bf_vs_reference: f64::NAN,
                summaries: summarize(&m.chain)?,
            })
        })
        .collect::<Result<_>>()?;
    let ref_lm = partial[reference].log_marginal;
    Ok(partial
        .into_iter()
        .map(|mut r| {
            r.bf_vs_reference = (r.log_marginal - ref_lm).exp();
            r
        })
        .collect())
}

/// Bayes factor of model `a` over model `b` from their evidence estimates.
pub fn bayes_factor(a: &EvidenceEstimate, b: &EvidenceEstimate) -> f64 {
    (a.log_marginal - b.log_marginal).exp()
}

pub fn write_comparison_csv<W: Write>(rows: &[ComparisonRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "model",
        "bic",
        "max_loglik",
        "lpml",
        "log_marginal",
        "log_marginal_se",
        "bf_vs_reference",
        "is_reliable",
    ])?;
    for r in rows {
        out.write_record([
            r.model_name.clone(),
            format!("{:?}", r.bic),
            format!("{:?}", r.max_loglik),
            format!("{:?}", r.lpml),
            format!("{:?}", r.log_marginal),
            format!("{:?}", r.log_marginal_se),
            format!("{:?}", r.bf_vs_reference),
            r.is_reliable.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Table with one column per model: posterior medians and 95% intervals,
/// then BIC, Bayes factor and LPML.
pub fn comparison_text(rows: &[ComparisonRow]) -> String {
    let mut names: Vec<String> = Vec::new();
    for r in rows {
        for s in &r.summaries {
            if !names.contains(&s.name) {
                names.push(s.name.clone());
            }
        }
    }
    let width = 26;
    let mut out = format!("{:<12}", "");
    for r in rows {
        out.push_str(&format!("{:>width$}", r.model_name));
    }
    out.push('\n');
    for n in &names {
        out.push_str(&format!("{n:<12}"));
        for r in rows {
            let cell = match r.summaries.iter().find(|s| &s.name == n) {
                Some(s) => format!("{:.3} ({:.3}, {:.3})", s.median, s.lower95, s.upper95),
                None => "-".into(),
            };
            out.push_str(&format!("{cell:>width$}"));
        }
        out.push('\n');
    }
    let line = |label: &str, f: &dyn Fn(&ComparisonRow) -> String| {
        let mut s = format!("{label:<12}");
        for r in rows {
            s.push_str(&format!("{:>width$}", f(r)));
        }
        s.push('\n');
        s
    };
    out.push_str(&line("BIC", &|r| format!("{:.2}", r.bic)));
    out.push_str(&line("BF", &|r| format!("{:.3e}", r.bf_vs_reference)));
    out.push_str(&line("LPML", &|r| format!("{:.3}", r.lpml)));
    out
}
