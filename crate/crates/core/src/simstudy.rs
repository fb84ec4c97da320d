//! Repeated-sampling study of the two-piece regression fits: data
//! generation for the standard scenarios, parallel replications and
//! coverage / point-estimate / Bayes-factor summaries.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{BaselineKind, SkewParameterisation, TwoPiece, TwoPieceParams};
use crate::error::{Error, Result};
use crate::model::{CensoredObservation, Dataset, ModelSpec, ParameterVector, Posterior};
use crate::sampler::{
    default_init, quantile_sorted, sample_posterior, summarize, Algorithm, ChainConfig,
};
use crate::selection::{mle_fit, savage_dickey_bf, KdeOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ErrorFamily {
    TwoPieceNormal,
    TwoPieceStudentT { df: f64 },
}

impl ErrorFamily {
    fn baseline(&self) -> BaselineKind {
        match *self {
            ErrorFamily::TwoPieceNormal => BaselineKind::Normal,
            ErrorFamily::TwoPieceStudentT { df } => BaselineKind::StudentT { df },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovariateLaw {
    StandardNormal,
    /// `|N(0, scale²)|`.
    RightHalfNormal {
        scale: f64,
    },
}

impl CovariateLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        match *self {
            CovariateLaw::StandardNormal => z,
            CovariateLaw::RightHalfNormal { scale } => scale * z.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub error_family: ErrorFamily,
    pub gamma_true: f64,
    /// Intercept first.
    pub beta_true: Vec<f64>,
    pub sigma_true: f64,
    pub n: usize,
    pub covariate_law: CovariateLaw,
    /// Responses above this value (on the original scale) are right-censored
    /// at it.
    pub censoring: Option<f64>,
    /// Responses are `exp` of the linear model; fits work on the log scale.
    pub log_scale_response: bool,
}

impl Scenario {
    /// The four standard designs: 1 two-piece normal, 2 and 3 two-piece
    /// Student-t with 2 and 5 degrees of freedom, 4 censored log-linear
    /// two-piece normal.
    pub fn preset(id: u8, n: usize, gamma: f64) -> Result<Scenario> {
        let base = Scenario {
            name: format!("scenario{id}"),
            error_family: ErrorFamily::TwoPieceNormal,
            gamma_true: gamma,
            beta_true: vec![1.0, 2.0, 3.0],
            sigma_true: 1.0,
            n,
            covariate_law: CovariateLaw::StandardNormal,
            censoring: None,
            log_scale_response: false,
        };
        let sc = match id {
            1 => base,
            2 | 3 => Scenario {
                error_family: ErrorFamily::TwoPieceStudentT {
                    df: if id == 2 { 2.0 } else { 5.0 },
                },
                ..base
            },
            4 => Scenario {
                sigma_true: 0.25,
                covariate_law: CovariateLaw::RightHalfNormal { scale: 1.0 / 3.0 },
                censoring: Some(17.5),
                log_scale_response: true,
                ..base
            },
            _ => return Err(Error::Config(format!("scenario must be 1-4, got {id}"))),
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < self.beta_true.len() + 3 {
            return Err(Error::Config(format!(
                "n = {} is too small for the design",
                self.n
            )));
        }
        if self.beta_true.is_empty() {
            return Err(Error::Config("beta_true needs an intercept".into()));
        }
        if let Some(c) = self.censoring {
            if !(c.is_finite() && (!self.log_scale_response || c > 0.0)) {
                return Err(Error::Config(format!("invalid censoring threshold {c}")));
            }
        }
        self.error_law(0.0).map(|_| ())
    }

    fn error_law(&self, mu: f64) -> Result<TwoPiece> {
        TwoPiece::new(TwoPieceParams::new(
            mu,
            self.sigma_true,
            self.gamma_true,
            self.error_family.baseline(),
            SkewParameterisation::EpsilonSkew,
        )?)
    }

    /// Model fitted to each replication: the generating family with free
    /// skewness (and free degrees of freedom for Student-t errors).
    pub fn fit_spec(&self) -> ModelSpec {
        ModelSpec::new(self.error_family.baseline(), true)
    }

    pub fn parameter_names(&self) -> Vec<String> {
        let mut beta = vec!["intercept".to_string()];
        beta.extend((1..self.beta_true.len()).map(|j| format!("x{j}")));
        self.fit_spec().parameter_names(&beta)
    }

    /// True values in the order of [`Scenario::parameter_names`].
    pub fn truth(&self) -> Vec<f64> {
        let mut t = self.beta_true.clone();
        t.push(self.sigma_true);
        t.push(self.gamma_true);
        if let ErrorFamily::TwoPieceStudentT { df } = self.error_family {
            t.push(df);
        }
        t
    }
}

/// Simulated dataset for `scenario`; the same seed gives the same data.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<Dataset> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let law = scenario.error_law(0.0)?;
    let p = scenario.beta_true.len();
    let mut rows = Vec::with_capacity(scenario.n);
    let mut resp = Vec::with_capacity(scenario.n);
    for _ in 0..scenario.n {
        let mut x = vec![1.0];
        x.extend((1..p).map(|_| scenario.covariate_law.draw(&mut rng)));
        let eta: f64 = x.iter().zip(&scenario.beta_true).map(|(a, b)| a * b).sum();
        let y = eta + law.draw(&mut rng);
        let threshold = scenario.censoring.map(|c| {
            if scenario.log_scale_response {
                c.ln()
            } else {
                c
            }
        });
        resp.push(match threshold {
            Some(c) if y > c => CensoredObservation::Right { y: c },
            _ => CensoredObservation::Exact { y },
        });
        rows.push(x);
    }
    let names = scenario.parameter_names()[..p].to_vec();
    let design = nalgebra::DMatrix::from_fn(scenario.n, p, |i, j| rows[i][j]);
    Dataset::new(design, resp, names)
}

/// Chain settings for each replication. The default keeps 1000 draws
/// (30,000 t-walk iterations); at 240 kept draws the t-walk's interval
/// endpoints are noisy enough to pull coverage below nominal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_keep: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub algorithm: Algorithm,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_keep: 1000,
            burn_in: 5000,
            thin: 25,
            algorithm: Algorithm::TWalk,
        }
    }
}

/// Per-replication seed: a SplitMix64 step of the master seed advanced by
/// the replication index, so replications are independent of scheduling.
pub fn replication_seed(master: u64, rep: usize) -> u64 {
    let mut z = master.wrapping_add((rep as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub median: f64,
    pub map: f64,
    pub mle: f64,
    pub lower95: f64,
    pub upper95: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub seed: u64,
    pub censored_fraction: f64,
    /// Empty when the fit failed.
    pub estimates: Vec<ParameterEstimate>,
    pub bf01: f64,
    pub error: Option<String>,
}

fn fit_replication(
    scenario: &Scenario,
    cfg: &FitConfig,
    rep: usize,
    seed: u64,
) -> ReplicationRecord {
    let mut rec = ReplicationRecord {
        rep,
        seed,
        censored_fraction: f64::NAN,
        estimates: vec![],
        bf01: f64::NAN,
        error: None,
    };
    let run = |rec: &mut ReplicationRecord| -> Result<()> {
        let data = generate(scenario, seed)?;
        rec.censored_fraction = data.n_censored() as f64 / data.n() as f64;
        let spec = scenario.fit_spec();
        let post = Posterior::new(&data, &spec)?;
        let chain_cfg = ChainConfig {
            n_keep: cfg.n_keep,
            burn_in: cfg.burn_in,
            thin: cfg.thin,
            seed: seed ^ 0x5eed,
            algorithm: cfg.algorithm,
            init: default_init(&post, cfg.algorithm)?,
        };
        let chain = sample_posterior(&post, &chain_cfg)?;
        let summ = summarize(&chain)?;
        let med: Vec<f64> = summ.iter().map(|s| s.median).collect();
        let start = ParameterVector::from_flat(&med, data.p(), &spec)?;
        let mle = mle_fit(&data, &spec, &start)?.theta.to_flat(&spec);
        rec.estimates = summ
            .iter()
            .zip(scenario.truth())
            .zip(mle)
            .map(|((s, truth), m)| ParameterEstimate {
                median: s.median,
                map: s.map,
                mle: m,
                lower95: s.lower95,
                upper95: s.upper95,
                covered: s.lower95 <= truth && truth <= s.upper95,
            })
            .collect();
        rec.bf01 = savage_dickey_bf(&chain, &spec, &KdeOptions::default())?.bf01;
        Ok(())
    };
    if let Err(e) = run(&mut rec) {
        log::warn!("replication {rep} failed: {e}");
        rec.estimates.clear();
        rec.error = Some(e.to_string());
    }
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub scenario: String,
    pub parameter: String,
    pub truth: f64,
    pub coverage: f64,
    pub median_of_medians: f64,
    pub median_map: f64,
    pub median_mle: f64,
    pub median_bf01: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyTable {
    pub scenario: Scenario,
    pub master_seed: u64,
    pub n_reps: usize,
    pub n_failed: usize,
    pub median_censored_fraction: f64,
    pub rows: Vec<StudyRow>,
    pub records: Vec<ReplicationRecord>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.retain(|x| !x.is_nan());
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Runs `n_reps` replications in parallel and summarises the successful
/// ones; failures are kept in `records` and counted.
pub fn run_study(
    scenario: &Scenario,
    n_reps: usize,
    cfg: &FitConfig,
    master_seed: u64,
) -> Result<StudyTable> {
    if n_reps == 0 {
        return Err(Error::Config("n_reps must be at least 1".into()));
    }
    scenario.validate()?;
    let records: Vec<ReplicationRecord> = (0..n_reps)
        .into_par_iter()
        .map(|r| fit_replication(scenario, cfg, r, replication_seed(master_seed, r)))
        .collect();
    let ok: Vec<&ReplicationRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let bf = median(ok.iter().map(|r| r.bf01).collect());
    let rows = scenario
        .parameter_names()
        .into_iter()
        .zip(scenario.truth())
        .enumerate()
        .map(|(j, (name, truth))| {
            let col = |f: fn(&ParameterEstimate) -> f64| {
                median(ok.iter().map(|r| f(&r.estimates[j])).collect())
            };
            let covered = ok.iter().filter(|r| r.estimates[j].covered).count();
            StudyRow {
                scenario: scenario.name.clone(),
                parameter: name,
                truth,
                coverage: if ok.is_empty() {
                    f64::NAN
                } else {
                    covered as f64 / ok.len() as f64
                },
                median_of_medians: col(|e| e.median),
                median_map: col(|e| e.map),
                median_mle: col(|e| e.mle),
                median_bf01: bf,
            }
        })
        .collect();
    Ok(StudyTable {
        scenario: scenario.clone(),
        master_seed,
        n_reps,
        n_failed: records.len() - ok.len(),
        median_censored_fraction: median(records.iter().map(|r| r.censored_fraction).collect()),
        rows,
        records,
    })
}

impl StudyTable {
    /// One row per (scenario, parameter).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "scenario",
            "parameter",
            "truth",
            "coverage",
            "median_of_medians",
            "median_map",
            "median_mle",
            "median_bf01",
            "n_ok",
            "n_failed",
        ])?;
        let n_ok = (self.n_reps - self.n_failed).to_string();
        for r in &self.rows {
            out.write_record([
                r.scenario.clone(),
                r.parameter.clone(),
                format!("{:?}", r.truth),
                format!("{:?}", r.coverage),
                format!("{:?}", r.median_of_medians),
                format!("{:?}", r.median_map),
                format!("{:?}", r.median_mle),
                format!("{:?}", r.median_bf01),
                n_ok.clone(),
                self.n_failed.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Per-replication audit trail, one row per (replication, parameter).
    pub fn write_records_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "rep",
            "seed",
            "parameter",
            "median",
            "map",
            "mle",
            "lower95",
            "upper95",
            "covered",
            "bf01",
            "censored_fraction",
            "error",
        ])?;
        let names = self.scenario.parameter_names();
        for r in &self.records {
            let common = |param: &str, e: Option<&ParameterEstimate>| -> Vec<String> {
                let f = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:?}"));
                vec![
                    r.rep.to_string(),
                    r.seed.to_string(),
                    param.to_string(),
                    f(e.map(|e| e.median)),
                    f(e.map(|e| e.map)),
                    f(e.map(|e| e.mle)),
                    f(e.map(|e| e.lower95)),
                    f(e.map(|e| e.upper95)),
                    e.map_or(String::new(), |e| e.covered.to_string()),
                    format!("{:?}", r.bf01),
                    format!("{:?}", r.censored_fraction),
                    r.error.clone().unwrap_or_default(),
                ]
            };
            if r.estimates.is_empty() {
                out.write_record(common("", None))?;
            }
            for (name, e) in names.iter().zip(&r.estimates) {
                out.write_record(common(name, Some(e)))?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{} (n = {}, gamma = {}): {} replications, {} failed\n",
            self.scenario.name,
            self.scenario.n,
            self.scenario.gamma_true,
            self.n_reps,
            self.n_failed
        );
        if self.scenario.censoring.is_some() {
            s.push_str(&format!(
                "median censored fraction {:.3}\n",
                self.median_censored_fraction
            ));
        }
        s.push_str(&format!(
            "{:<10}{:>8}{:>10}{:>10}{:>10}{:>10}\n",
            "param", "truth", "coverage", "median", "MAP", "MLE"
        ));
        for r in &self.rows {
            s.push_str(&format!(
                "{:<10}{:>8.3}{:>10.3}{:>10.3}{:>10.3}{:>10.3}\n",
                r.parameter, r.truth, r.coverage, r.median_of_medians, r.median_map, r.median_mle
            ));
        }
        if let Some(r) = self.rows.first() {
            s.push_str(&format!("median BF01 {:.4}\n", r.median_bf01));
        }
        s
    }
}
