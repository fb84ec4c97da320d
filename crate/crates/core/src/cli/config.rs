//! Flat `key = value` run configuration. Every key is a [`RunConfig`]
//! field; `#` starts a comment. Command-line flags are applied on top of a
//! file with the same [`RunConfig::set`] calls.

use std::path::{Path, PathBuf};

use crate::data::{DataOptions, StatusConvention};
use crate::distributions::{BaselineKind, SkewParameterisation};
use crate::error::{Error, Result};
use crate::model::{CentringRule, ModelSpec};
use crate::sampler::{Algorithm, ChainConfig};
use crate::simstudy::FitConfig;

pub const OUT_DIR_ENV: &str = "TPREG_OUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub time_col: String,
    /// Empty: every row is an observed event.
    pub status_col: String,
    pub status_convention: StatusConvention,
    /// Empty: no interval-censored rows.
    pub upper_col: String,
    pub covariates: Vec<String>,
    pub intercept: bool,
    pub log_response: bool,

    pub baseline: String,
    /// Fixed Student-t degrees of freedom when `free_delta` is off.
    pub df: f64,
    pub two_piece: bool,
    pub parameterisation: SkewParameterisation,
    pub q: f64,
    pub a0: f64,
    pub b0: f64,
    pub d: f64,
    pub free_delta: bool,
    pub tol: f64,

    pub n_keep: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub chains: usize,

    pub out_dir: PathBuf,
    pub threads: usize,

    /// Comma-separated model names for `compare`, e.g. `tp_logistic`.
    pub models: Vec<String>,
    pub reference: String,
    pub n_is: usize,

    pub chain: Option<PathBuf>,
    pub subjects: usize,
    pub quantiles: Vec<f64>,
    pub centring: CentringRule,

    pub scenario: u8,
    pub sim_n: usize,
    pub gamma: f64,
    pub reps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let spec = ModelSpec::default();
        RunConfig {
            data: None,
            time_col: "time".into(),
            status_col: "status".into(),
            status_convention: StatusConvention::Event1Censor0,
            upper_col: String::new(),
            covariates: vec![],
            intercept: true,
            log_response: true,
            baseline: "logistic".into(),
            df: 5.0,
            two_piece: true,
            parameterisation: spec.parameterisation,
            q: spec.q,
            a0: spec.a0,
            b0: spec.b0,
            d: spec.d,
            free_delta: spec.free_delta,
            tol: crate::propriety::COLUMN_SPACE_TOL,
            n_keep: 10_000,
            burn_in: 50_000,
            thin: 25,
            seed: 1,
            algorithm: Algorithm::TWalk,
            chains: 1,
            out_dir: std::env::var_os(OUT_DIR_ENV)
                .map_or_else(|| PathBuf::from("tpreg-out"), PathBuf::from),
            threads: 0,
            models: vec![
                "tp_logistic".into(),
                "tp_normal".into(),
                "logistic".into(),
                "normal".into(),
            ],
            reference: String::new(),
            n_is: 20_000,
            chain: None,
            subjects: 5,
            quantiles: vec![0.05, 0.25, 0.5, 0.75, 0.95],
            centring: CentringRule::Median,
            scenario: 1,
            sim_n: 100,
            gamma: 0.5,
            reps: 200,
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::Config(format!("{key} = '{value}': expected {what}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, what))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

/// Splits a model name such as `tp_logistic` or `normal` into family and
/// two-piece flag.
pub fn parse_model_name(name: &str) -> Result<(String, bool)> {
    let n = name.trim().to_ascii_lowercase().replace([' ', '-'], "_");
    let (tp, fam) = match n.strip_prefix("tp_") {
        Some(rest) => (true, rest.to_string()),
        None => (false, n.clone()),
    };
    match fam.as_str() {
        "normal" | "logistic" | "laplace" | "student_t" => Ok((fam, tp)),
        _ => Err(Error::Config(format!(
            "unknown model '{name}'; use [tp_]normal, [tp_]logistic, [tp_]laplace or [tp_]student_t"
        ))),
    }
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "data",
        "time_col",
        "status_col",
        "status_convention",
        "upper_col",
        "covariates",
        "intercept",
        "log_response",
        "baseline",
        "df",
        "two_piece",
        "parameterisation",
        "q",
        "a0",
        "b0",
        "d",
        "free_delta",
        "tol",
        "n_keep",
        "burn_in",
        "thin",
        "seed",
        "algorithm",
        "chains",
        "out_dir",
        "threads",
        "models",
        "reference",
        "n_is",
        "chain",
        "subjects",
        "quantiles",
        "centring",
        "scenario",
        "sim_n",
        "gamma",
        "reps",
    ];

    /// Sets one key. `model` is accepted as shorthand for `baseline` plus
    /// `two_piece`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "data" => self.data = opt_path(v),
            "time_col" => self.time_col = v.into(),
            "status_col" => self.status_col = v.into(),
            "status_convention" => self.status_convention = v.parse()?,
            "upper_col" => self.upper_col = v.into(),
            "covariates" => self.covariates = list(v),
            "intercept" => self.intercept = flag(key, v)?,
            "log_response" => self.log_response = flag(key, v)?,
            "baseline" => self.baseline = parse_model_name(v)?.0,
            "model" => {
                let (fam, tp) = parse_model_name(v)?;
                self.baseline = fam;
                self.two_piece = tp;
            }
            "df" => self.df = num(key, v, "a positive number")?,
            "two_piece" => self.two_piece = flag(key, v)?,
            "parameterisation" => {
                self.parameterisation = match v {
                    "epsilon_skew" => SkewParameterisation::EpsilonSkew,
                    "inverse_scale" => SkewParameterisation::InverseScale,
                    _ => return Err(bad(key, v, "epsilon_skew or inverse_scale")),
                }
            }
            "q" => self.q = num(key, v, "a number")?,
            "a0" => self.a0 = num(key, v, "a number")?,
            "b0" => self.b0 = num(key, v, "a number")?,
            "d" => self.d = num(key, v, "a number")?,
            "free_delta" => self.free_delta = flag(key, v)?,
            "tol" => self.tol = num(key, v, "a number")?,
            "n_keep" => self.n_keep = num(key, v, "a count")?,
            "burn_in" => self.burn_in = num(key, v, "a count")?,
            "thin" => self.thin = num(key, v, "a count")?,
            "seed" => self.seed = num(key, v, "an unsigned integer")?,
            "algorithm" => self.algorithm = v.parse()?,
            "chains" => self.chains = num(key, v, "a count")?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "threads" => self.threads = num(key, v, "a count")?,
            "models" => {
                let m = list(v);
                for name in &m {
                    parse_model_name(name)?;
                }
                self.models = m;
            }
            "reference" => self.reference = v.into(),
            "n_is" => self.n_is = num(key, v, "a count")?,
            "chain" => self.chain = opt_path(v),
            "subjects" => self.subjects = num(key, v, "a count")?,
            "quantiles" => {
                let mut q: Vec<f64> = list(v)
                    .iter()
                    .map(|s| num(key, s, "comma-separated probabilities"))
                    .collect::<Result<_>>()?;
                // 5,25,50 reads as percentages
                if q.iter().any(|&x| x >= 1.0) {
                    q.iter_mut().for_each(|x| *x /= 100.0);
                }
                if q.is_empty() || q.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                    return Err(bad(
                        key,
                        v,
                        "probabilities in (0, 1) or percentages in (0, 100)",
                    ));
                }
                self.quantiles = q;
            }
            "centring" => self.centring = v.parse()?,
            "scenario" => self.scenario = num(key, v, "1, 2, 3 or 4")?,
            "sim_n" => self.sim_n = num(key, v, "a count")?,
            "gamma" => self.gamma = num(key, v, "a number")?,
            "reps" => self.reps = num(key, v, "a count")?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_onto(RunConfig::default(), text)
    }

    /// Applies the keys in `text` on top of `base`.
    pub fn parse_onto(base: RunConfig, text: &str) -> Result<Self> {
        let mut cfg = base;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got '{raw}'", i + 1))
            })?;
            cfg.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load_onto(base: RunConfig, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_onto(base, &text)
    }

    fn get(&self, key: &str) -> String {
        let join = |v: &[String]| v.join(",");
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or(String::new(), |p| p.display().to_string())
        };
        match key {
            "data" => path(&self.data),
            "time_col" => self.time_col.clone(),
            "status_col" => self.status_col.clone(),
            "status_convention" => self.status_convention.to_string(),
            "upper_col" => self.upper_col.clone(),
            "covariates" => join(&self.covariates),
            "intercept" => self.intercept.to_string(),
            "log_response" => self.log_response.to_string(),
            "baseline" => self.baseline.clone(),
            "df" => format!("{:?}", self.df),
            "two_piece" => self.two_piece.to_string(),
            "parameterisation" => match self.parameterisation {
                SkewParameterisation::EpsilonSkew => "epsilon_skew".into(),
                SkewParameterisation::InverseScale => "inverse_scale".into(),
            },
            "q" => format!("{:?}", self.q),
            "a0" => format!("{:?}", self.a0),
            "b0" => format!("{:?}", self.b0),
            "d" => format!("{:?}", self.d),
            "free_delta" => self.free_delta.to_string(),
            "tol" => format!("{:?}", self.tol),
            "n_keep" => self.n_keep.to_string(),
            "burn_in" => self.burn_in.to_string(),
            "thin" => self.thin.to_string(),
            "seed" => self.seed.to_string(),
            "algorithm" => match self.algorithm {
                Algorithm::TWalk => "twalk".into(),
                Algorithm::AdaptiveRwm => "adaptive_rwm".into(),
            },
            "chains" => self.chains.to_string(),
            "out_dir" => self.out_dir.display().to_string(),
            "threads" => self.threads.to_string(),
            "models" => join(&self.models),
            "reference" => self.reference.clone(),
            "n_is" => self.n_is.to_string(),
            "chain" => path(&self.chain),
            "subjects" => self.subjects.to_string(),
            "quantiles" => self
                .quantiles
                .iter()
                .map(|q| format!("{q:?}"))
                .collect::<Vec<_>>()
                .join(","),
            "centring" => match self.centring {
                CentringRule::Mode => "mode".into(),
                CentringRule::Median => "median".into(),
            },
            "scenario" => self.scenario.to_string(),
            "sim_n" => self.sim_n.to_string(),
            "gamma" => format!("{:?}", self.gamma),
            "reps" => self.reps.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Every key, one per line, in a fixed order; [`RunConfig::parse`]
    /// reads it back to an equal config.
    pub fn to_text(&self) -> String {
        Self::KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.get(k)))
            .collect()
    }

    pub fn data_options(&self) -> DataOptions {
        let opt = |s: &String| (!s.is_empty()).then(|| s.clone());
        DataOptions {
            time_col: self.time_col.clone(),
            status_col: opt(&self.status_col),
            status: self.status_convention,
            upper_col: opt(&self.upper_col),
            covariates: self.covariates.clone(),
            intercept: self.intercept,
            log_response: self.log_response,
        }
    }

    fn baseline_kind(&self, family: &str) -> Result<BaselineKind> {
        Ok(match family {
            "normal" => BaselineKind::Normal,
            "logistic" => BaselineKind::Logistic,
            "laplace" => BaselineKind::Laplace,
            "student_t" => BaselineKind::StudentT { df: self.df },
            _ => return Err(Error::Config(format!("unknown baseline '{family}'"))),
        })
    }

    /// Model spec for the named model (family and two-piece flag), with the
    /// prior settings of this config.
    pub fn spec_for(&self, family: &str, two_piece: bool) -> Result<ModelSpec> {
        let spec = ModelSpec {
            baseline: self.baseline_kind(family)?,
            two_piece,
            parameterisation: self.parameterisation,
            q: self.q,
            a0: self.a0,
            b0: self.b0,
            d: self.d,
            free_delta: self.free_delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        self.spec_for(&self.baseline, self.two_piece)
    }

    /// Chain settings without starting points.
    pub fn chain_config(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            n_keep: self.n_keep,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
            algorithm: self.algorithm,
            init: vec![],
        }
    }

    /// Defaults for `simulate`: the shorter chains of the study harness.
    pub fn for_simulation() -> Self {
        let sim = FitConfig::default();
        RunConfig {
            n_keep: sim.n_keep,
            burn_in: sim.burn_in,
            thin: sim.thin,
            algorithm: sim.algorithm,
            ..RunConfig::default()
        }
    }

    pub fn sim_fit_config(&self) -> FitConfig {
        FitConfig {
            n_keep: self.n_keep,
            burn_in: self.burn_in,
            thin: self.thin,
            algorithm: self.algorithm,
        }
    }
}
