//! The `tpreg` command line: `check`, `fit`, `compare`, `predict` and
//! `simulate`. Each command returns its process exit code.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::data::load_csv;
use crate::error::{Error, Result};
use crate::model::{Dataset, ModelSpec, Posterior};
use crate::prediction::{censored_subjects, recentre, residual_life_table, Predictive};
use crate::propriety::{propriety_report, ProprietyReport, Verdict};
use crate::sampler::{
    default_init, diagnostics, read_chain, sample_chains, summarize, write_chain, Chain,
    Diagnostics, ParameterSummary,
};
use crate::selection::{
    compare, comparison_text, write_comparison_csv, CompareOptions, FittedModel,
};
use crate::simstudy::{run_study, Scenario};

pub use config::{parse_model_name, RunConfig, OUT_DIR_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;

pub const FIT_SCHEMA: &str = "tpreg.fit/1";
pub const COMPARE_SCHEMA: &str = "tpreg.compare/1";

#[derive(Debug, Parser)]
#[command(
    name = "tpreg",
    version,
    about = "Bayesian AFT regression with two-piece errors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify posterior propriety for the data and model.
    Check(CommonArgs),
    /// Sample the posterior and write the chain and a summary.
    Fit(CommonArgs),
    /// Fit several models and tabulate BIC, LPML and Bayes factors.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated, e.g. tp_logistic,tp_normal,logistic,normal
        #[arg(long)]
        models: Option<String>,
        /// Model whose Bayes factor is one (default: the first).
        #[arg(long)]
        reference: Option<String>,
        #[arg(long)]
        n_is: Option<String>,
    },
    /// Residual-life quantiles for right-censored subjects.
    Predict {
        #[command(flatten)]
        common: CommonArgs,
        /// Chain CSV written by `fit` or `compare`; fits inline when absent.
        #[arg(long)]
        chain: Option<String>,
        /// Number of right-censored subjects, taken in file order.
        #[arg(long)]
        subjects: Option<String>,
        /// Probabilities or percentages, e.g. 5,25,50,75,95
        #[arg(long)]
        quantiles: Option<String>,
        /// mode or median
        #[arg(long)]
        centring: Option<String>,
    },
    /// Run a simulation study for one preset scenario.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Preset 1 to 4.
        #[arg(long)]
        scenario: Option<String>,
        /// Sample size per replication.
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        reps: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Write the effective configuration here before running.
    #[arg(long)]
    pub dump_config: Option<PathBuf>,
    /// Sample even when propriety is not certified.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub time_col: Option<String>,
    #[arg(long)]
    pub status_col: Option<String>,
    /// event1_censor0 or event2_censor1
    #[arg(long)]
    pub status_convention: Option<String>,
    #[arg(long)]
    pub upper_col: Option<String>,
    /// Comma-separated covariate columns.
    #[arg(long)]
    pub covariates: Option<String>,
    /// e.g. tp_logistic, normal, tp_student_t
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n_keep: Option<String>,
    #[arg(long)]
    pub burn_in: Option<String>,
    #[arg(long)]
    pub thin: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// twalk or adaptive_rwm
    #[arg(long)]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub chains: Option<String>,
    /// Worker threads for chains and replications (0: all cores).
    #[arg(long)]
    pub threads: Option<String>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        [
            ("data", &self.data),
            ("time_col", &self.time_col),
            ("status_col", &self.status_col),
            ("status_convention", &self.status_convention),
            ("upper_col", &self.upper_col),
            ("covariates", &self.covariates),
            ("model", &self.model),
            ("n_keep", &self.n_keep),
            ("burn_in", &self.burn_in),
            ("thin", &self.thin),
            ("seed", &self.seed),
            ("algorithm", &self.algorithm),
            ("chains", &self.chains),
            ("threads", &self.threads),
            ("out_dir", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }

    /// Base defaults, then the config file, then `--set`, then named flags.
    pub fn resolve(&self, base: RunConfig, extra: &[(&str, &Option<String>)]) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load_onto(base, p)?,
            None => base,
        };
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            cfg.set(k.trim(), v)?;
        }
        for (k, v) in self.overrides() {
            cfg.set(k, v)?;
        }
        for (k, v) in extra {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }
}

/// Parses arguments, runs the command and returns the exit code. Errors are
/// reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}

pub fn run(cli: &Cli) -> Result<i32> {
    let (common, cfg) = match &cli.command {
        Command::Check(c) | Command::Fit(c) => (c, c.resolve(RunConfig::default(), &[])?),
        Command::Compare {
            common,
            models,
            reference,
            n_is,
        } => (
            common,
            common.resolve(
                RunConfig::default(),
                &[("models", models), ("reference", reference), ("n_is", n_is)],
            )?,
        ),
        Command::Predict {
            common,
            chain,
            subjects,
            quantiles,
            centring,
        } => (
            common,
            common.resolve(
                RunConfig::default(),
                &[
                    ("chain", chain),
                    ("subjects", subjects),
                    ("quantiles", quantiles),
                    ("centring", centring),
                ],
            )?,
        ),
        Command::Simulate {
            common,
            scenario,
            n,
            gamma,
            reps,
        } => (
            common,
            common.resolve(
                RunConfig::for_simulation(),
                &[
                    ("scenario", scenario),
                    ("sim_n", n),
                    ("gamma", gamma),
                    ("reps", reps),
                ],
            )?,
        ),
    };
    if let Some(p) = &common.dump_config {
        fs::write(p, cfg.to_text())?;
    }
    if cfg.threads > 0 {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global();
    }
    match &cli.command {
        Command::Check(_) => cmd_check(&cfg),
        Command::Fit(_) => cmd_fit(&cfg, common.force),
        Command::Compare { .. } => cmd_compare(&cfg, common.force),
        Command::Predict { .. } => cmd_predict(&cfg, common.force),
        Command::Simulate { .. } => cmd_simulate(&cfg),
    }
}

pub fn verdict_exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Satisfied | Verdict::NumericallyChecked => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATED,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .data
        .as_ref()
        .ok_or_else(|| Error::Config("no data file given (--data or data = ...)".into()))?;
    load_csv(path, &cfg.data_options())
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.out_dir)?;
    Ok(&cfg.out_dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn cmd_check(cfg: &RunConfig) -> Result<i32> {
    let data = load_data(cfg)?;
    let spec = cfg.model_spec()?;
    let report = propriety_report(&data, &spec, cfg.tol);
    let dir = out_dir(cfg)?;
    fs::write(dir.join("propriety.txt"), report.to_text())?;
    write_json(&dir.join("propriety.json"), &report)?;
    print!("{}", report.to_text());
    Ok(verdict_exit_code(report.overall))
}

/// Propriety gate before sampling. `Some(code)` means stop.
fn gate(report: &ProprietyReport, label: &str, force: bool) -> Option<i32> {
    if report.overall.is_ok() {
        return None;
    }
    if force {
        log::warn!(
            "{label}: propriety is {}; sampling because of --force",
            report.overall
        );
        return None;
    }
    eprint!("{}", report.to_text());
    eprintln!(
        "{label}: posterior propriety is {}; pass --force to sample anyway",
        report.overall
    );
    Some(verdict_exit_code(report.overall))
}

/// Chain seeds: the configured seed, then consecutive values.
fn chain_seeds(cfg: &RunConfig) -> Vec<u64> {
    (0..cfg.chains.max(1) as u64)
        .map(|k| cfg.seed.wrapping_add(k))
        .collect()
}

pub fn fit_chains(cfg: &RunConfig, data: &Dataset, spec: &ModelSpec) -> Result<Vec<Chain>> {
    let post = Posterior::new(data, spec)?;
    let mut base = cfg.chain_config(cfg.seed);
    base.init = default_init(&post, cfg.algorithm)?;
    sample_chains(&post, &base, &chain_seeds(cfg))
}

/// All chains' draws in one chain, in chain order.
pub fn pool(chains: &[Chain]) -> Chain {
    let mut out = chains[0].clone();
    for c in &chains[1..] {
        out.draws.extend(c.draws.iter().cloned());
        out.logpost.extend(c.logpost.iter().copied());
    }
    out
}

fn model_json(spec: &ModelSpec, cfg: &RunConfig) -> serde_json::Value {
    serde_json::json!({
        "label": spec.label(),
        "spec": spec,
        "covariates": cfg.covariates,
        "intercept": cfg.intercept,
    })
}

fn chain_file_names(stem: &str, k: usize) -> Vec<String> {
    if k == 1 {
        vec![format!("{stem}.csv")]
    } else {
        (1..=k).map(|i| format!("{stem}_{i}.csv")).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub file: String,
    pub n: usize,
    pub n_exact: usize,
    pub n_censored: usize,
    pub n_interval: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainRecord {
    pub file: String,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub n_draws: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub schema: &'static str,
    pub model: serde_json::Value,
    pub data: DataSummary,
    pub propriety: Verdict,
    pub forced: bool,
    pub chains: Vec<ChainRecord>,
    pub parameters: Vec<ParameterSummary>,
    pub diagnostics: Diagnostics,
}

fn data_summary(cfg: &RunConfig, data: &Dataset) -> DataSummary {
    DataSummary {
        file: cfg
            .data
            .as_ref()
            .map_or(String::new(), |p| p.display().to_string()),
        n: data.n(),
        n_exact: data.n_exact(),
        n_censored: data.n_censored(),
        n_interval: data.n_interval(),
        columns: data.names().to_vec(),
    }
}

pub fn summary_text(label: &str, data: &DataSummary, params: &[ParameterSummary]) -> String {
    let mut s = format!(
        "{label}  (n = {}, censored = {})\n",
        data.n, data.n_censored
    );
    s.push_str(&format!(
        "{:<12}{:>11}{:>11}{:>11}{:>11}\n",
        "parameter", "median", "map", "lower95", "upper95"
    ));
    for p in params {
        s.push_str(&format!(
            "{:<12}{:>11.4}{:>11.4}{:>11.4}{:>11.4}\n",
            p.name, p.median, p.map, p.lower95, p.upper95
        ));
    }
    s
}

pub fn cmd_fit(cfg: &RunConfig, force: bool) -> Result<i32> {
    let data = load_data(cfg)?;
    let spec = cfg.model_spec()?;
    let report = propriety_report(&data, &spec, cfg.tol);
    if let Some(code) = gate(&report, &spec.label(), force) {
        return Ok(code);
    }
    let chains = fit_chains(cfg, &data, &spec)?;
    let dir = out_dir(cfg)?;
    let files = chain_file_names("chain", chains.len());
    let model = model_json(&spec, cfg);
    for (c, f) in chains.iter().zip(&files) {
        write_chain(c, &dir.join(f), Some(model.clone()))?;
    }
    let pooled = pool(&chains);
    let summary = FitSummary {
        schema: FIT_SCHEMA,
        model,
        data: data_summary(cfg, &data),
        propriety: report.overall,
        forced: force && !report.overall.is_ok(),
        chains: chains
            .iter()
            .zip(&files)
            .map(|(c, f)| ChainRecord {
                file: f.clone(),
                seed: c.seed,
                acceptance_rate: c.acceptance_rate,
                n_draws: c.len(),
            })
            .collect(),
        parameters: summarize(&pooled)?,
        diagnostics: diagnostics(&chains)?,
    };
    let text = summary_text(&spec.label(), &summary.data, &summary.parameters);
    write_json(&dir.join("summary.json"), &summary)?;
    fs::write(dir.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub schema: &'static str,
    pub data: DataSummary,
    pub reference: String,
    pub models: Vec<crate::selection::ComparisonRow>,
}

fn model_key(name: &str) -> Result<String> {
    let (fam, tp) = parse_model_name(name)?;
    Ok(if tp { format!("tp_{fam}") } else { fam })
}

pub fn cmd_compare(cfg: &RunConfig, force: bool) -> Result<i32> {
    if cfg.models.is_empty() {
        return Err(Error::Config("no models to compare".into()));
    }
    let data = load_data(cfg)?;
    let keys = cfg
        .models
        .iter()
        .map(|m| model_key(m))
        .collect::<Result<Vec<_>>>()?;
    let reference = if cfg.reference.is_empty() {
        0
    } else {
        let r = model_key(&cfg.reference)?;
        keys.iter().position(|k| *k == r).ok_or_else(|| {
            Error::Config(format!(
                "reference '{}' is not among the models",
                cfg.reference
            ))
        })?
    };
    let dir = out_dir(cfg)?;
    let mut fitted = Vec::with_capacity(keys.len());
    for key in &keys {
        let (fam, tp) = parse_model_name(key)?;
        let spec = cfg.spec_for(&fam, tp)?;
        let report = propriety_report(&data, &spec, cfg.tol);
        if let Some(code) = gate(&report, &spec.label(), force) {
            return Ok(code);
        }
        let chains = fit_chains(cfg, &data, &spec)?;
        let model = model_json(&spec, cfg);
        for (c, f) in chains.iter().zip(chain_file_names(key, chains.len())) {
            write_chain(c, &dir.join(f), Some(model.clone()))?;
        }
        fitted.push(FittedModel {
            name: spec.label(),
            data: &data,
            spec,
            chain: pool(&chains),
        });
    }
    let opts = CompareOptions {
        n_is: cfg.n_is,
        seed: cfg.seed,
    };
    let rows = compare(&fitted, reference, &opts)?;
    let text = comparison_text(&rows);
    write_comparison_csv(&rows, fs::File::create(dir.join("comparison.csv"))?)?;
    fs::write(dir.join("comparison.txt"), &text)?;
    write_json(
        &dir.join("comparison.json"),
        &CompareSummary {
            schema: COMPARE_SCHEMA,
            data: data_summary(cfg, &data),
            reference: fitted[reference].name.clone(),
            models: rows,
        },
    )?;
    print!("{text}");
    Ok(EXIT_OK)
}

/// Reads a chain and the model spec stored in its sidecar.
pub fn load_fitted_chain(path: &Path) -> Result<(Chain, ModelSpec)> {
    let (chain, meta) = read_chain(path)?;
    let spec = meta
        .model
        .as_ref()
        .and_then(|m| m.get("spec"))
        .ok_or_else(|| Error::Config(format!("{}: sidecar has no model spec", path.display())))?;
    let spec: ModelSpec = serde_json::from_value(spec.clone())?;
    Ok((chain, spec))
}

pub fn cmd_predict(cfg: &RunConfig, force: bool) -> Result<i32> {
    let data = load_data(cfg)?;
    let (chain, spec) = match &cfg.chain {
        Some(p) => load_fitted_chain(p)?,
        None => {
            let spec = cfg.model_spec()?;
            let report = propriety_report(&data, &spec, cfg.tol);
            if let Some(code) = gate(&report, &spec.label(), force) {
                return Ok(code);
            }
            (pool(&fit_chains(cfg, &data, &spec)?), spec)
        }
    };
    let expect = spec.parameter_names(data.names());
    if chain.names != expect {
        return Err(Error::Config(format!(
            "chain columns {:?} do not match the data and model ({:?})",
            chain.names, expect
        )));
    }
    let chain = if chain.index_of("intercept").is_some() {
        recentre(&chain, &spec, cfg.centring)?
    } else {
        chain
    };
    let subjects = censored_subjects(&data, cfg.subjects);
    if subjects.is_empty() {
        return Err(Error::Prediction(
            "the data have no right-censored rows".into(),
        ));
    }
    let table = residual_life_table(&Predictive::new(&chain, &spec)?, &subjects, &cfg.quantiles)?;
    let dir = out_dir(cfg)?;
    table.write_csv(fs::File::create(dir.join("residual_life.csv"))?)?;
    let text = table.to_text();
    fs::write(dir.join("residual_life.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<i32> {
    let sc = Scenario::preset(cfg.scenario, cfg.sim_n, cfg.gamma)?;
    let table = run_study(&sc, cfg.reps, &cfg.sim_fit_config(), cfg.seed)?;
    let dir = out_dir(cfg)?;
    table.write_csv(fs::File::create(dir.join("study.csv"))?)?;
    table.write_records_csv(fs::File::create(dir.join("records.csv"))?)?;
    let text = table.to_text();
    fs::write(dir.join("study.txt"), &text)?;
    print!("{text}");
    Ok(EXIT_OK)
}
