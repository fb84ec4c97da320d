//! Python bindings: two-piece distributions, data loading, propriety
//! checks, posterior sampling, model comparison, residual-life prediction
//! and simulation studies.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tpreg_core::data::{load_csv as load_csv_core, DataOptions, StatusConvention};
use tpreg_core::distributions::{BaselineKind, SkewParameterisation, TwoPieceParams};
use tpreg_core::model::{CentringRule, ModelSpec as CoreSpec, Posterior};
use tpreg_core::prediction::{censored_subjects, recentre, residual_life_table, Predictive};
use tpreg_core::propriety::{propriety_report, COLUMN_SPACE_TOL};
use tpreg_core::sampler::{default_init, sample_chains, summarize, Algorithm, ChainConfig};
use tpreg_core::selection::{compare as compare_core, CompareOptions, FittedModel};
use tpreg_core::simstudy::{run_study, FitConfig, Scenario};

fn err(e: tpreg_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn baseline_kind(name: &str, df: f64) -> PyResult<BaselineKind> {
    Ok(match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "normal" => BaselineKind::Normal,
        "laplace" => BaselineKind::Laplace,
        "logistic" => BaselineKind::Logistic,
        "student_t" | "t" => BaselineKind::StudentT { df },
        other => return Err(PyValueError::new_err(format!("unknown baseline '{other}'"))),
    })
}

fn parameterisation(name: &str) -> PyResult<SkewParameterisation> {
    match name {
        "epsilon_skew" => Ok(SkewParameterisation::EpsilonSkew),
        "inverse_scale" => Ok(SkewParameterisation::InverseScale),
        _ => Err(PyValueError::new_err(format!(
            "parameterisation must be epsilon_skew or inverse_scale, got '{name}'"
        ))),
    }
}

/// Two-piece distribution with a normal, Laplace, logistic or Student-t
/// baseline.
#[pyclass(frozen)]
struct TwoPiece {
    inner: tpreg_core::distributions::TwoPiece,
}

#[pymethods]
impl TwoPiece {
    #[new]
    #[pyo3(signature = (mu=0.0, sigma=1.0, gamma=0.0, baseline="normal", df=5.0, parameterisation="epsilon_skew"))]
    fn new(
        mu: f64,
        sigma: f64,
        gamma: f64,
        baseline: &str,
        df: f64,
        parameterisation: &str,
    ) -> PyResult<Self> {
        let p = TwoPieceParams::new(
            mu,
            sigma,
            gamma,
            baseline_kind(baseline, df)?,
            self::parameterisation(parameterisation)?,
        )
        .map_err(err)?;
        Ok(TwoPiece {
            inner: tpreg_core::distributions::TwoPiece::new(p).map_err(err)?,
        })
    }

    fn logpdf(&self, z: f64) -> f64 {
        self.inner.ln_pdf(z)
    }

    fn cdf(&self, z: f64) -> f64 {
        self.inner.cdf(z)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        tpreg_core::distributions::tp_quantile(p, self.inner.params()).map_err(err)
    }

    fn median(&self) -> f64 {
        self.inner.median()
    }

    #[pyo3(signature = (n, seed=0))]
    fn sample(&self, n: usize, seed: u64) -> PyResult<Vec<f64>> {
        tpreg_core::distributions::tp_sample(n, self.inner.params(), seed).map_err(err)
    }
}

/// Regression data on the model scale.
#[pyclass(frozen)]
struct Dataset {
    inner: tpreg_core::model::Dataset,
}

#[pymethods]
impl Dataset {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn n_censored(&self) -> usize {
        self.inner.n_censored()
    }

    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.names().to_vec()
    }
}

#[pyfunction]
#[pyo3(signature = (path, covariates, time_col="time", status_col="status", status_convention="event1_censor0", intercept=true, log_response=true))]
fn load_csv(
    path: &str,
    covariates: Vec<String>,
    time_col: &str,
    status_col: &str,
    status_convention: &str,
    intercept: bool,
    log_response: bool,
) -> PyResult<Dataset> {
    let status: StatusConvention = status_convention.parse().map_err(err)?;
    let opts = DataOptions {
        time_col: time_col.into(),
        status_col: (!status_col.is_empty()).then(|| status_col.into()),
        status,
        upper_col: None,
        covariates,
        intercept,
        log_response,
    };
    Ok(Dataset {
        inner: load_csv_core(std::path::Path::new(path), &opts).map_err(err)?,
    })
}

/// Error family and prior settings of a regression model.
#[pyclass(frozen)]
struct ModelSpec {
    inner: CoreSpec,
}

#[pymethods]
impl ModelSpec {
    #[new]
    #[pyo3(signature = (baseline="logistic", two_piece=true, df=5.0, free_delta=true, q=1.0, a0=0.5, b0=0.5, d=10.0, parameterisation="epsilon_skew"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        baseline: &str,
        two_piece: bool,
        df: f64,
        free_delta: bool,
        q: f64,
        a0: f64,
        b0: f64,
        d: f64,
        parameterisation: &str,
    ) -> PyResult<Self> {
        let spec = CoreSpec {
            baseline: baseline_kind(baseline, df)?,
            two_piece,
            parameterisation: self::parameterisation(parameterisation)?,
            q,
            a0,
            b0,
            d,
            free_delta,
        };
        spec.validate().map_err(err)?;
        Ok(ModelSpec { inner: spec })
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }
}

/// Posterior draws, one row per kept iteration.
#[pyclass(frozen)]
struct Chain {
    inner: tpreg_core::sampler::Chain,
}

#[pymethods]
impl Chain {
    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.names.clone()
    }

    #[getter]
    fn draws(&self) -> Vec<Vec<f64>> {
        self.inner.draws.clone()
    }

    #[getter]
    fn logpost(&self) -> Vec<f64> {
        self.inner.logpost.clone()
    }

    #[getter]
    fn acceptance_rate(&self) -> f64 {
        self.inner.acceptance_rate
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Posterior median, MAP draw and 95% interval per parameter.
    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        summarize(&self.inner)
            .map_err(err)?
            .into_iter()
            .map(|s| {
                let d = PyDict::new(py);
                d.set_item("name", s.name)?;
                d.set_item("median", s.median)?;
                d.set_item("map", s.map)?;
                d.set_item("lower95", s.lower95)?;
                d.set_item("upper95", s.upper95)?;
                Ok(d)
            })
            .collect()
    }
}

#[pyfunction]
#[pyo3(signature = (data, spec, tol=COLUMN_SPACE_TOL))]
fn check_propriety<'py>(
    py: Python<'py>,
    data: &Dataset,
    spec: &ModelSpec,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = propriety_report(&data.inner, &spec.inner, tol);
    let d = PyDict::new(py);
    d.set_item("overall", r.overall.to_string())?;
    d.set_item("path", r.path.clone())?;
    d.set_item("text", r.to_text())?;
    Ok(d)
}

#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (data, spec, n_keep=10_000, burn_in=50_000, thin=25, seed=1, algorithm="twalk"))]
fn fit(
    py: Python<'_>,
    data: &Dataset,
    spec: &ModelSpec,
    n_keep: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    algorithm: &str,
) -> PyResult<Chain> {
    let algorithm: Algorithm = algorithm.parse().map_err(err)?;
    let (data, spec) = (&data.inner, &spec.inner);
    let chain = py.detach(|| {
        let post = Posterior::new(data, spec)?;
        let cfg = ChainConfig {
            n_keep,
            burn_in,
            thin,
            seed,
            algorithm,
            init: default_init(&post, algorithm)?,
        };
        sample_chains(&post, &cfg, &[seed]).map(|mut v| v.remove(0))
    });
    Ok(Chain {
        inner: chain.map_err(err)?,
    })
}

/// BIC, LPML and importance-sampling Bayes factors against the first model.
#[pyfunction]
#[pyo3(signature = (data, models, n_is=20_000, seed=1))]
fn compare<'py>(
    py: Python<'py>,
    data: &Dataset,
    models: Vec<(PyRef<'py, ModelSpec>, PyRef<'py, Chain>)>,
    n_is: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    if models.is_empty() {
        return Err(PyValueError::new_err("no models to compare"));
    }
    let fitted: Vec<FittedModel> = models
        .iter()
        .map(|(s, c)| FittedModel {
            name: s.inner.label(),
            data: &data.inner,
            spec: s.inner,
            chain: c.inner.clone(),
        })
        .collect();
    let rows = py
        .detach(|| compare_core(&fitted, 0, &CompareOptions { n_is, seed }))
        .map_err(err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("model", r.model_name)?;
            d.set_item("bic", r.bic)?;
            d.set_item("lpml", r.lpml)?;
            d.set_item("log_marginal", r.log_marginal)?;
            d.set_item("bayes_factor", r.bf_vs_reference)?;
            Ok(d)
        })
        .collect()
}

/// Residual-life quantiles for the first `subjects` right-censored rows,
/// with the error law centred at its median.
#[pyfunction]
#[pyo3(signature = (data, spec, chain, subjects=5, probs=vec![0.05, 0.25, 0.5, 0.75, 0.95]))]
fn residual_life(
    py: Python<'_>,
    data: &Dataset,
    spec: &ModelSpec,
    chain: &Chain,
    subjects: usize,
    probs: Vec<f64>,
) -> PyResult<Vec<(String, Vec<f64>)>> {
    let table = py
        .detach(|| {
            let c = recentre(&chain.inner, &spec.inner, CentringRule::Median)?;
            let subs = censored_subjects(&data.inner, subjects);
            residual_life_table(&Predictive::new(&c, &spec.inner)?, &subs, &probs)
        })
        .map_err(err)?;
    Ok(table.subjects.into_iter().zip(table.values).collect())
}

/// Runs a preset simulation scenario; returns one row per parameter.
#[pyfunction]
#[pyo3(signature = (scenario, n=100, gamma=0.5, reps=200, seed=1, n_keep=1000, burn_in=5000, thin=25))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    scenario: u8,
    n: usize,
    gamma: f64,
    reps: usize,
    seed: u64,
    n_keep: usize,
    burn_in: usize,
    thin: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let sc = Scenario::preset(scenario, n, gamma).map_err(err)?;
    let cfg = FitConfig {
        n_keep,
        burn_in,
        thin,
        ..FitConfig::default()
    };
    let table = py
        .detach(|| run_study(&sc, reps, &cfg, seed))
        .map_err(err)?;
    table
        .rows
        .into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("parameter", r.parameter)?;
            d.set_item("truth", r.truth)?;
            d.set_item("coverage", r.coverage)?;
            d.set_item("median", r.median_of_medians)?;
            d.set_item("map", r.median_map)?;
            d.set_item("mle", r.median_mle)?;
            d.set_item("bf01", r.median_bf01)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "tpreg")]
fn tpreg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TwoPiece>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<ModelSpec>()?;
    m.add_class::<Chain>()?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(check_propriety, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(residual_life, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
