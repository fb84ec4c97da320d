//! MCMC over the unconstrained parameter space.

mod diagnostics;
mod io;
mod rwm;
mod summary;
mod twalk;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diagnostics::{diagnostics, ess, split_rhat, Diagnostics};
pub use io::{read_chain, write_chain, ChainMeta};
pub use summary::{quantile_sorted, summarize, ParameterSummary};

use crate::error::{Error, Result};
use crate::model::{CentringRule, ParameterVector, Posterior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    TWalk,
    AdaptiveRwm,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "twalk" => Ok(Algorithm::TWalk),
            "adaptiverwm" | "rwm" => Ok(Algorithm::AdaptiveRwm),
            _ => Err(Error::Config(format!("unknown sampler '{s}'"))),
        }
    }
}

/// Chain length settings plus starting points on the unconstrained scale.
/// The t-walk needs two starting points; the random walk uses the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_keep: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub init: Vec<Vec<f64>>,
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_keep == 0 || self.thin == 0 {
            return Err(Error::Config("n_keep and thin must be at least 1".into()));
        }
        let need = match self.algorithm {
            Algorithm::TWalk => 2,
            Algorithm::AdaptiveRwm => 1,
        };
        if self.init.len() < need {
            return Err(Error::Config(format!(
                "{:?} needs {need} initial point(s), got {}",
                self.algorithm,
                self.init.len()
            )));
        }
        let d = self.init[0].len();
        if d == 0 || self.init.iter().any(|x| x.len() != d) {
            return Err(Error::Config(
                "initial points must share a non-zero dimension".into(),
            ));
        }
        if self.algorithm == Algorithm::TWalk
            && self.init[0].iter().zip(&self.init[1]).any(|(a, b)| a == b)
        {
            return Err(Error::Config(
                "t-walk initial points must differ in every coordinate".into(),
            ));
        }
        Ok(())
    }
}

/// Draws on whatever scale the target was defined on.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChain {
    pub draws: Vec<Vec<f64>>,
    pub log_target: Vec<f64>,
    pub acceptance_rate: f64,
}

/// Kept draws on the constrained scale together with the (constrained)
/// log-posterior of each draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub names: Vec<String>,
    pub draws: Vec<Vec<f64>>,
    pub logpost: Vec<f64>,
    pub acceptance_rate: f64,
    pub seed: u64,
    pub config: ChainConfig,
    pub centring: CentringRule,
}

impl Chain {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.iter().map(|r| r[j]).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }
}

enum Kernel {
    TWalk(twalk::TWalk),
    Rwm(rwm::AdaptiveRwm),
}

/// Runs one chain against a log-density on ℝ^d.
pub fn run_chain<F>(target: F, config: &ChainConfig) -> Result<RawChain>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let l0 = target(&config.init[0]);
    let mut kernel = match config.algorithm {
        Algorithm::TWalk => {
            let l1 = target(&config.init[1]);
            if !(l0.is_finite() && l1.is_finite()) {
                return Err(Error::Sampler(format!(
                    "target is not finite at both initial points ({l0}, {l1})"
                )));
            }
            Kernel::TWalk(twalk::TWalk::new(
                config.init[0].clone(),
                config.init[1].clone(),
                l0,
                l1,
            ))
        }
        Algorithm::AdaptiveRwm => {
            if !l0.is_finite() {
                return Err(Error::Sampler(format!(
                    "target is not finite at the initial point ({l0})"
                )));
            }
            Kernel::Rwm(rwm::AdaptiveRwm::new(config.init[0].clone(), l0))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let step = |k: &mut Kernel, rng: &mut ChaCha8Rng| match k {
        Kernel::TWalk(t) => t.step(rng, &target),
        Kernel::Rwm(r) => r.step(rng, &target),
    };
    for _ in 0..config.burn_in {
        step(&mut kernel, &mut rng);
    }
    if let Kernel::Rwm(r) = &mut kernel {
        r.freeze();
    }
    let mut draws = Vec::with_capacity(config.n_keep);
    let mut log_target = Vec::with_capacity(config.n_keep);
    let mut accepted = 0usize;
    for _ in 0..config.n_keep {
        for _ in 0..config.thin {
            accepted += usize::from(step(&mut kernel, &mut rng));
        }
        let (x, lx) = match &kernel {
            Kernel::TWalk(t) => t.current(),
            Kernel::Rwm(r) => r.current(),
        };
        draws.push(x.to_vec());
        log_target.push(lx);
    }
    Ok(RawChain {
        draws,
        log_target,
        acceptance_rate: accepted as f64 / (config.n_keep * config.thin) as f64,
    })
}

/// Default starting points for a posterior: the least-squares start and,
/// for the t-walk, a second point shifted by 10% of each coordinate (at
/// least 0.1) on the unconstrained scale.
pub fn default_init(posterior: &Posterior, algorithm: Algorithm) -> Result<Vec<Vec<f64>>> {
    let u0 = posterior.to_unconstrained(&posterior.initial_point()?);
    Ok(match algorithm {
        Algorithm::TWalk => {
            let u1 = u0.iter().map(|v| v + 0.1 * v.abs().max(1.0)).collect();
            vec![u0, u1]
        }
        Algorithm::AdaptiveRwm => vec![u0],
    })
}

pub fn init_from_parameters(posterior: &Posterior, points: &[ParameterVector]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|t| posterior.to_unconstrained(t))
        .collect()
}

/// Samples a posterior on the unconstrained scale and stores the draws
/// back-transformed, with their constrained-scale log-posterior.
pub fn sample_posterior(posterior: &Posterior, config: &ChainConfig) -> Result<Chain> {
    let dim = posterior.dim();
    if config.init.iter().any(|u| u.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: config
                .init
                .iter()
                .map(Vec::len)
                .find(|&l| l != dim)
                .unwrap_or(0),
        });
    }
    let raw = run_chain(|u| posterior.ln_density_unconstrained(u), config)?;
    let mut draws = Vec::with_capacity(raw.draws.len());
    let mut logpost = Vec::with_capacity(raw.draws.len());
    for u in &raw.draws {
        let theta = posterior.from_unconstrained(u);
        let lp = posterior.ln_posterior(&theta);
        if !lp.is_finite() {
            return Err(Error::Sampler(
                "stored draw has non-finite log-posterior".into(),
            ));
        }
        draws.push(theta.to_flat(posterior.spec));
        logpost.push(lp);
    }
    Ok(Chain {
        names: posterior.parameter_names(),
        draws,
        logpost,
        acceptance_rate: raw.acceptance_rate,
        seed: config.seed,
        config: config.clone(),
        centring: CentringRule::Mode,
    })
}

/// Runs independent chains in parallel, returned in the order of `seeds`.
pub fn sample_chains(
    posterior: &Posterior,
    base: &ChainConfig,
    seeds: &[u64],
) -> Result<Vec<Chain>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = ChainConfig {
                seed,
                ..base.clone()
            };
            sample_posterior(posterior, &cfg)
        })
        .collect()
}
