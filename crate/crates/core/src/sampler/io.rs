//! Chain persistence: a CSV of draws (header = parameter names) next to a
//! JSON sidecar holding the run settings, acceptance rate and the
//! log-posterior of every draw.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Algorithm, Chain, ChainConfig};
use crate::error::{Error, Result};
use crate::model::CentringRule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMeta {
    pub names: Vec<String>,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub n_keep: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub init: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    /// Free-form description of the model that produced the chain.
    #[serde(default)]
    pub model: Option<serde_json::Value>,
    pub logpost: Vec<f64>,
    #[serde(default)]
    pub centring: CentringRule,
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `path` and its `.json` sidecar. Floats use the shortest
/// representation that reads back bit-for-bit.
pub fn write_chain(chain: &Chain, path: &Path, model: Option<serde_json::Value>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(&chain.names)?;
    for row in &chain.draws {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    let meta = ChainMeta {
        names: chain.names.clone(),
        algorithm: chain.config.algorithm,
        seed: chain.seed,
        n_keep: chain.config.n_keep,
        burn_in: chain.config.burn_in,
        thin: chain.config.thin,
        init: chain.config.init.clone(),
        acceptance_rate: chain.acceptance_rate,
        model,
        logpost: chain.logpost.clone(),
        centring: chain.centring,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(sidecar_path(path))?), &meta)?;
    Ok(())
}

pub fn read_chain(path: &Path) -> Result<(Chain, ChainMeta)> {
    let meta: ChainMeta = serde_json::from_reader(BufReader::new(File::open(sidecar_path(path))?))?;
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let names: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if names != meta.names {
        return Err(Error::Data {
            row: 0,
            column: "header".into(),
            message: "chain header does not match its sidecar".into(),
        });
    }
    let mut draws = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.trim().parse::<f64>().map_err(|e| Error::Data {
                    row: i + 1,
                    column: names[j].clone(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        draws.push(row);
    }
    if draws.len() != meta.logpost.len() {
        return Err(Error::Data {
            row: draws.len(),
            column: "logpost".into(),
            message: "sidecar log-posterior length differs from the draw count".into(),
        });
    }
    let chain = Chain {
        names,
        draws,
        logpost: meta.logpost.clone(),
        acceptance_rate: meta.acceptance_rate,
        seed: meta.seed,
        config: ChainConfig {
            n_keep: meta.n_keep,
            burn_in: meta.burn_in,
            thin: meta.thin,
            seed: meta.seed,
            algorithm: meta.algorithm,
            init: meta.init.clone(),
        },
        centring: meta.centring,
    };
    Ok((chain, meta))
}
