//! CSV ingestion for survival and regression data.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CensoredObservation, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusConvention {
    /// 1 = event observed, 0 = right-censored.
    #[default]
    Event1Censor0,
    /// 2 = event observed, 1 = right-censored.
    Event2Censor1,
}

impl std::str::FromStr for StatusConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "event1_censor0" => Ok(StatusConvention::Event1Censor0),
            "event2_censor1" => Ok(StatusConvention::Event2Censor1),
            _ => Err(Error::Config(format!(
                "status convention must be event1_censor0 or event2_censor1, got '{s}'"
            ))),
        }
    }
}

impl std::fmt::Display for StatusConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StatusConvention::Event1Censor0 => "event1_censor0",
            StatusConvention::Event2Censor1 => "event2_censor1",
        })
    }
}

/// Column mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataOptions {
    pub time_col: String,
    /// Absent: every row is an exact response.
    pub status_col: Option<String>,
    pub status: StatusConvention,
    /// Optional upper end of interval-censored rows; an empty cell keeps the
    /// row's status, a zero `time` with an upper value marks left-censoring.
    pub upper_col: Option<String>,
    pub covariates: Vec<String>,
    pub intercept: bool,
    /// Model `log(time)` (AFT); off for plain linear regression.
    pub log_response: bool,
}

impl Default for DataOptions {
    fn default() -> Self {
        DataOptions {
            time_col: "time".into(),
            status_col: Some("status".into()),
            status: StatusConvention::default(),
            upper_col: None,
            covariates: vec![],
            intercept: true,
            log_response: true,
        }
    }
}

fn parse_cell(s: &str, row: usize, column: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Data {
        row,
        column: column.to_string(),
        message: format!("cannot parse '{s}' as a number"),
    })
}

fn transform(v: f64, log: bool, row: usize, column: &str) -> Result<f64> {
    if !log {
        return Ok(v);
    }
    if !(v > 0.0) {
        return Err(Error::Data {
            row,
            column: column.to_string(),
            message: format!("time must be positive to take logs, got {v}"),
        });
    }
    Ok(v.ln())
}

/// Reads a headed CSV into a [`Dataset`]. Row numbers in errors count data
/// rows from 1.
pub fn load_csv(path: &Path, opts: &DataOptions) -> Result<Dataset> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Data {
                row: 0,
                column: name.to_string(),
                message: "column not found in header".into(),
            })
    };
    let t_idx = col(&opts.time_col)?;
    let s_idx = opts.status_col.as_deref().map(col).transpose()?;
    let u_idx = opts.upper_col.as_deref().map(col).transpose()?;
    let x_idx: Vec<usize> = opts
        .covariates
        .iter()
        .map(|c| col(c))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut resp = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let mut x = Vec::with_capacity(x_idx.len() + 1);
        if opts.intercept {
            x.push(1.0);
        }
        for (&j, name) in x_idx.iter().zip(&opts.covariates) {
            x.push(parse_cell(&rec[j], row, name)?);
        }
        let t = parse_cell(&rec[t_idx], row, &opts.time_col)?;
        let upper = match u_idx {
            Some(j) if !rec[j].trim().is_empty() => Some(parse_cell(
                &rec[j],
                row,
                opts.upper_col.as_deref().unwrap(),
            )?),
            _ => None,
        };
        let obs = if let Some(u) = upper {
            let ucol = opts.upper_col.as_deref().unwrap();
            if t == 0.0 && opts.log_response {
                CensoredObservation::Left {
                    y: transform(u, true, row, ucol)?,
                }
            } else {
                CensoredObservation::Interval {
                    lower: transform(t, opts.log_response, row, &opts.time_col)?,
                    upper: transform(u, opts.log_response, row, ucol)?,
                }
            }
        } else {
            let y = transform(t, opts.log_response, row, &opts.time_col)?;
            let event = match s_idx {
                None => true,
                Some(j) => {
                    let name = opts.status_col.as_deref().unwrap();
                    let s = parse_cell(&rec[j], row, name)?;
                    match (opts.status, s as i64, s.fract() == 0.0) {
                        (StatusConvention::Event1Censor0, 1, true)
                        | (StatusConvention::Event2Censor1, 2, true) => true,
                        (StatusConvention::Event1Censor0, 0, true)
                        | (StatusConvention::Event2Censor1, 1, true) => false,
                        _ => {
                            return Err(Error::Data {
                                row,
                                column: name.to_string(),
                                message: format!("status {s} is invalid under {}", opts.status),
                            })
                        }
                    }
                }
            };
            if event {
                CensoredObservation::Exact { y }
            } else {
                CensoredObservation::Right { y }
            }
        };
        obs.validate().map_err(|e| Error::Data {
            row,
            column: opts.time_col.clone(),
            message: e.to_string(),
        })?;
        rows.push(x);
        resp.push(obs);
    }
    if rows.is_empty() {
        return Err(Error::Data {
            row: 0,
            column: opts.time_col.clone(),
            message: "no data rows".into(),
        });
    }
    let mut names = Vec::new();
    if opts.intercept {
        names.push("intercept".to_string());
    }
    names.extend(opts.covariates.iter().cloned());
    let p = names.len();
    let design = nalgebra::DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    Dataset::new(design, resp, names)
}
