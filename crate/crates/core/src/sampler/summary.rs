use serde::{Deserialize, Serialize};

use super::Chain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub median: f64,
    pub map: f64,
    pub lower95: f64,
    pub upper95: f64,
}

/// Sample quantile with linear interpolation between order statistics
/// (R's default, "type 7"). `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Median, MAP and equal-tailed 95% interval for every parameter.
pub fn summarize(chain: &Chain) -> Result<Vec<ParameterSummary>> {
    if chain.draws.is_empty() {
        return Err(Error::Sampler("cannot summarise an empty chain".into()));
    }
    let map_row = chain
        .logpost
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(chain
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut col = chain.column(j);
            col.sort_by(f64::total_cmp);
            ParameterSummary {
                name: name.clone(),
                median: quantile_sorted(&col, 0.5),
                map: chain.draws[map_row][j],
                lower95: quantile_sorted(&col, 0.025),
                upper95: quantile_sorted(&col, 0.975),
            }
        })
        .collect())
}
