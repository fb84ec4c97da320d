use serde::{Deserialize, Serialize};

use super::Chain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub names: Vec<String>,
    /// `None` when fewer than two chains were supplied.
    pub split_rhat: Option<Vec<f64>>,
    pub ess: Vec<f64>,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

fn centred(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

/// Biased autocovariance at one lag.
fn autocov(c: &[f64], lag: usize) -> f64 {
    let n = c.len();
    c[..n - lag]
        .iter()
        .zip(&c[lag..])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / n as f64
}

/// Effective sample size from a set of equal-length sequences, using
/// Geyer's initial monotone sequence on paired autocorrelations. A chain
/// with negative autocorrelation can exceed its own length; the estimate is
/// capped at `N log10 N`.
pub fn ess(seqs: &[&[f64]]) -> f64 {
    let m = seqs.len();
    let n = seqs[0].len();
    let total = (m * n) as f64;
    if n < 4 {
        return total;
    }
    let cs: Vec<Vec<f64>> = seqs.iter().map(|s| centred(s)).collect();
    let means: Vec<f64> = seqs
        .iter()
        .map(|s| s.iter().sum::<f64>() / n as f64)
        .collect();
    let nf = n as f64;
    let w = cs
        .iter()
        .map(|c| autocov(c, 0) * nf / (nf - 1.0))
        .sum::<f64>()
        / m as f64;
    let b_over_n = if m > 1 { mean_var(&means).1 } else { 0.0 };
    let var_plus = w * (nf - 1.0) / nf + b_over_n;
    if !(var_plus > 0.0) {
        return total;
    }
    let rho =
        |t: usize| 1.0 - (w - cs.iter().map(|c| autocov(c, t)).sum::<f64>() / m as f64) / var_plus;

    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let mut pair = rho(t) + rho(t + 1);
        if pair < 0.0 {
            break;
        }
        if pair > prev {
            pair = prev;
        }
        sum += pair;
        prev = pair;
        t += 2;
    }
    let tau = (-1.0 + 2.0 * sum).max(1.0 / total.log10());
    total / tau
}

/// Split potential-scale-reduction factor.
pub fn split_rhat(seqs: &[&[f64]]) -> f64 {
    let half = seqs[0].len() / 2;
    let parts: Vec<&[f64]> = seqs
        .iter()
        .flat_map(|s| [&s[..half], &s[s.len() - half..]])
        .collect();
    let n = half as f64;
    let stats: Vec<(f64, f64)> = parts.iter().map(|p| mean_var(p)).collect();
    let w = stats.iter().map(|s| s.1).sum::<f64>() / stats.len() as f64;
    let means: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let b = n * mean_var(&means).1;
    let var_plus = (n - 1.0) / n * w + b / n;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (var_plus / w).sqrt()
}

/// R-hat and ESS per coordinate. With a single chain only the ESS is
/// reported.
pub fn diagnostics(chains: &[Chain]) -> Result<Diagnostics> {
    let first = chains
        .first()
        .ok_or_else(|| Error::Sampler("diagnostics need at least one chain".into()))?;
    let (n, dim) = (first.draws.len(), first.names.len());
    if chains
        .iter()
        .any(|c| c.draws.len() != n || c.names.len() != dim)
    {
        return Err(Error::Sampler(
            "chains must have equal length and dimension".into(),
        ));
    }
    if n < 4 {
        return Err(Error::Sampler("chains need at least four draws".into()));
    }
    let cols: Vec<Vec<Vec<f64>>> = chains
        .iter()
        .map(|c| (0..dim).map(|j| c.column(j)).collect())
        .collect();
    let mut ess_v = Vec::with_capacity(dim);
    let mut rhat_v = Vec::with_capacity(dim);
    for j in 0..dim {
        let seqs: Vec<&[f64]> = cols.iter().map(|c| c[j].as_slice()).collect();
        ess_v.push(ess(&seqs));
        rhat_v.push(split_rhat(&seqs));
    }
    Ok(Diagnostics {
        names: first.names.clone(),
        split_rhat: (chains.len() >= 2).then_some(rhat_v),
        ess: ess_v,
    })
}
