//! Oracles and fixtures shared by the integration tests. They avoid the
//! crate's own quadrature and LP code so they can check it independently.
#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tpreg::data::{load_csv, DataOptions};
use tpreg::model::Dataset;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn ncctg() -> Dataset {
    let opts = DataOptions {
        covariates: vec!["age".into(), "sex".into(), "ph.ecog".into()],
        ..Default::default()
    };
    load_csv(&fixture("lung_complete.csv"), &opts).unwrap()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_c^∞ f` through `z = c + s·u/(1-u)`, `u ∈ [0, 1)`. The integrand must
/// decay fast enough that the mapped integrand vanishes at `u = 1`.
pub fn integral_right<F: Fn(f64) -> f64>(f: F, c: f64, s: f64, n: usize) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let z = c + s * u / (1.0 - u);
        f(z) * s / ((1.0 - u) * (1.0 - u))
    };
    simpson(g, 0.0, 1.0, n)
}

/// `∫_{-∞}^c f`.
pub fn integral_left<F: Fn(f64) -> f64>(f: F, c: f64, s: f64, n: usize) -> f64 {
    integral_right(|z| f(2.0 * c - z), c, s, n)
}

/// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = cdf(v);
            f64::max(c - i as f64 / n, (i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

/// Root of a non-decreasing `f - target` by bisection on `[lo, hi]`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest bound violation at `eta`; the system is feasible iff its
/// minimum over η is ≤ 0.
pub fn violation(x: &DMatrix<f64>, lo: &[f64], hi: &[f64], eta: &[f64]) -> f64 {
    (0..x.nrows())
        .map(|i| {
            let v: f64 = (0..x.ncols()).map(|j| x[(i, j)] * eta[j]).sum();
            f64::max(lo[i] - v, v - hi[i])
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Brute-force minimum of the (convex) violation by repeatedly refined
/// grids. The search runs over coordinates of an orthonormal basis of the
/// column space of `x`, so that nearly collinear columns do not turn the
/// violation into a narrow valley the grid can step over. Returns the
/// minimum and whether it sits on the outer boundary of the search box.
pub fn grid_oracle(x: &DMatrix<f64>, lo: &[f64], hi: &[f64]) -> (f64, bool) {
    let n = x.nrows();
    let svd = x.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let basis: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > 1e-10 * smax)
        .collect();
    let r = basis.len();
    let bound = lo.iter().chain(hi).fold(0.0f64, |m, v| m.max(v.abs()));
    let radius = (n as f64).sqrt() * (bound + 1.0);
    let viol = |xi: &[f64]| {
        (0..n)
            .map(|i| {
                let v: f64 = basis.iter().zip(xi).map(|(&k, c)| u[(i, k)] * c).sum();
                f64::max(lo[i] - v, v - hi[i])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let g = 21usize;
    let mut centre = vec![0.0; r];
    let mut half = radius;
    let mut best = (viol(&centre), centre.clone());
    for _ in 0..40 {
        let step = 2.0 * half / (g - 1) as f64;
        for k in 0..g.pow(r as u32) {
            let mut idx = k;
            let xi: Vec<f64> = (0..r)
                .map(|j| {
                    let i = idx % g;
                    idx /= g;
                    centre[j] - half + i as f64 * step
                })
                .collect();
            let v = viol(&xi);
            if v < best.0 {
                best = (v, xi);
            }
        }
        centre = best.1.clone();
        half = 2.0 * step;
    }
    let on_edge = best.1.iter().any(|v| v.abs() > 0.99 * radius);
    (best.0, on_edge)
}

pub fn random_instance(
    rng: &mut ChaCha8Rng,
    p: usize,
    n: usize,
    narrow: bool,
) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let x = DMatrix::from_fn(n, p, |_, j| {
        if j == 0 {
            1.0
        } else {
            rng.random_range(-1.0..1.0)
        }
    });
    let eta: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
    let noise = [0.0, 0.2, 0.6, 1.5][rng.random_range(0..4)];
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for i in 0..n {
        let v: f64 = (0..p).map(|j| x[(i, j)] * eta[j]).sum();
        let c = v + noise * Distribution::<f64>::sample(&StandardNormal, rng);
        let w = if narrow {
            rng.random_range(0.02..0.2)
        } else {
            rng.random_range(0.05..1.5)
        };
        lo.push(c - w / 2.0);
        hi.push(c + w / 2.0);
    }
    (x, lo, hi)
}
