//! Random-walk Metropolis with a Gaussian proposal whose covariance and
//! global scale are adapted during burn-in only.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

const TARGET_ACCEPT: f64 = 0.234;
const REFRESH_EVERY: usize = 100;

pub(crate) struct AdaptiveRwm {
    x: Vec<f64>,
    lx: f64,
    ln_scale: f64,
    chol: DMatrix<f64>,
    // running moments for the proposal covariance
    count: f64,
    mean: DVector<f64>,
    m2: DMatrix<f64>,
    adapting: bool,
    iter: usize,
    y: Vec<f64>,
    z: DVector<f64>,
}

impl AdaptiveRwm {
    pub(crate) fn new(x: Vec<f64>, lx: f64) -> Self {
        let d = x.len();
        AdaptiveRwm {
            ln_scale: (2.38 / (d as f64).sqrt()).ln(),
            chol: DMatrix::identity(d, d),
            count: 0.0,
            mean: DVector::zeros(d),
            m2: DMatrix::zeros(d, d),
            adapting: true,
            iter: 0,
            y: vec![0.0; d],
            z: DVector::zeros(d),
            x,
            lx,
        }
    }

    pub(crate) fn current(&self) -> (&[f64], f64) {
        (&self.x, self.lx)
    }

    pub(crate) fn freeze(&mut self) {
        self.adapting = false;
    }

    pub(crate) fn step<R, F>(&mut self, rng: &mut R, target: &F) -> bool
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> f64,
    {
        let d = self.x.len();
        for j in 0..d {
            self.z[j] = rng.sample(StandardNormal);
        }
        let step = &self.chol * &self.z;
        let s = self.ln_scale.exp();
        for j in 0..d {
            self.y[j] = self.x[j] + s * step[j];
        }
        let ly = target(&self.y);
        let log_a = if ly.is_finite() {
            ly - self.lx
        } else {
            f64::NEG_INFINITY
        };
        let u: f64 = rng.random();
        let accept = log_a.is_finite() && (log_a >= 0.0 || u.ln() < log_a);
        if accept {
            self.x.copy_from_slice(&self.y);
            self.lx = ly;
        }
        if self.adapting {
            self.adapt(log_a.min(0.0).exp());
        }
        accept
    }

    fn adapt(&mut self, alpha: f64) {
        self.iter += 1;
        let rate = (self.iter as f64 + 1.0).powf(-0.6);
        self.ln_scale += rate * (alpha - TARGET_ACCEPT);

        // Welford update of the empirical covariance
        self.count += 1.0;
        let x = DVector::from_column_slice(&self.x);
        let delta = &x - &self.mean;
        self.mean += &delta / self.count;
        let delta2 = &x - &self.mean;
        self.m2 += &delta * delta2.transpose();

        let d = self.x.len();
        if self.iter.is_multiple_of(REFRESH_EVERY) && self.count > 2.0 * d as f64 {
            let mut cov = &self.m2 / (self.count - 1.0);
            let ridge = 1e-10 * (1.0 + cov.diagonal().max());
            for j in 0..d {
                cov[(j, j)] += ridge;
            }
            if let Some(ch) = cov.cholesky() {
                self.chol = ch.l();
            }
        }
    }
}
