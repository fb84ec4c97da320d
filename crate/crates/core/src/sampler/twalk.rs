//! The t-walk: a self-adjusting two-point Metropolis–Hastings sampler.
//!
//! The state is a pair of points `(x, x')`. Each iteration picks one of the
//! two points to move, using the other as a reference, and one of four
//! kernels (traverse, walk, blow, hop) with the standard mixture weights.
//! Only a random subset of coordinates is moved; on average
//! `min(dim, 4)` of them.

use rand::Rng;
use rand_distr::StandardNormal;

const P_TRAVERSE: f64 = 0.4918;
const P_WALK: f64 = 0.4918;
const P_BLOW: f64 = 0.0082;
const WALK_A: f64 = 1.5;
const TRAVERSE_A: f64 = 6.0;
const EXPECTED_MOVED: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    Traverse,
    Walk,
    Blow,
    Hop,
}

pub(crate) struct TWalk {
    x: Vec<f64>,
    xp: Vec<f64>,
    lx: f64,
    lxp: f64,
    p_phi: f64,
    // scratch
    phi: Vec<bool>,
    y: Vec<f64>,
}

impl TWalk {
    pub(crate) fn new(x: Vec<f64>, xp: Vec<f64>, lx: f64, lxp: f64) -> Self {
        let n = x.len();
        TWalk {
            p_phi: EXPECTED_MOVED.min(n as f64) / n as f64,
            phi: vec![false; n],
            y: vec![0.0; n],
            x,
            xp,
            lx,
            lxp,
        }
    }

    pub(crate) fn current(&self) -> (&[f64], f64) {
        (&self.x, self.lx)
    }

    fn draw_subset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        loop {
            let mut k = 0;
            for f in self.phi.iter_mut() {
                *f = rng.random::<f64>() < self.p_phi;
                k += usize::from(*f);
            }
            if k > 0 {
                return k;
            }
        }
    }

    /// One transition. Returns whether the proposal was accepted.
    pub(crate) fn step<R, F>(&mut self, rng: &mut R, target: &F) -> bool
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> f64,
    {
        let u: f64 = rng.random();
        let kernel = if u < P_TRAVERSE {
            Kernel::Traverse
        } else if u < P_TRAVERSE + P_WALK {
            Kernel::Walk
        } else if u < P_TRAVERSE + P_WALK + P_BLOW {
            Kernel::Blow
        } else {
            Kernel::Hop
        };
        let move_first = rng.random::<f64>() < 0.5;
        let n_phi = self.draw_subset(rng);

        let (mover, other, l_mover) = if move_first {
            (&self.x, &self.xp, self.lx)
        } else {
            (&self.xp, &self.x, self.lxp)
        };
        self.y.copy_from_slice(mover);

        let mut log_ratio_extra = 0.0;
        match kernel {
            Kernel::Traverse => {
                let beta = traverse_beta(rng);
                for j in 0..self.y.len() {
                    if self.phi[j] {
                        self.y[j] = other[j] + beta * (other[j] - mover[j]);
                    }
                }
                log_ratio_extra = (n_phi as f64 - 2.0) * beta.ln();
            }
            Kernel::Walk => {
                for j in 0..self.y.len() {
                    if self.phi[j] {
                        let v: f64 = rng.random();
                        let z = WALK_A / (1.0 + WALK_A) * (WALK_A * v * v + 2.0 * v - 1.0);
                        self.y[j] = mover[j] + (mover[j] - other[j]) * z;
                    }
                }
            }
            Kernel::Blow | Kernel::Hop => {
                let spread = max_gap(mover, other, &self.phi);
                if !(spread > 0.0 && spread.is_finite()) {
                    return false;
                }
                let (scale, centre_on_other) = match kernel {
                    Kernel::Blow => (spread, true),
                    _ => (spread / 3.0, false),
                };
                for j in 0..self.y.len() {
                    if self.phi[j] {
                        let z: f64 = rng.sample(StandardNormal);
                        let c = if centre_on_other { other[j] } else { mover[j] };
                        self.y[j] = c + scale * z;
                    }
                }
                let forward = gaussian_kernel_ln(&self.y, mover, other, &self.phi, kernel);
                let backward = gaussian_kernel_ln(mover, &self.y, other, &self.phi, kernel);
                if !backward.is_finite() {
                    return false;
                }
                log_ratio_extra = backward - forward;
            }
        }

        let ly = target(&self.y);
        if !ly.is_finite() {
            return false;
        }
        let log_a = ly - l_mover + log_ratio_extra;
        let accept = log_a >= 0.0 || rng.random::<f64>().ln() < log_a;
        if accept {
            if move_first {
                self.x.copy_from_slice(&self.y);
                self.lx = ly;
            } else {
                self.xp.copy_from_slice(&self.y);
                self.lxp = ly;
            }
        }
        accept
    }
}

fn traverse_beta<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let at = TRAVERSE_A;
    let u: f64 = rng.random();
    let v: f64 = 1.0 - rng.random::<f64>();
    if u < (at - 1.0) / (2.0 * at) {
        v.powf(1.0 / (at + 1.0))
    } else {
        v.powf(1.0 / (1.0 - at))
    }
}

fn max_gap(a: &[f64], b: &[f64], phi: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(phi)
        .filter(|(_, &f)| f)
        .map(|((x, y), _)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// ln q(h | x, x') for the blow (centred on x') and hop (centred on x)
/// kernels, up to the shared 2π constant.
fn gaussian_kernel_ln(h: &[f64], x: &[f64], xp: &[f64], phi: &[bool], kernel: Kernel) -> f64 {
    let spread = max_gap(x, xp, phi);
    let scale = if kernel == Kernel::Blow {
        spread
    } else {
        spread / 3.0
    };
    if !(scale > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut ss = 0.0;
    let mut k = 0.0;
    for j in 0..h.len() {
        if phi[j] {
            let c = if kernel == Kernel::Blow { xp[j] } else { x[j] };
            let d = h[j] - c;
            ss += d * d;
            k += 1.0;
        }
    }
    -k * scale.ln() - 0.5 * ss / (scale * scale)
}
