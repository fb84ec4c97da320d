//! Derivative-free minimisation: Nelder–Mead with dimension-adapted
//! coefficients and restarts from the best vertex.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Stop once every vertex is within this (max-norm) distance of the best.
    pub diameter_tol: f64,
    pub max_evals: usize,
    /// Initial simplex edge relative to `max(|x_j|, 1)`.
    pub initial_step: f64,
    pub max_restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            diameter_tol: 1e-8,
            max_evals: 200_000,
            initial_step: 0.1,
            max_restarts: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

fn run<F: Fn(&[f64]) -> f64>(
    f: &F,
    x0: &[f64],
    step: f64,
    opts: &NelderMeadOptions,
    budget: usize,
) -> Minimum {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, gamma, rho, shrink) = if n > 1 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for j in 0..n {
        let mut v = x0.to_vec();
        v[j] += step * x0[j].abs().max(1.0);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
    let mut evals = n + 1;
    let mut converged = false;

    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if diameter < opts.diameter_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / nf)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (centroid[j] - worst[j]))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        for i in 1..=n {
            for j in 0..n {
                simplex[i][j] = simplex[0][j] + shrink * (simplex[i][j] - simplex[0][j]);
            }
            values[i] = eval(&simplex[i]);
        }
        evals += n;
    }
    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        evals,
        converged,
    }
}

/// Minimises `f` from `x0`, restarting from the best point with a smaller
/// simplex until a restart no longer improves the value.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let mut best = run(&f, x0, opts.initial_step, opts, opts.max_evals);
    let mut total = best.evals;
    let mut step = opts.initial_step;
    for _ in 0..opts.max_restarts {
        if total >= opts.max_evals {
            break;
        }
        step = (step * 0.5).max(1e-4);
        let next = run(&f, &best.x, step, opts, opts.max_evals - total);
        total += next.evals;
        let improvement = best.value - next.value;
        let better = next.value <= best.value;
        if better {
            best = Minimum {
                evals: total,
                ..next
            };
        }
        if !(improvement > 1e-12 * (1.0 + best.value.abs())) {
            break;
        }
    }
    best.evals = total;
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(f, &[-1.2, 1.0], &NelderMeadOptions::default());
        assert!(m.converged);
        assert!(
            (m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6,
            "{:?}",
            m.x
        );
    }

    #[test]
    fn quadratic_in_six_dimensions() {
        let c = [1.0, -2.0, 0.5, 3.0, -0.1, 10.0];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&c)
                .enumerate()
                .map(|(i, (a, b))| (i as f64 + 1.0) * (a - b).powi(2))
                .sum()
        };
        let m = nelder_mead(f, &[0.0; 6], &NelderMeadOptions::default());
        for (a, b) in m.x.iter().zip(&c) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn infinite_region_is_avoided() {
        let f = |x: &[f64]| {
            if x[0] < 0.5 {
                f64::INFINITY
            } else {
                (x[0] - 2.0).powi(2)
            }
        };
        let m = nelder_mead(f, &[1.0], &NelderMeadOptions::default());
        assert!((m.x[0] - 2.0).abs() < 1e-7);
    }
}
