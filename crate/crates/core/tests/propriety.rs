mod common;

use common::{grid_oracle, random_instance};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tpreg::distributions::{BaselineKind, SkewParameterisation};
use tpreg::model::{CensoredObservation, Dataset, ModelSpec};
use tpreg::propriety::*;

use CensoredObservation::*;
use Verdict::*;

fn design(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

#[test]
fn column_space_examples() {
    let x = design(&[
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![1.0, 2.0],
        vec![1.0, 3.0],
    ]);
    let exact = [1.0, 3.0, 5.0, 7.0];
    assert_eq!(check_column_space(&exact, &x, 1e-8).verdict, Violated);

    // y = Xβ + e with ‖e‖/‖y‖ = 0.1, e orthogonal to C(X)
    let e = [1.0, -1.0, -1.0, 1.0];
    let base: Vec<f64> = exact.to_vec();
    let bn = base.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c = 0.1 * bn / 2.0 / (1.0f64 - 0.01).sqrt();
    let y: Vec<f64> = base.iter().zip(e).map(|(b, e)| b + c * e).collect();
    let yn = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(((2.0 * c) / yn - 0.1).abs() < 1e-12);
    assert_eq!(check_column_space(&y, &x, 1e-8).verdict, Satisfied);

    let rank_deficient = design(&[vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]]);
    assert_eq!(
        check_column_space(&[1.0, 2.0, 4.0], &rank_deficient, 1e-8).verdict,
        Unknown
    );
}

#[test]
fn random_continuous_responses_are_outside_column_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let n = rng.random_range(4..30);
        let p = rng.random_range(1..n.min(6));
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let mut r = vec![1.0];
                r.extend((1..p).map(|_| Distribution::<f64>::sample(&StandardNormal, &mut rng)));
                r
            })
            .collect();
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        assert_eq!(
            check_column_space(&y, &design(&rows), COLUMN_SPACE_TOL).verdict,
            Satisfied
        );
    }
}

proptest! {
    #[test]
    fn column_space_is_scale_invariant(
        seed in 0u64..1000,
        scale in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6],
        exact_fit in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![1.0, rng.random_range(-2.0..2.0)]).collect();
        let x = design(&rows);
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 0.5 + 1.5 * r[1] + if exact_fit { 0.0 } else { rng.random_range(-1.0..1.0) })
            .collect();
        let scaled: Vec<f64> = y.iter().map(|v| v * scale).collect();
        prop_assert_eq!(
            check_column_space(&y, &x, 1e-8).verdict,
            check_column_space(&scaled, &x, 1e-8).verdict
        );
    }
}

#[test]
fn sample_size_examples() {
    assert_eq!(
        check_sample_size(4, 3, 1.0, BaselineKind::Normal).verdict,
        Satisfied
    );
    assert_eq!(
        check_sample_size(3, 3, 1.0, BaselineKind::Normal).verdict,
        Violated
    );
    assert_eq!(
        check_sample_size(3, 3, 1.5, BaselineKind::Normal).verdict,
        Satisfied
    );
    assert_eq!(
        check_sample_size(3, 3, 1.0, BaselineKind::StudentT { df: 4.0 }).verdict,
        Violated
    );
    assert_eq!(
        check_sample_size(9, 3, 1.0, BaselineKind::StudentT { df: 4.0 }).verdict,
        Satisfied
    );
    assert_eq!(
        check_sample_size(9, 3, 2.0, BaselineKind::StudentT { df: 4.0 }).verdict,
        Unknown
    );
    assert_eq!(
        check_sample_size(9, 3, 0.5, BaselineKind::Logistic).verdict,
        Unknown
    );
}

#[test]
fn skewness_integral_examples() {
    use SkewParameterisation::*;
    assert_eq!(
        check_condition_iii(EpsilonSkew, 1.0, 10, (0.5, 0.5)).verdict,
        Satisfied
    );
    assert_eq!(
        check_condition_iii(InverseScale, 1.0, 10, (0.5, 0.5)).verdict,
        Satisfied
    );
    assert_eq!(
        check_condition_iii(EpsilonSkew, 3.0, 10, (0.5, 0.5)).verdict,
        Satisfied
    );
    // tails decay like e^{-3|s|}: finite
    assert_eq!(
        check_condition_iii(InverseScale, 2.0, 10, (2.0, 2.0)).verdict,
        NumericallyChecked
    );
    // tails grow like e^{|s|}: no stabilisation
    assert_eq!(
        check_condition_iii(InverseScale, 3.0, 10, (0.5, 0.5)).verdict,
        Unknown
    );
    // bounded a, b with q < 1 still needs the numeric route, and converges
    assert_eq!(
        check_condition_iii(EpsilonSkew, 0.5, 10, (0.5, 0.5)).verdict,
        NumericallyChecked
    );
}

/// Reference value of the upper skewness integral for the inverse-scale
/// case, by the midpoint rule directly in γ over (0, ∞) mapped from (0, 1).
fn inverse_scale_oracle(q: f64, n: usize, a0: f64, b0: f64) -> f64 {
    let m = 2_000_000;
    let mut s = 0.0;
    for k in 0..m {
        let t = (k as f64 + 0.5) / m as f64;
        let g = t / (1.0 - t);
        let jac = 1.0 / ((1.0 - t) * (1.0 - t));
        let (a, b) = (g, 1.0 / g);
        let prior = tpreg::model::gamma_logprior(g, a0, b0, SkewParameterisation::InverseScale)
            .unwrap()
            .exp();
        s += a.max(b).powf(n as f64 + q - 1.0) / (a + b).powi(n as i32) * prior * jac;
    }
    s / m as f64
}

#[test]
fn inverse_scale_integral_is_finite_exactly_when_tails_decay() {
    // the integrand behaves like γ^{q-2-2b0} at infinity and γ^{2a0-q} at
    // zero (in dγ), so it is finite iff q < 1 + 2 min(a0, b0)
    let oracle = inverse_scale_oracle(2.0, 10, 2.0, 2.0);
    assert!(oracle.is_finite() && oracle > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..40 {
        let a0 = rng.random_range(0.3..3.0);
        let b0 = rng.random_range(0.3..3.0);
        let q = rng.random_range(0.0..6.0);
        let edge = 1.0 + 2.0 * f64::min(a0, b0);
        if (q - edge).abs() < 0.3 || q == 1.0 {
            continue;
        }
        let n = rng.random_range(1..50);
        let got = check_condition_iii(SkewParameterisation::InverseScale, q, n, (a0, b0)).verdict;
        let expect = if q < edge {
            NumericallyChecked
        } else {
            Unknown
        };
        assert_eq!(got, expect, "q={q} a0={a0} b0={b0} n={n}");
    }
}

#[test]
fn lp_examples() {
    let ones = DMatrix::from_element(2, 1, 1.0);
    let e = std::f64::consts::E;
    let disjoint = check_interval_lp(&ones, &[(1.0, e), (e * e, e * e * e)]).unwrap();
    assert_eq!(disjoint.verdict, Satisfied);
    let overlap = check_interval_lp(&ones, &[(1.0, e * e), (e, e * e * e)]).unwrap();
    assert_eq!(overlap.verdict, Violated);
    assert!(check_interval_lp(&ones, &[(0.0, 1.0), (1.0, 2.0)]).is_err());
    assert!(check_interval_lp(&ones, &[(2.0, 1.0), (1.0, 2.0)]).is_err());
}

#[test]
fn lp_agrees_with_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2025);
    let (mut checked, mut feasible, mut infeasible) = (0, 0, 0);
    while checked < 200 {
        let p = rng.random_range(1..=3);
        let n = rng.random_range(1..=6);
        let (x, lo, hi) = random_instance(&mut rng, p, n, false);
        let (min_v, on_edge) = grid_oracle(&x, &lo, &hi);
        if on_edge || min_v.abs() < 1e-3 {
            continue;
        }
        let lp = interval_system_feasible(&x, &lo, &hi).unwrap();
        assert_eq!(lp, min_v <= 0.0, "p={p} n={n} min={min_v}");
        if lp {
            feasible += 1
        } else {
            infeasible += 1
        }
        checked += 1;
    }
    assert!(
        feasible > 20 && infeasible > 20,
        "{feasible} / {infeasible}"
    );
}

#[test]
fn narrow_intervals_five_by_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut seen = 0;
    while seen < 20 {
        let (x, lo, hi) = random_instance(&mut rng, 2, 5, true);
        let (min_v, on_edge) = grid_oracle(&x, &lo, &hi);
        if on_edge || min_v.abs() < 1e-4 {
            continue;
        }
        let intervals: Vec<(f64, f64)> = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (l.exp(), h.exp()))
            .collect();
        let verdict = check_interval_lp(&x, &intervals).unwrap().verdict;
        assert_eq!(verdict, if min_v <= 0.0 { Violated } else { Satisfied });
        seen += 1;
    }
}

fn ncctg_shaped(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..227)
        .map(|_| {
            vec![
                1.0,
                rng.random_range(39.0..82.0f64).round(),
                rng.random_range(1..=2) as f64,
                rng.random_range(0..=3) as f64,
            ]
        })
        .collect();
    let resp = (0..227)
        .map(|i| {
            let y = 6.0 + 0.8 * Distribution::<f64>::sample(&StandardNormal, &mut rng);
            if i < 164 {
                Exact { y }
            } else {
                Right { y }
            }
        })
        .collect();
    Dataset::from_rows(&rows, resp).unwrap()
}

#[test]
fn report_examples() {
    let spec = ModelSpec::new(BaselineKind::Logistic, true);
    let r = propriety_report(&ncctg_shaped(1), &spec, COLUMN_SPACE_TOL);
    assert_eq!(r.overall, Satisfied, "{}", r.to_text());
    assert_eq!(r.path, "uncensored sub-sample");

    let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![1.0, i as f64]).collect();
    let right = Dataset::from_rows(&rows, (0..6).map(|i| Right { y: i as f64 }).collect()).unwrap();
    assert_eq!(
        propriety_report(&right, &spec, COLUMN_SPACE_TOL).overall,
        Unknown
    );

    // four intervals around a line that no single line passes through
    let rows = vec![
        vec![1.0, 0.0],
        vec![1.0, 1.0],
        vec![1.0, 2.0],
        vec![1.0, 3.0],
    ];
    let ivals = [(0.0, 0.2), (1.8, 2.0), (0.0, 0.2), (1.8, 2.0)];
    let (x, lo, hi) = (
        design(&rows),
        ivals.iter().map(|v| v.0).collect::<Vec<_>>(),
        ivals.iter().map(|v| v.1).collect::<Vec<_>>(),
    );
    let (min_v, _) = grid_oracle(&x, &lo, &hi);
    assert!(min_v > 0.0);
    let data = Dataset::from_rows(
        &rows,
        ivals
            .iter()
            .map(|&(lower, upper)| Interval { lower, upper })
            .collect(),
    )
    .unwrap();
    let r = propriety_report(
        &data,
        &ModelSpec::new(BaselineKind::Normal, true),
        COLUMN_SPACE_TOL,
    );
    assert_eq!(r.overall, Satisfied, "{}", r.to_text());
    assert_eq!(r.path, "interval-censored sub-sample");
}

#[test]
fn numerically_checked_propagates_to_overall() {
    let spec = ModelSpec {
        parameterisation: SkewParameterisation::InverseScale,
        q: 2.0,
        a0: 2.0,
        b0: 2.0,
        ..ModelSpec::new(BaselineKind::Normal, true)
    };
    let r = propriety_report(&ncctg_shaped(2), &spec, COLUMN_SPACE_TOL);
    assert_eq!(r.overall, NumericallyChecked, "{}", r.to_text());
    assert!(r.note.contains("numerically"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn adding_uncensored_rows_never_violates(
        seed in 0u64..10_000,
        n_extra in 1usize..6,
        with_intervals in any::<bool>(),
        baseline in prop_oneof![Just(BaselineKind::Normal), Just(BaselineKind::Logistic), Just(BaselineKind::Laplace)],
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 2;
        let n = rng.random_range(1..8);
        let mut rows: Vec<Vec<f64>> = (0..n.max(3)).map(|_| vec![1.0, rng.random_range(-2.0..2.0)]).collect();
        let mut resp: Vec<CensoredObservation> = rows
            .iter()
            .map(|r| {
                let y = 1.0 + r[1] + rng.random_range(-1.0..1.0);
                match rng.random_range(0..3) {
                    0 => Exact { y },
                    1 if with_intervals => Interval { lower: y - 0.05, upper: y + 0.05 },
                    _ => Right { y },
                }
            })
            .collect();
        let spec = ModelSpec::new(baseline, true);
        let Ok(data) = Dataset::from_rows(&rows, resp.clone()) else { return Ok(()) };
        let before = propriety_report(&data, &spec, COLUMN_SPACE_TOL).overall;
        prop_assume!(before == Satisfied);
        for _ in 0..n_extra {
            let x1 = rng.random_range(-2.0..2.0);
            rows.push(vec![1.0, x1]);
            resp.push(Exact { y: 1.0 + x1 + rng.random_range(-1.0..1.0) });
        }
        let data = Dataset::from_rows(&rows, resp).unwrap();
        let after = propriety_report(&data, &spec, COLUMN_SPACE_TOL);
        prop_assert_ne!(after.overall, Violated, "{}", after.to_text());
        let _ = p;
    }
}
