mod common;

use common::{gaussian, rng, subsets, to_na};
use ndrt_core::theory::{
    bound_constants, check_newton_operator_bounds, check_projection_bound, check_rip_inequalities,
    exact_projection, near_isometry, ric_bruteforce, BoundConstants, RicMode,
};
use ndrt_core::{Error, IndexSet, Matrix, MeasurementMatrix, GOLDEN_RATIO};
use proptest::prelude::*;

/// δ_s from the eigenvalues of every s-column Gram block.
fn ric_oracle(a: &Matrix, s: usize) -> f64 {
    let na = to_na(a);
    subsets(a.cols(), s)
        .into_iter()
        .map(|t| {
            let sub = na.select_columns(&t);
            let ev = (sub.transpose() * &sub).symmetric_eigen().eigenvalues;
            (ev.max() - 1.0).max(1.0 - ev.min())
        })
        .fold(0.0, f64::max)
}

fn svd(a: &Matrix) -> (f64, f64) {
    let sv = to_na(a).singular_values();
    (sv.max(), sv.min())
}

#[test]
fn ric_matches_per_support_eigen_oracle() {
    let mut r = rng(31);
    for s in 1..=3 {
        let a = gaussian(8, 12, &mut r);
        let got = ric_bruteforce(&a, s).unwrap();
        assert_eq!(got.mode, RicMode::ExactBruteforce);
        assert_eq!(got.supports_checked as usize, subsets(12, s).len());
        assert!((got.delta - ric_oracle(&a, s)).abs() <= 1e-10);
    }
}

#[test]
fn ric_of_an_isometry_is_zero() {
    let mut a = Matrix::zeros(8, 6);
    for i in 0..6 {
        a[(i, i)] = 1.0;
    }
    for s in 1..=6 {
        assert!(ric_bruteforce(&a, s).unwrap().delta <= 1e-14);
    }
}

#[test]
fn rip_inequalities_degenerate_for_orthonormal_columns() {
    let reports = check_rip_inequalities(&Matrix::identity(7), 3, 500, &mut rng(32)).unwrap();
    for r in &reports {
        assert!(r.passed());
    }
    // (I − AᵀA) = 0, so both left sides vanish
    assert!(reports[1].worst_excess <= 0.0 && reports[1].worst_ratio == 0.0);
    assert!(reports[2].worst_excess <= 0.0 && reports[2].worst_ratio == 0.0);
}

#[test]
fn newton_operator_check_refuses_long_steps_and_handles_zero() {
    let mut r = rng(33);
    let a = MeasurementMatrix::new(gaussian(6, 10, &mut r));
    let s = a.spectral().unwrap();
    let too_long = s.sigma_min.powi(2) + 0.5 + 1e-3;
    assert!(matches!(
        check_newton_operator_bounds(&a, 0.5, too_long, 3, 10, &mut r),
        Err(Error::Hypothesis(_))
    ));
    let rep = check_newton_operator_bounds(&a, 0.5, 0.0, 3, 2000, &mut r).unwrap();
    assert!(rep.bilinear.passed() && rep.restricted.passed());
    assert!((rep.q_norm_formula - s.sigma_max.powi(2)).abs() <= 1e-12 * s.sigma_max.powi(2));
}

#[test]
fn q_norm_with_a_single_singular_value() {
    // orthonormal rows: every nonzero eigenvalue of AᵀA is 1
    let a = MeasurementMatrix::new(near_isometry(10, 0.0, &mut rng(34)).unwrap());
    let rep = check_newton_operator_bounds(&a, 0.5, 1.2, 2, 100, &mut rng(35)).unwrap();
    assert!((rep.q_norm_assembled - rep.q_norm_formula).abs() <= 1e-12);
    assert!((rep.q_norm_formula - (1.0 - 1.2 / 1.5)).abs() <= 1e-12);
}

#[test]
fn bound_constants_match_independent_evaluation() {
    let mut r = rng(36);
    let a = near_isometry(9, 0.02, &mut r).unwrap();
    let (s1, sm) = svd(&a);
    let d = [ric_oracle(&a, 1), ric_oracle(&a, 2), ric_oracle(&a, 3)];
    let (eps, lambda) = (0.5, 1.2);
    let got = bound_constants(&MeasurementMatrix::new(a), eps, lambda, 1).unwrap();
    let core = d[2] + s1 * s1 - lambda * s1 * s1 / (s1 * s1 + eps);
    let lead = (2.0 / (1.0 - d[1] * d[1])).sqrt();
    let want_alpha = GOLDEN_RATIO * core;
    let want_gamma = GOLDEN_RATIO * lambda * s1 / (sm * sm + eps);
    let want_rho = lead * core;
    let want_tau = lead * lambda * s1 / (sm * sm + eps) + (1.0 + d[0]).sqrt() / (1.0 - d[1]);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + y.abs());
    assert!(close(got.alpha, want_alpha));
    assert!(close(got.gamma, want_gamma));
    assert!(close(got.rho.unwrap(), want_rho));
    assert!(close(got.tau.unwrap(), want_tau));
    assert!(close(got.condition_ndrt, d[2] + s1 * s1 - sm * sm));
    assert!(close(got.lambda_window.0, sm * sm + sm * sm / (s1 * s1) * eps));
    assert!(close(got.lambda_window.1, sm * sm + eps));
}

#[test]
fn gamma_at_the_top_of_the_window() {
    let (s1, sm, eps) = (1.3, 0.8, 0.25);
    let c = BoundConstants::from_parts([0.1, 0.2, 0.3], s1, sm, eps, sm * sm + eps);
    assert!((c.gamma - GOLDEN_RATIO * s1).abs() <= 1e-12);
    assert!(c.lambda_in_window());
}

#[test]
fn certified_constants_contract() {
    let mut r = rng(37);
    let mut certified = 0;
    for _ in 0..20 {
        let a = MeasurementMatrix::new(near_isometry(10, 0.02, &mut r).unwrap());
        let (lo, hi) = ndrt_core::theory_stepsize_window(&a, 0.5).unwrap();
        let c = bound_constants(&a, 0.5, 0.5 * (lo + hi), 1).unwrap();
        if c.ndrt_certified() {
            certified += 1;
            assert!((0.0..1.0).contains(&c.alpha));
        }
        if c.ndrtp_certified() {
            assert!((0.0..1.0).contains(&c.rho.unwrap()));
        }
    }
    assert!(certified >= 10);
}

#[test]
fn exact_projection_on_the_true_support() {
    let mut r = rng(38);
    let a = gaussian(8, 12, &mut r);
    let x = common::nonneg_sparse(12, 2, &mut r);
    let y = a.matvec(&x).unwrap();
    let z = exact_projection(&a, &y, &IndexSet::support_of(&x)).unwrap();
    assert!(common::dist(z.values(), &x) <= 1e-10);
    let zero = exact_projection(&a, &[0.0; 8], &IndexSet::new(vec![1, 4], 12).unwrap()).unwrap();
    assert!(zero.values().iter().all(|&v| v == 0.0));
}

#[test]
fn projection_check_requires_restricted_isometry() {
    // duplicated columns make δ2 = 1
    let mut a = gaussian(8, 12, &mut rng(39));
    let c0 = a.col(0).to_vec();
    a.col_mut(1).copy_from_slice(&c0);
    assert!(matches!(
        check_projection_bound(&a, 1, 1e-3, 10, &mut rng(40)),
        Err(Error::Hypothesis(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ric_is_monotone_in_the_order(seed in any::<u64>(), m in 2usize..7, n in 3usize..9) {
        let a = gaussian(m, n, &mut rng(seed));
        let mut prev = 0.0;
        for s in 1..=n.min(5) {
            let d = ric_bruteforce(&a, s).unwrap().delta;
            prop_assert!(d >= prev - 1e-12);
            prev = d;
        }
    }
}
