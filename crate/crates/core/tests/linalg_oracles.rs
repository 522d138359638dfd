mod common;

use common::{gaussian, normal_vec, rng, to_na};
use nalgebra::{DMatrix, DVector};
use ndrt_core::{Matrix, MeasurementMatrix, SpectralMethod};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn matvec_matches_triple_loop() {
    let mut r = rng(1);
    for _ in 0..20 {
        let a = gaussian(5, 8, &mut r);
        let x = normal_vec(8, &mut r);
        let rows = a.to_row_major();
        let got = a.matvec(&x).unwrap();
        for i in 0..5 {
            let mut s = 0.0;
            for j in 0..8 {
                s += rows[i * 8 + j] * x[j];
            }
            assert!((got[i] - s).abs() <= 1e-12 * (1.0 + s.abs()));
        }
        let u = normal_vec(5, &mut r);
        let got_t = a.matvec_t(&u).unwrap();
        for j in 0..8 {
            let s: f64 = (0..5).map(|i| rows[i * 8 + j] * u[i]).sum();
            assert!((got_t[j] - s).abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }
}

fn svd_extremes(a: &Matrix) -> (f64, f64) {
    let mut sv: Vec<f64> = to_na(a).singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let m = a.rows();
    (sv[0], if m <= sv.len() { sv[m - 1] } else { 0.0 })
}

#[test]
fn exact_spectral_matches_svd() {
    let mut r = rng(2);
    for _ in 0..20 {
        let a = gaussian(6, 10, &mut r);
        let (s1, sm) = svd_extremes(&a);
        let got = MeasurementMatrix::new(a).spectral_extremes(SpectralMethod::ExactSvd, 0.0).unwrap();
        assert!((got.sigma_max - s1).abs() <= 1e-8 * s1);
        assert!((got.sigma_min - sm).abs() <= 1e-8 * s1);
        assert!(got.sigma_max >= got.sigma_min && got.sigma_min >= 0.0);
    }
}

#[test]
fn exact_spectral_matches_gram_eigendecomposition() {
    let mut r = rng(3);
    for &(m, n) in &[(1, 4), (3, 5), (10, 30), (40, 64), (64, 64)] {
        let a = gaussian(m, n, &mut r);
        let na = to_na(&a);
        let ev = (&na * na.transpose()).symmetric_eigen().eigenvalues;
        let top = ev.max().max(0.0).sqrt();
        let bottom = ev.min().max(0.0).sqrt();
        let got = MeasurementMatrix::new(a).spectral_extremes(SpectralMethod::ExactSvd, 0.0).unwrap();
        assert!((got.sigma_max - top).abs() <= 1e-10 * top, "{m}x{n}");
        assert!((got.sigma_min - bottom).abs() <= 1e-10 * top, "{m}x{n}");
    }
}

#[test]
fn power_iteration_agrees_with_exact() {
    let mut r = rng(4);
    for _ in 0..5 {
        let a = MeasurementMatrix::new(gaussian(20, 50, &mut r));
        let exact = a.spectral_extremes(SpectralMethod::ExactSvd, 0.0).unwrap();
        let power = a.spectral_extremes(SpectralMethod::PowerIteration, 1e-12).unwrap();
        assert_eq!(power.method, SpectralMethod::PowerIteration);
        assert!((power.sigma_max - exact.sigma_max).abs() <= 1e-6 * exact.sigma_max);
        assert!((power.sigma_min - exact.sigma_min).abs() <= 1e-6 * exact.sigma_max);
    }
}

fn direct_newton(a: &Matrix, eps: f64, res: &[f64]) -> DVector<f64> {
    let na = to_na(a);
    let n = a.cols();
    let h = na.transpose() * &na + DMatrix::identity(n, n) * eps;
    let rhs = na.transpose() * DVector::from_column_slice(res);
    h.lu().solve(&rhs).unwrap()
}

#[test]
fn newton_apply_matches_direct_solve() {
    let mut r = rng(5);
    let a = gaussian(4, 7, &mut r);
    let res = normal_vec(4, &mut r);
    let want = direct_newton(&a, 0.5, &res);
    let got = MeasurementMatrix::new(a).newton_apply(0.5, &res).unwrap();
    let err = (DVector::from_vec(got) - &want).norm();
    assert!(err <= 1e-9 * want.norm());
}

#[test]
fn woodbury_reduction_across_eps() {
    let mut r = rng(6);
    for &eps in &[1e-3, 0.1, 1.0, 10.0] {
        for _ in 0..100 {
            let m = r.random_range(1..=20);
            let n = r.random_range(1..=20);
            let a = gaussian(m, n, &mut r);
            let res = normal_vec(m, &mut r);
            let want = direct_newton(&a, eps, &res);
            let got = MeasurementMatrix::new(a).newton_apply(eps, &res).unwrap();
            let err = (DVector::from_vec(got) - &want).norm();
            assert!(err <= 1e-9 * want.norm().max(f64::MIN_POSITIVE), "{m}x{n} eps={eps}: {err}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_max_scales_with_the_matrix(seed in any::<u64>(), c in -5.0f64..5.0, m in 1usize..8, extra in 0usize..8) {
        let mut r = rng(seed);
        let a = gaussian(m, m + extra, &mut r);
        let s = MeasurementMatrix::new(a.clone()).spectral_extremes(SpectralMethod::ExactSvd, 0.0).unwrap();
        let sc = MeasurementMatrix::new(a.scaled(c)).spectral_extremes(SpectralMethod::ExactSvd, 0.0).unwrap();
        prop_assert!((sc.sigma_max - c.abs() * s.sigma_max).abs() <= 1e-10 * (1.0 + s.sigma_max * c.abs()));
    }

    #[test]
    fn newton_direction_obeys_operator_bound(seed in any::<u64>(), m in 1usize..10, extra in 0usize..10, eps in 1e-3f64..10.0) {
        let mut r = rng(seed);
        let a = MeasurementMatrix::new(gaussian(m, m + extra, &mut r));
        let res = normal_vec(m, &mut r);
        let s = a.spectral().unwrap();
        let d = a.newton_apply(eps, &res).unwrap();
        let bound = s.sigma_max / (s.sigma_min * s.sigma_min + eps) * common::norm(&res);
        prop_assert!(common::norm(&d) <= bound * (1.0 + 1e-10));
    }
}
