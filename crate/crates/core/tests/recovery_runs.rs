mod common;

use common::{dist, gaussian, normal_vec, nonneg_sparse, rng, subsets};
use ndrt_core::bench::gen_instance;
use ndrt_core::nnls::active_set_oracle;
use ndrt_core::recovery::{
    ndrt_step, ndrtp_step, nnomp_run, nnsp_run, nnsp_run_from, rht_step, rhtp_step,
};
use ndrt_core::thresholding::relu_threshold;
use ndrt_core::{
    run_recovery, theory_stepsize_window, Algorithm, Matrix, MeasurementMatrix, NnlsMethod,
    NnlsProblem, RecoveryConfig, SparseSignal, StopReason,
};
use proptest::prelude::*;

/// Relative errors and iteration counts over seeds `0..50` on 10 x 20, k = 2.
fn small_runs(alg: Algorithm) -> Vec<(f64, usize, Vec<f64>)> {
    (0..50u64)
        .map(|seed| {
            let inst = gen_instance(10, 20, 2, 0.0, &mut rng(seed)).unwrap();
            let a = MeasurementMatrix::new(inst.a);
            let mut cfg = RecoveryConfig::benchmark_defaults(alg, 2, 10, 20);
            cfg.max_iters = cfg.max_iters.max(50);
            let res = run_recovery(&a, &inst.y, &cfg, Some(&inst.x_star)).unwrap();
            let trace = res.error_trace.unwrap();
            let rel = trace.last().unwrap() / trace[0];
            (rel, res.iterations, trace)
        })
        .collect()
}

#[test]
fn ndrt_small_instances_converge_and_settle_monotonically() {
    let runs = small_runs(Algorithm::Ndrt);
    let good: Vec<_> = runs.iter().filter(|r| r.0 < 1e-6).collect();
    assert!(good.len() >= 35, "{} of 50", good.len());
    for (_, _, trace) in good {
        // burn-in: until the iterate's support stops changing, the error may rise
        let tail = &trace[trace.len() / 2..];
        assert!(tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15));
    }
}

#[test]
fn ndrtp_small_instances_converge_in_few_iterations() {
    let runs = small_runs(Algorithm::Ndrtp);
    let good: Vec<_> = runs.iter().filter(|r| r.0 < 1e-6).collect();
    assert!(good.len() >= 35, "{} of 50", good.len());
    assert!(good.iter().all(|r| r.1 <= 10));
}

#[test]
fn baselines_recover_small_instances() {
    for alg in [Algorithm::Rht, Algorithm::Rhtp, Algorithm::Nnomp, Algorithm::Nnsp] {
        let good = small_runs(alg).iter().filter(|r| r.0 < 1e-6).count();
        assert!(good >= 25, "{alg}: {good} of 50");
    }
}

#[test]
fn true_signal_is_a_fixed_point_without_noise() {
    let mut r = rng(21);
    let inst = gen_instance(30, 60, 4, 0.0, &mut r).unwrap();
    let a = MeasurementMatrix::new(inst.a);
    let x = &inst.x_star;
    let nn = NnlsMethod::default();
    let exact = [
        ndrt_step(&a, &inst.y, x, 4, 2.0, 0.1).unwrap(),
        rht_step(&a, &inst.y, x, 4, 0.5).unwrap(),
    ];
    for out in exact {
        assert!(dist(out.values(), x) <= 1e-12 * common::norm(x));
    }
    let pursuit = [
        ndrtp_step(&a, &inst.y, x, 4, 8.0, 0.5, &nn, false).unwrap(),
        rhtp_step(&a, &inst.y, x, 4, 1.6, &nn, false).unwrap(),
    ];
    for out in pursuit {
        assert!(dist(out.values(), x) <= 1e-6);
    }
}

#[test]
fn identity_matrix_limit() {
    let y = [0.5, -1.0, 2.0, 0.1, 3.0, -0.2];
    let a = MeasurementMatrix::new(Matrix::identity(6));
    let step = ndrt_step(&a, &y, &[0.0; 6], 3, 1.0, 1e-8).unwrap();
    let want = relu_threshold(&y, 3).unwrap();
    assert!(dist(step.values(), want.values()) <= 1e-6);
}

#[test]
fn rht_from_zero_with_orthonormal_rows() {
    let mut r = rng(22);
    let q = to_orthonormal_rows(&gaussian(4, 9, &mut r));
    let y = normal_vec(4, &mut r);
    let step = rht_step(&q, &y, &[0.0; 9], 3, 1.0).unwrap();
    let want = relu_threshold(&q.matvec_t(&y).unwrap(), 3).unwrap();
    assert!(dist(step.values(), want.values()) <= 1e-14);
}

fn to_orthonormal_rows(a: &Matrix) -> Matrix {
    let q = common::to_na(&a.transpose()).qr().q();
    Matrix::from_col_major(q.nrows(), q.ncols(), q.as_slice().to_vec()).unwrap().transpose()
}

#[test]
fn ndrtp_with_few_positive_entries_runs_on_smaller_support() {
    // diagonal A: u has the sign pattern of y, so one positive entry
    let a = MeasurementMatrix::new(Matrix::diagonal(4, 4, &[1.0, 1.5, 1.0, 1.0]));
    let y = [-1.0, 3.0, -0.5, 0.0];
    let out = ndrtp_step(&a, &y, &[0.0; 4], 3, 1.0, 0.1, &NnlsMethod::default(), false).unwrap();
    assert_eq!(out.support().as_slice(), &[1]);
    assert!((out.values()[1] - 2.0).abs() <= 1e-6);
}

#[test]
fn nnomp_single_atom_and_orthogonal_columns() {
    let mut r = rng(23);
    let a = gaussian(8, 12, &mut r);
    let y: Vec<f64> = a.col(5).iter().map(|v| 2.5 * v).collect();
    let res = nnomp_run(&a, &y, 1, &NnlsMethod::default(), 1, 0.0, None).unwrap();
    assert_eq!(res.x_final.support().as_slice(), &[5]);
    assert!((res.x_final.values()[5] - 2.5).abs() <= 1e-6);

    let q = to_orthonormal_rows(&gaussian(6, 6, &mut r));
    let mut x = vec![0.0; 6];
    x[1] = 1.0;
    x[3] = 0.4;
    x[4] = 2.0;
    let y = q.matvec(&x).unwrap();
    let res = nnomp_run(&q, &y, 3, &NnlsMethod::default(), 3, 0.0, None).unwrap();
    assert_eq!(res.iterations, 3);
    assert!(dist(res.x_final.values(), &x) <= 1e-6);
}

#[test]
fn nnomp_finds_the_best_support_on_separated_signals() {
    let mut matched = 0;
    for seed in 0..40u64 {
        let mut r = rng(100 + seed);
        let a = gaussian(10, 14, &mut r);
        let mut x = vec![0.0; 14];
        for (i, &v) in rand::seq::index::sample(&mut r, 14, 3).iter().zip(&[1.0, 1.6, 2.2]) {
            x[i] = v;
        }
        let y = a.matvec(&x).unwrap();
        // oracle: NNLS residual over every 3-column support
        let best = subsets(14, 3)
            .into_iter()
            .map(|s| {
                let p = NnlsProblem::new(a.select_columns(&s).unwrap(), y.clone()).unwrap();
                let w = active_set_oracle(&p).unwrap().w;
                (p.objective(&w).unwrap(), s)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1;
        let res = nnomp_run(&a, &y, 3, &NnlsMethod::ExhaustiveActiveSet, 3, 0.0, None).unwrap();
        if res.x_final.support().as_slice() == best.as_slice() {
            matched += 1;
        }
    }
    assert!(matched >= 30, "{matched} of 40");
}

#[test]
fn nnsp_fixed_point_and_single_column() {
    let mut r = rng(24);
    let inst = gen_instance(20, 40, 3, 0.0, &mut r).unwrap();
    let nn = NnlsMethod::ExhaustiveActiveSet;
    let x0 = SparseSignal::from_dense(inst.x_star.clone());
    let res = nnsp_run_from(&inst.a, &inst.y, 3, &nn, 20, 0.0, x0, None).unwrap();
    assert_eq!(res.iterations, 1);
    assert_eq!(res.stop_reason, StopReason::FixedPoint);

    let a = gaussian(10, 20, &mut r);
    let y: Vec<f64> = a.col(7).iter().map(|v| 3.0 * v).collect();
    let res = nnsp_run(&a, &y, 1, &nn, 20, 1e-10, None).unwrap();
    assert_eq!(res.iterations, 1);
    assert_eq!(res.x_final.support().as_slice(), &[7]);
}

#[test]
fn stepsize_window_is_ordered() {
    let mut r = rng(25);
    for i in 0..1000 {
        let m = 1 + i % 7;
        let a = MeasurementMatrix::new(gaussian(m, m + i % 5, &mut r));
        let eps = 10f64.powi((i % 7) as i32 - 3);
        let (lo, hi) = theory_stepsize_window(&a, eps).unwrap();
        assert!(lo <= hi, "{lo} > {hi}");
    }
}

fn small_instance() -> impl Strategy<Value = (u64, usize, usize, usize)> {
    (any::<u64>(), 4usize..12, 0usize..12).prop_flat_map(|(seed, m, extra)| {
        let n = m + extra;
        (Just(seed), Just(m), Just(n), 1usize..=m.min(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_algorithm_returns_nonnegative_k_sparse_output((seed, m, n, k) in small_instance(), noise in 0.0f64..0.1) {
        let inst = gen_instance(m, n, k, noise, &mut rng(seed)).unwrap();
        let a = MeasurementMatrix::new(inst.a);
        for alg in Algorithm::ALL {
            let mut cfg = RecoveryConfig::benchmark_defaults(alg, k, m, n);
            cfg.max_iters = cfg.max_iters.min(15);
            if alg == Algorithm::Rht && cfg.lambda <= 0.0 {
                continue;
            }
            let res = run_recovery(&a, &inst.y, &cfg, Some(&inst.x_star)).unwrap();
            prop_assert!(res.x_final.is_nonneg());
            prop_assert!(res.x_final.nnz() <= k);
            prop_assert!(res.iterations <= cfg.max_iters);
            prop_assert_eq!(res.error_trace.unwrap().len() >= 1, true);
        }
    }

    #[test]
    fn single_steps_are_nonnegative_and_k_sparse((seed, m, n, k) in small_instance()) {
        let mut r = rng(seed);
        let a = MeasurementMatrix::new(gaussian(m, n, &mut r));
        let y = normal_vec(m, &mut r);
        // arbitrary, possibly negative and dense, current point
        let x = normal_vec(n, &mut r);
        let nn = NnlsMethod::default();
        for out in [
            ndrt_step(&a, &y, &x, k, 2.0, 0.1).unwrap(),
            ndrtp_step(&a, &y, &x, k, 8.0, 0.5, &nn, false).unwrap(),
            rht_step(&a, &y, &x, k, 0.5).unwrap(),
            rhtp_step(&a, &y, &x, k, 1.6, &nn, false).unwrap(),
        ] {
            prop_assert!(out.is_nonneg());
            prop_assert!(out.nnz() <= k);
        }
    }

    #[test]
    fn ndrt_update_is_scale_covariant((seed, m, n, k) in small_instance(), c in 0.1f64..10.0, lambda in 0.1f64..4.0, eps in 1e-2f64..2.0) {
        let mut r = rng(seed);
        let a = gaussian(m, n, &mut r);
        let x_star = nonneg_sparse(n, k, &mut r);
        let y = a.matvec(&x_star).unwrap();
        let x = nonneg_sparse(n, k, &mut r);
        let base = ndrt_step(&MeasurementMatrix::new(a.clone()), &y, &x, k, lambda, eps).unwrap();
        let cy: Vec<f64> = y.iter().map(|v| c * v).collect();
        let scaled = ndrt_step(&MeasurementMatrix::new(a.scaled(c)), &cy, &x, k, lambda, c * c * eps).unwrap();
        prop_assert!(dist(base.values(), scaled.values()) <= 1e-9 * (1.0 + common::norm(base.values())));
    }

    #[test]
    fn runs_are_deterministic((seed, m, n, k) in small_instance()) {
        let inst = gen_instance(m, n, k, 0.01, &mut rng(seed)).unwrap();
        for alg in [Algorithm::Ndrtp, Algorithm::Nnsp] {
            let cfg = RecoveryConfig::benchmark_defaults(alg, k, m, n);
            let a1 = MeasurementMatrix::new(inst.a.clone());
            let a2 = MeasurementMatrix::new(inst.a.clone());
            let r1 = run_recovery(&a1, &inst.y, &cfg, None).unwrap();
            let r2 = run_recovery(&a2, &inst.y, &cfg, None).unwrap();
            prop_assert_eq!(r1, r2);
        }
    }
}
