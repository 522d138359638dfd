mod common;

use common::{dist, norm, subsets};
use ndrt_core::thresholding::{
    hard_threshold, relu, relu_threshold, restrict, top_k_indices, top_k_positive,
};
use ndrt_core::{IndexSet, GOLDEN_RATIO};
use proptest::collection::vec;
use proptest::prelude::*;

/// Full stable sort by (-|v_i|, i), first `k` taken.
fn sort_oracle(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    let mut top = idx[..k].to_vec();
    top.sort();
    top
}

/// Entries drawn from a small grid so ties show up often.
fn tie_prone(len: usize) -> impl Strategy<Value = Vec<f64>> {
    vec((-4i32..=4).prop_map(|q| q as f64 * 0.5), len)
}

fn k_sparse_nonneg(n: usize, k: usize) -> impl Strategy<Value = Vec<f64>> {
    (proptest::sample::subsequence((0..n).collect::<Vec<_>>(), k), vec(0.01f64..3.0, k)).prop_map(
        move |(supp, vals)| {
            let mut x = vec![0.0; n];
            for (i, v) in supp.into_iter().zip(vals) {
                x[i] = v;
            }
            x
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn top_k_matches_stable_sort(v in tie_prone(12), k in 1usize..=12) {
        let got = top_k_indices(&v, k).unwrap();
        let want = sort_oracle(&v, k);
        prop_assert_eq!(got.as_slice(), want.as_slice());
    }

    #[test]
    fn top_k_on_continuous_values(v in vec(-10.0f64..10.0, 12), k in 1usize..=12) {
        let got = top_k_indices(&v, k).unwrap();
        let want = sort_oracle(&v, k);
        prop_assert_eq!(got.as_slice(), want.as_slice());
    }

    #[test]
    fn hard_threshold_is_best_k_sparse_approximation(v in vec(-5.0f64..5.0, 1..=8), k0 in 1usize..=8) {
        let k = k0.min(v.len());
        let h = hard_threshold(&v, k).unwrap();
        prop_assert!(h.nnz() <= k);
        let err = dist(h.values(), &v);
        for s in subsets(v.len(), k) {
            let z = restrict(&v, &IndexSet::new(s, v.len()).unwrap()).unwrap();
            prop_assert!(err <= dist(&z, &v) + 1e-12);
        }
    }

    #[test]
    fn hard_threshold_is_idempotent(v in tie_prone(10), k in 1usize..=10) {
        let once = hard_threshold(&v, k).unwrap();
        let twice = hard_threshold(once.values(), k).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn relu_is_idempotent_and_nonnegative(v in vec(-5.0f64..5.0, 0..20)) {
        let r = relu(&v);
        prop_assert!(r.iter().all(|&x| x >= 0.0));
        prop_assert_eq!(relu(&r), r);
    }

    #[test]
    fn relu_threshold_support_is_positive(v in tie_prone(10), k in 1usize..=10) {
        let out = relu_threshold(&v, k).unwrap();
        prop_assert!(out.is_nonneg());
        prop_assert!(out.nnz() <= k);
        for i in out.support().iter() {
            prop_assert!(v[i] > 0.0);
        }
        let positives = v.iter().filter(|&&x| x > 0.0).count();
        prop_assert_eq!(out.nnz(), positives.min(k));
        let pos = top_k_positive(&v, k).unwrap();
        prop_assert_eq!(pos.as_slice(), out.support().as_slice());
    }

    #[test]
    fn golden_ratio_bound(u in vec(-3.0f64..3.0, 12), (k, x) in (1usize..=4).prop_flat_map(|k| (Just(k), k_sparse_nonneg(12, k)))) {
        let h = hard_threshold(&u, k).unwrap();
        let omega = h.support().union(&IndexSet::support_of(&x));
        let diff: Vec<f64> = u.iter().zip(&x).map(|(a, b)| a - b).collect();
        let rhs = GOLDEN_RATIO * norm(&restrict(&diff, &omega).unwrap());
        prop_assert!(dist(h.values(), &x) <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn relu_never_moves_away_from_nonneg_targets(
        u in vec(-3.0f64..3.0, 10),
        x in vec(0.0f64..3.0, 10),
        mask in vec(any::<bool>(), 10),
    ) {
        let omega: IndexSet = (0..10).filter(|&i| mask[i]).collect();
        let ru = relu(&u);
        let d1: Vec<f64> = ru.iter().zip(&x).map(|(a, b)| a - b).collect();
        let d0: Vec<f64> = u.iter().zip(&x).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&restrict(&d1, &omega).unwrap()) <= norm(&restrict(&d0, &omega).unwrap()));
    }

    #[test]
    fn sparse_signal_support_matches_nonzeros(v in tie_prone(15)) {
        let s = ndrt_core::SparseSignal::from_dense(v.clone());
        let want: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
        prop_assert_eq!(s.support().as_slice(), want.as_slice());
        prop_assert_eq!(s.is_nonneg(), v.iter().all(|&x| x >= 0.0));
    }
}
