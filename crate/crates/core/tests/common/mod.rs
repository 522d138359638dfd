#![allow(dead_code)]

use nalgebra::DMatrix;
use ndrt_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    Distribution::<f64>::sample(&StandardNormal, rng)
}

pub fn normal_vec<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// i.i.d. N(0, 1/m) entries.
pub fn gaussian<R: Rng>(m: usize, n: usize, rng: &mut R) -> Matrix {
    let s = 1.0 / (m as f64).sqrt();
    Matrix::from_col_major(m, n, (0..m * n).map(|_| s * normal(rng)).collect()).unwrap()
}

/// Nonnegative vector with `k` nonzeros drawn as |N(0, 1)|.
pub fn nonneg_sparse<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for i in rand::seq::index::sample(rng, n, k) {
        x[i] = normal(rng).abs().max(1e-3);
    }
    x
}

pub fn to_na(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// All `s`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, s, &mut Vec::new(), &mut out);
    out
}
