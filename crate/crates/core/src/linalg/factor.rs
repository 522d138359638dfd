use alloc::vec::Vec;


use super::{check_len, dot, Matrix};
use crate::{Error, Result};

/// Cholesky factor `L` of a symmetric positive definite matrix, `M = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors `m`, reading only its lower triangle.
    pub fn new(m: &Matrix) -> Result<Self> {
        let n = m.rows();
        if m.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.cols(),
            });
        }
        let mut l = m.clone();
        for j in 0..n {
            // left-looking: subtract contributions of columns 0..j
            for k in 0..j {
                let ljk = l[(j, k)];
                if ljk == 0.0 {
                    continue;
                }
                for i in j..n {
                    let lik = l[(i, k)];
                    l[(i, j)] -= lik * ljk;
                }
            }
            let pivot = l[(j, j)];
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
            }
            let d = pivot.sqrt();
            let col = l.col_mut(j);
            col[j] = d;
            for v in &mut col[j + 1..] {
                *v /= d;
            }
            for v in &mut col[..j] {
                *v = 0.0;
            }
        }
        Ok(Self { l })
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solves `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        check_len(b, n)?;
        let mut x = b.to_vec();
        // L z = b
        for j in 0..n {
            let col = self.l.col(j);
            x[j] /= col[j];
            let xj = x[j];
            for i in j + 1..n {
                x[i] -= col[i] * xj;
            }
        }
        // Lᵀ x = z
        for j in (0..n).rev() {
            let col = self.l.col(j);
            let s = dot(&col[j + 1..], &x[j + 1..]);
            x[j] = (x[j] - s) / col[j];
        }
        Ok(x)
    }
}

/// Least squares `argmin ‖b - B w‖` by Householder QR.
///
/// Returns `None` when `B` is numerically rank deficient, i.e. some `|R_ii|`
/// falls below `rank_tol` times the largest column norm.
pub fn lstsq(b_mat: &Matrix, rhs: &[f64], rank_tol: f64) -> Result<Option<Vec<f64>>> {
    let (m, k) = (b_mat.rows(), b_mat.cols());
    check_len(rhs, m)?;
    if k == 0 {
        return Ok(Some(Vec::new()));
    }
    if k > m {
        return Ok(None);
    }
    let scale = (0..k)
        .map(|j| dot(b_mat.col(j), b_mat.col(j)).sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(None);
    }
    let mut r = b_mat.clone();
    let mut qtb = rhs.to_vec();
    for j in 0..k {
        let norm = dot(&r.col(j)[j..], &r.col(j)[j..]).sqrt();
        if norm <= rank_tol * scale {
            return Ok(None);
        }
        let alpha = if r[(j, j)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = r.col(j)[j..].to_vec();
        v[0] -= alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 > 0.0 {
            for c in j..k {
                let s = 2.0 * dot(&v, &r.col(c)[j..]) / vnorm2;
                for (dst, vi) in r.col_mut(c)[j..].iter_mut().zip(&v) {
                    *dst -= s * vi;
                }
            }
            let s = 2.0 * dot(&v, &qtb[j..]) / vnorm2;
            for (dst, vi) in qtb[j..].iter_mut().zip(&v) {
                *dst -= s * vi;
            }
        }
    }
    let mut w = qtb[..k].to_vec();
    for j in (0..k).rev() {
        let s: f64 = (j + 1..k).map(|c| r[(j, c)] * w[c]).sum();
        w[j] = (w[j] - s) / r[(j, j)];
    }
    Ok(Some(w))
}
