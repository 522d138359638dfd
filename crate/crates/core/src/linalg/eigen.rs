use alloc::vec;
use alloc::vec::Vec;


use super::{dot, Matrix};
use crate::{Error, Result};

const QL_MAX_SWEEPS: usize = 60;

/// Symmetric tridiagonal matrix: `diag[i]` on the diagonal, `off[i]` couples
/// rows `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymmetricTridiagonal {
    /// Householder reduction of a symmetric matrix. Only the lower triangle
    /// of `a` is read.
    pub fn reduce(a: &Matrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.cols(),
            });
        }
        let mut w = a.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];

        for k in 0..n.saturating_sub(2) {
            // column k below the diagonal
            let len = n - k - 1;
            let x: Vec<f64> = (k + 1..n).map(|i| w[(i, k)]).collect();
            let xnorm = dot(&x, &x).sqrt();
            diag[k] = w[(k, k)];
            if xnorm == 0.0 {
                off[k] = 0.0;
                continue;
            }
            let alpha = if x[0] > 0.0 { -xnorm } else { xnorm };
            off[k] = alpha;

            let v = &mut v[..len];
            v.copy_from_slice(&x);
            v[0] -= alpha;
            let vnorm = dot(v, v).sqrt();
            if vnorm == 0.0 {
                continue;
            }
            v.iter_mut().for_each(|vi| *vi /= vnorm);

            // p = W v on the trailing block, then w = p - (vᵀp) v
            let p = &mut p[..len];
            for (pi, row) in p.iter_mut().zip(k + 1..n) {
                *pi = (k + 1..n).zip(v.iter()).map(|(c, vc)| sym(&w, row, c) * vc).sum();
            }
            let vp = dot(v, p);
            p.iter_mut().zip(v.iter()).for_each(|(pi, vi)| *pi -= vp * vi);

            // W <- W - 2 v pᵀ - 2 p vᵀ, lower triangle only
            for c in 0..len {
                for r in c..len {
                    w[(k + 1 + r, k + 1 + c)] -= 2.0 * (v[r] * p[c] + p[r] * v[c]);
                }
            }
        }
        if n >= 2 {
            diag[n - 2] = w[(n - 2, n - 2)];
            off[n - 2] = w[(n - 1, n - 2)];
        }
        if n >= 1 {
            diag[n - 1] = w[(n - 1, n - 1)];
        }
        Ok(Self { diag, off })
    }

    /// Eigenvalues by implicit QL with Wilkinson-style shifts, sorted in
    /// descending order.
    pub fn eigenvalues(self) -> Result<Vec<f64>> {
        let Self { mut diag, off } = self;
        let n = diag.len();
        let mut e = off;
        e.push(0.0);

        for l in 0..n {
            let mut sweeps = 0;
            loop {
                let mut m = l;
                while m + 1 < n {
                    let dd = diag[m].abs() + diag[m + 1].abs();
                    if e[m].abs() <= f64::EPSILON * dd {
                        break;
                    }
                    m += 1;
                }
                if m == l {
                    break;
                }
                sweeps += 1;
                if sweeps > QL_MAX_SWEEPS {
                    return Err(Error::NoConvergence {
                        what: "tridiagonal QL",
                        iterations: QL_MAX_SWEEPS,
                        estimate: diag[l],
                    });
                }
                let mut g = (diag[l + 1] - diag[l]) / (2.0 * e[l]);
                let mut r = g.hypot(1.0);
                g = diag[m] - diag[l] + e[l] / (g + r.copysign(g));
                let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
                let mut i = m;
                let mut deflated = false;
                while i > l {
                    i -= 1;
                    let f = s * e[i];
                    let b = c * e[i];
                    r = f.hypot(g);
                    e[i + 1] = r;
                    if r == 0.0 {
                        diag[i + 1] -= p;
                        e[m] = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = diag[i + 1] - p;
                    r = (diag[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    diag[i + 1] = g + p;
                    g = c * r - b;
                }
                if deflated {
                    continue;
                }
                diag[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        }
        diag.sort_by(|a, b| b.total_cmp(a));
        Ok(diag)
    }
}

#[inline]
fn sym(w: &Matrix, i: usize, j: usize) -> f64 {
    if i >= j {
        w[(i, j)]
    } else {
        w[(j, i)]
    }
}

/// All eigenvalues of a symmetric matrix in descending order.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    SymmetricTridiagonal::reduce(a)?.eigenvalues()
}
