use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::Deref;

use spin::{Mutex, Once};

use super::{check_len, dot, norm2, symmetric_eigenvalues, Cholesky, Matrix};
use crate::{Error, Result};

/// Matrices with `min(m, n)` up to this size get exact singular extremes.
pub const EXACT_SVD_MAX_DIM: usize = 512;
/// Relative tolerance for power and inverse iteration.
pub const POWER_ITERATION_TOL: f64 = 1e-8;
/// Iteration cap for power and inverse iteration.
pub const POWER_ITERATION_CAP: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralMethod {
    /// Full symmetric eigendecomposition of `A Aᵀ`.
    ExactSvd,
    /// Power iteration for `σ1`, inverse iteration for `σm`, both on `A Aᵀ`.
    PowerIteration,
}

impl SpectralMethod {
    /// Exact for `min(m, n) <= EXACT_SVD_MAX_DIM`, iterative above.
    pub fn auto(rows: usize, cols: usize) -> Self {
        if rows.min(cols) <= EXACT_SVD_MAX_DIM {
            Self::ExactSvd
        } else {
            Self::PowerIteration
        }
    }
}

/// Largest singular value and the `m`-th largest singular value of an
/// `m x n` matrix.
///
/// `sigma_min` is zero for rank-deficient matrices and whenever `m > n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSummary {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub method: SpectralMethod,
    pub tol: f64,
}

/// Cholesky factor of `A Aᵀ + εI` together with the `ε` it was built for.
#[derive(Debug)]
pub struct NewtonFactor {
    eps: f64,
    chol: Cholesky,
}

impl NewtonFactor {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }
}

/// Measurement matrix `A` with lazily built, shareable caches: the row Gram
/// matrix `A Aᵀ`, the last spectral summary and one Newton factor per `ε`.
///
/// Caches are filled at most once per key and the matrix itself never
/// changes, so a shared reference can be used from several threads.
pub struct MeasurementMatrix {
    matrix: Matrix,
    gram: Once<Matrix>,
    spectral: Mutex<Option<SpectralSummary>>,
    newton: Mutex<Vec<Arc<NewtonFactor>>>,
}

impl core::fmt::Debug for MeasurementMatrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("MeasurementMatrix")
            .field("rows", &self.matrix.rows())
            .field("cols", &self.matrix.cols())
            .field("spectral", &*self.spectral.lock())
            .field("newton_eps", &self.cached_eps())
            .finish()
    }
}

impl Clone for MeasurementMatrix {
    /// Clones the entries only; the copy starts with empty caches.
    fn clone(&self) -> Self {
        Self::new(self.matrix.clone())
    }
}

impl From<Matrix> for MeasurementMatrix {
    fn from(matrix: Matrix) -> Self {
        Self::new(matrix)
    }
}

impl Deref for MeasurementMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.matrix
    }
}

impl MeasurementMatrix {
    pub fn new(matrix: Matrix) -> Self {
        Self {
            matrix,
            gram: Once::new(),
            spectral: Mutex::new(None),
            newton: Mutex::new(Vec::new()),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// `A Aᵀ`, computed on first use.
    pub fn row_gram(&self) -> &Matrix {
        self.gram.call_once(|| self.matrix.gram_rows())
    }

    /// The `ε` values with a cached Newton factor, in build order.
    pub fn cached_eps(&self) -> Vec<f64> {
        self.newton.lock().iter().map(|f| f.eps).collect()
    }

    /// Spectral summary from the cache, computed with
    /// [`SpectralMethod::auto`] on first use.
    pub fn spectral(&self) -> Result<SpectralSummary> {
        if let Some(s) = *self.spectral.lock() {
            return Ok(s);
        }
        let method = SpectralMethod::auto(self.rows(), self.cols());
        self.spectral_extremes(method, POWER_ITERATION_TOL)
    }

    /// Computes `(σ1, σm)` with the requested method and stores the result.
    pub fn spectral_extremes(&self, method: SpectralMethod, tol: f64) -> Result<SpectralSummary> {
        let summary = match method {
            SpectralMethod::ExactSvd => {
                let ev = symmetric_eigenvalues(self.row_gram())?;
                let top = ev.first().copied().unwrap_or(0.0).max(0.0);
                let bottom = ev.last().copied().unwrap_or(0.0).max(0.0);
                SpectralSummary {
                    sigma_max: top.sqrt(),
                    sigma_min: if self.rows() > self.cols() { 0.0 } else { bottom.sqrt() },
                    method,
                    tol: 0.0,
                }
            }
            SpectralMethod::PowerIteration => {
                let gram = self.row_gram();
                let top = power_iteration(gram, tol)?;
                let bottom = if self.rows() > self.cols() {
                    0.0
                } else {
                    inverse_iteration(gram, tol)?
                };
                SpectralSummary {
                    sigma_max: top.max(0.0).sqrt(),
                    sigma_min: bottom.max(0.0).sqrt(),
                    method,
                    tol,
                }
            }
        };
        *self.spectral.lock() = Some(summary);
        Ok(summary)
    }

    /// Factor of `A Aᵀ + εI`, built once per distinct `ε`.
    pub fn newton_factor(&self, eps: f64) -> Result<Arc<NewtonFactor>> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::NonPositiveEps(eps));
        }
        // the lock is held across the build so each factor is built once
        let mut cache = self.newton.lock();
        if let Some(f) = cache.iter().find(|f| f.eps.to_bits() == eps.to_bits()) {
            return Ok(f.clone());
        }
        let mut shifted = self.row_gram().clone();
        for i in 0..shifted.rows() {
            shifted[(i, i)] += eps;
        }
        let factor = Arc::new(NewtonFactor {
            eps,
            chol: Cholesky::new(&shifted)?,
        });
        cache.push(factor.clone());
        Ok(factor)
    }

    /// Regularized Newton direction `(AᵀA + εI)⁻¹ Aᵀ r`, evaluated as
    /// `Aᵀ (A Aᵀ + εI)⁻¹ r` so only an `m x m` system is factored.
    pub fn newton_apply(&self, eps: f64, r: &[f64]) -> Result<Vec<f64>> {
        check_len(r, self.rows())?;
        let factor = self.newton_factor(eps)?;
        let z = factor.chol.solve(r)?;
        self.matrix.matvec_t(&z)
    }
}

fn start_vector(n: usize) -> Vec<f64> {
    // deterministic and not orthogonal to any coordinate direction
    let v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    let nv = norm2(&v);
    v.into_iter().map(|x| x / nv).collect()
}

fn symmetric_matvec(g: &Matrix, v: &[f64]) -> Vec<f64> {
    // g is symmetric, so column dots give G v
    (0..g.cols()).map(|j| dot(g.col(j), v)).collect()
}

/// Largest eigenvalue of a positive semidefinite matrix.
fn power_iteration(g: &Matrix, tol: f64) -> Result<f64> {
    let mut v = start_vector(g.rows());
    let mut estimate = 0.0;
    for _ in 0..POWER_ITERATION_CAP {
        let w = symmetric_matvec(g, &v);
        let next = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - estimate).abs() <= tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence {
        what: "power iteration",
        iterations: POWER_ITERATION_CAP,
        estimate,
    })
}

/// Smallest eigenvalue of a positive semidefinite matrix, zero when the
/// matrix is numerically singular.
fn inverse_iteration(g: &Matrix, tol: f64) -> Result<f64> {
    let chol = match Cholesky::new(g) {
        Ok(c) => c,
        Err(Error::NotPositiveDefinite { .. }) => return Ok(0.0),
        Err(e) => return Err(e),
    };
    let mut v = start_vector(g.rows());
    let mut estimate = f64::INFINITY;
    for _ in 0..POWER_ITERATION_CAP {
        let w = chol.solve(&v)?;
        let rayleigh_inv = dot(&v, &w);
        let nw = norm2(&w);
        v = w.into_iter().map(|x| x / nw).collect();
        let next = 1.0 / rayleigh_inv;
        if (next - estimate).abs() <= tol * next.abs() {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::NoConvergence {
        what: "inverse iteration",
        iterations: POWER_ITERATION_CAP,
        estimate,
    })
}
