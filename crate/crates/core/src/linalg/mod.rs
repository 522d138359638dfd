//! Dense real linear algebra.
//!
//! Matrices are stored column-major. Vectors are plain `[f64]` slices.

mod eigen;
mod factor;
mod measurement;

use alloc::vec;
use alloc::vec::Vec;


use crate::{Error, Result};

pub use eigen::{symmetric_eigenvalues, SymmetricTridiagonal};
pub use factor::{lstsq, Cholesky};
pub use measurement::{
    MeasurementMatrix, NewtonFactor, SpectralMethod, SpectralSummary, EXACT_SVD_MAX_DIM,
    POWER_ITERATION_CAP, POWER_ITERATION_TOL,
};

/// Dense column-major `rows x cols` matrix of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Rectangular diagonal matrix with `diag` on the main diagonal.
    pub fn diagonal(rows: usize, cols: usize, diag: &[f64]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &d) in diag.iter().enumerate().take(rows.min(cols)) {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        let mut col_major = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                col_major[j * rows + i] = data[i * cols + j];
            }
        }
        Self::from_col_major(rows, cols, col_major)
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut flat = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), cols, &flat)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_col_major(self) -> Vec<f64> {
        self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(x, self.cols)?;
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut out);
            }
        }
        Ok(out)
    }

    /// `Aᵀ r`.
    pub fn matvec_t(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len(r, self.rows)?;
        Ok((0..self.cols).map(|j| dot(self.col(j), r)).collect())
    }

    /// `y - A x`.
    pub fn residual(&self, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        check_len(y, self.rows)?;
        let mut r = self.matvec(x)?;
        for (ri, yi) in r.iter_mut().zip(y) {
            *ri = yi - *ri;
        }
        Ok(r)
    }

    /// `A B`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if other.rows != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for (l, &b) in other.col(j).iter().enumerate() {
                if b != 0.0 {
                    axpy(b, &self.data[l * self.rows..(l + 1) * self.rows], dst);
                }
            }
        }
        Ok(out)
    }

    /// Row Gram matrix `A Aᵀ` (`rows x rows`).
    pub fn gram_rows(&self) -> Matrix {
        let m = self.rows;
        let mut g = Matrix::zeros(m, m);
        // rank-one accumulation over columns keeps the inner loop contiguous
        for j in 0..self.cols {
            let c = self.col(j);
            for b in 0..m {
                let cb = c[b];
                if cb == 0.0 {
                    continue;
                }
                let dst = &mut g.data[b * m + b..(b + 1) * m];
                axpy(cb, &c[b..], dst);
            }
        }
        g.fill_upper_from_lower();
        g
    }

    /// Column Gram matrix `Aᵀ A` (`cols x cols`).
    pub fn gram_cols(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for j in 0..n {
            for i in j..n {
                let v = dot(self.col(i), self.col(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// Submatrix made of the listed columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(columns.len() * self.rows);
        for &j in columns {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    len: self.cols,
                });
            }
            data.extend_from_slice(self.col(j));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: columns.len(),
            data,
        })
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    fn fill_upper_from_lower(&mut self) {
        let n = self.rows;
        for j in 0..n {
            for i in j + 1..n {
                self.data[i * n + j] = self.data[j * n + i];
            }
        }
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[j * self.rows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[j * self.rows + i]
    }
}

#[inline]
pub(crate) fn check_len(v: &[f64], expected: usize) -> Result<()> {
    if v.len() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: v.len(),
        })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators let the compiler vectorize without reassociating
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..a.len() {
        s += a[i] * b[i];
    }
    s
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// `‖a - b‖₂`.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
