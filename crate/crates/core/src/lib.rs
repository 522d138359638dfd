//! Nonnegative sparse signal recovery.
//!
//! Recovers a nonnegative `k`-sparse `x` from measurements `y = Ax + e` with
//! Newton-direction ReLU thresholding ([`Algorithm::Ndrt`]) and its pursuit
//! variant ([`Algorithm::Ndrtp`]), plus the ReLU hard thresholding, ReLU hard
//! thresholding pursuit, nonnegative OMP and nonnegative subspace pursuit
//! baselines.
//!
//! The crate is `no_std` and only needs an allocator. File formats, timing and
//! the command-line tool live in the `ndrt` crate.
//!
//! Module map:
//!
//! * [`linalg`]: dense matrices, the cached regularized Newton solve, singular
//!   value extremes and a symmetric eigenvalue solver.
//! * [`thresholding`]: ReLU, `L_k`, `H_k` and support restriction.
//! * [`nnls`]: the gradient projection NNLS solver, KKT residuals and an
//!   exhaustive active-set oracle.
//! * [`recovery`]: the six algorithms behind [`run_recovery`].
//! * [`theory`]: restricted isometry constants and randomized checks of the
//!   convergence inequalities.
//! * [`bench`]: instance generation, sweeps and threshold extraction.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bench;
mod error;
pub mod linalg;
pub mod nnls;
pub mod recovery;
pub mod theory;
pub mod thresholding;

pub use error::{Error, Result};
pub use linalg::{Matrix, MeasurementMatrix, SpectralMethod, SpectralSummary};
pub use nnls::{GpConfig, NnlsMethod, NnlsProblem, NnlsSolution, NnlsStatus};
pub use recovery::{
    empirical_stepsize, run_recovery, theory_stepsize_window, Algorithm, RecoveryConfig,
    RecoveryResult, StepsizeMode, StopReason,
};
pub use thresholding::{IndexSet, SparseSignal};

/// The golden ratio `(1 + sqrt 5) / 2`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;
