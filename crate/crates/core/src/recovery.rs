//! Recovery algorithms and the shared iteration loop.
//!
//! Every algorithm starts from `x = 0` unless an initial point is passed to
//! [`run_recovery_from`], and stops on the first of
//!
//! * `‖y − Ax‖ ≤ residual_tol` (only when `residual_tol > 0`),
//! * `‖x_{p+1} − x_p‖ < FIXED_POINT_TOL`, or a repeated support for NNSP,
//! * `max_iters` iterations.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;


use crate::linalg::{axpy, distance, norm2, Matrix, MeasurementMatrix};
use crate::nnls::{NnlsMethod, NnlsProblem};
use crate::thresholding::{relu_threshold, top_k_positive, IndexSet, SparseSignal};
use crate::{Error, Result};

/// Iterates closer than this are treated as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-12;

/// Iteration cap used by the pursuit variants RHTP and NDRTP.
pub const PURSUIT_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Newton-direction ReLU thresholding.
    Ndrt,
    /// Newton-direction ReLU thresholding pursuit.
    Ndrtp,
    /// ReLU hard thresholding.
    Rht,
    /// ReLU hard thresholding pursuit.
    Rhtp,
    /// Nonnegative orthogonal matching pursuit.
    Nnomp,
    /// Nonnegative subspace pursuit.
    Nnsp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Rht,
        Algorithm::Rhtp,
        Algorithm::Nnomp,
        Algorithm::Nnsp,
        Algorithm::Ndrt,
        Algorithm::Ndrtp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ndrt => "NDRT",
            Self::Ndrtp => "NDRTP",
            Self::Rht => "RHT",
            Self::Rhtp => "RHTP",
            Self::Nnomp => "NNOMP",
            Self::Nnsp => "NNSP",
        }
    }

    /// Whether the update has a stepsize `λ`.
    pub fn uses_lambda(self) -> bool {
        !matches!(self, Self::Nnomp | Self::Nnsp)
    }

    /// Whether the update uses the regularized Newton direction.
    pub fn uses_eps(self) -> bool {
        matches!(self, Self::Ndrt | Self::Ndrtp)
    }

    /// Whether each iteration ends with an NNLS solve.
    pub fn uses_nnls(self) -> bool {
        !matches!(self, Self::Ndrt | Self::Rht)
    }

    /// Default cap: `m` for RHT, NNSP and NDRT, `k` for NNOMP and
    /// [`PURSUIT_MAX_ITERS`] for RHTP and NDRTP.
    pub fn default_max_iters(self, m: usize, k: usize) -> usize {
        match self {
            Self::Rht | Self::Nnsp | Self::Ndrt => m,
            Self::Nnomp => k,
            Self::Rhtp | Self::Ndrtp => PURSUIT_MAX_ITERS,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// How the stepsize is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepsizeMode {
    /// Use `RecoveryConfig::lambda` as given.
    Fixed,
    /// [`empirical_stepsize`] of the matrix dimensions.
    EmpiricalFormula,
    /// Midpoint of [`theory_stepsize_window`].
    TheoryWindow,
}

impl FromStr for StepsizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(Self::Fixed),
            "empirical" | "empirical_formula" => Ok(Self::EmpiricalFormula),
            "theory" | "theory_window" => Ok(Self::TheoryWindow),
            _ => Err(Error::InvalidConfig(format!("unknown stepsize mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Stepsize; ignored by NNOMP and NNSP and unless `stepsize_mode` is
    /// [`StepsizeMode::Fixed`].
    pub lambda: f64,
    /// Regularization of the Newton direction; NDRT and NDRTP only.
    pub eps: f64,
    pub max_iters: usize,
    /// Stop once `‖y − Ax‖ ≤ residual_tol`; `0` disables the test.
    pub residual_tol: f64,
    pub nnls: NnlsMethod,
    pub stepsize_mode: StepsizeMode,
    /// Start the pursuit NNLS solves from the previous iterate instead of 0.
    pub warm_start: bool,
}

impl RecoveryConfig {
    /// Benchmark settings for an `m x n` problem: NDRT `(λ, ε) = (2, 0.1)`,
    /// NDRTP `ε = 0.5` with [`empirical_stepsize`], RHT `λ = 0.6 − k/(2m)`,
    /// RHTP `λ = 1.6`, and the per-algorithm default iteration caps.
    pub fn benchmark_defaults(algorithm: Algorithm, k: usize, m: usize, n: usize) -> Self {
        let (lambda, eps, stepsize_mode) = match algorithm {
            Algorithm::Ndrt => (2.0, 0.1, StepsizeMode::Fixed),
            Algorithm::Ndrtp => (empirical_stepsize(m, n), 0.5, StepsizeMode::EmpiricalFormula),
            Algorithm::Rht => (0.6 - k as f64 / (2.0 * m as f64), 0.0, StepsizeMode::Fixed),
            Algorithm::Rhtp => (1.6, 0.0, StepsizeMode::Fixed),
            Algorithm::Nnomp | Algorithm::Nnsp => (1.0, 0.0, StepsizeMode::Fixed),
        };
        Self {
            algorithm,
            k,
            lambda,
            eps,
            max_iters: algorithm.default_max_iters(m, k),
            residual_tol: 0.0,
            nnls: NnlsMethod::default(),
            stepsize_mode,
            warm_start: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k == 0 {
            return fail("k must be at least 1".into());
        }
        if self.algorithm.uses_lambda()
            && self.stepsize_mode == StepsizeMode::Fixed
            && !(self.lambda > 0.0 && self.lambda.is_finite())
        {
            return fail(format!(
                "{} needs a positive finite stepsize, got {}",
                self.algorithm, self.lambda
            ));
        }
        if self.algorithm.uses_eps() && !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::NonPositiveEps(self.eps));
        }
        if !(self.residual_tol >= 0.0) {
            return fail(format!("residual_tol must be >= 0, got {}", self.residual_tol));
        }
        if self.algorithm.uses_nnls() {
            self.nnls.validate()?;
        }
        Ok(())
    }

    /// The stepsize actually used on `a`.
    pub fn resolve_lambda(&self, a: &MeasurementMatrix) -> Result<f64> {
        match self.stepsize_mode {
            StepsizeMode::Fixed => Ok(self.lambda),
            StepsizeMode::EmpiricalFormula => Ok(empirical_stepsize(a.rows(), a.cols())),
            StepsizeMode::TheoryWindow => {
                let (lo, hi) = theory_stepsize_window(a, self.eps)?;
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ResidualTol,
    MaxIters,
    FixedPoint,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            Self::ResidualTol => "residual_tol",
            Self::MaxIters => "max_iters",
            Self::FixedPoint => "fixed_point",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Nonnegative and at most `k`-sparse.
    pub x_final: SparseSignal,
    pub iterations: usize,
    pub residual_norm: f64,
    pub stop_reason: StopReason,
    /// `‖x_p − x*‖` for `p = 0, …, iterations` when ground truth was given.
    pub error_trace: Option<Vec<f64>>,
}

/// `⌈(1 + √(n/m))²⌉`.
pub fn empirical_stepsize(m: usize, n: usize) -> f64 {
    let v = (1.0 + (n as f64 / m as f64).sqrt()).powi(2);
    // an exact integer must not be pushed up by roundoff in the square root
    (v * (1.0 - 4.0 * f64::EPSILON)).ceil()
}

/// `[σm² + (σm²/σ1²)ε, σm² + ε]`, the stepsize range under which the NDRT
/// contraction bound holds.
pub fn theory_stepsize_window(a: &MeasurementMatrix, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositiveEps(eps));
    }
    let s = a.spectral()?;
    if s.sigma_max == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let s1 = s.sigma_max * s.sigma_max;
    let sm = s.sigma_min * s.sigma_min;
    Ok((sm + sm / s1 * eps, sm + eps))
}

fn check_problem(a: &Matrix, y: &[f64], x: &[f64], k: usize) -> Result<()> {
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            found: y.len(),
        });
    }
    if x.len() != a.cols() {
        return Err(Error::DimensionMismatch {
            expected: a.cols(),
            found: x.len(),
        });
    }
    if k == 0 || k > a.cols() {
        return Err(Error::SparsityOutOfRange { k, n: a.cols() });
    }
    Ok(())
}

/// `x_p + λ Aᵀ(AAᵀ + εI)⁻¹(y − A x_p)`.
fn newton_point(a: &MeasurementMatrix, y: &[f64], x_p: &[f64], lambda: f64, eps: f64) -> Result<Vec<f64>> {
    let r = a.residual(y, x_p)?;
    let d = a.newton_apply(eps, &r)?;
    let mut u = x_p.to_vec();
    axpy(lambda, &d, &mut u);
    Ok(u)
}

/// `x_p + λ Aᵀ(y − A x_p)`.
fn gradient_point(a: &Matrix, y: &[f64], x_p: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let r = a.residual(y, x_p)?;
    let g = a.matvec_t(&r)?;
    let mut u = x_p.to_vec();
    axpy(lambda, &g, &mut u);
    Ok(u)
}

/// NNLS restricted to the columns in `set`, embedded back into length `n`.
pub fn nnls_on_support(
    a: &Matrix,
    y: &[f64],
    set: &IndexSet,
    method: &NnlsMethod,
    warm: Option<&[f64]>,
) -> Result<SparseSignal> {
    let n = a.cols();
    if set.is_empty() {
        return Ok(SparseSignal::zeros(n));
    }
    let problem = NnlsProblem::new(a.select_columns(set.as_slice())?, y.to_vec())?;
    let start: Option<Vec<f64>> = warm.map(|x| set.iter().map(|i| x[i].max(0.0)).collect());
    let sol = method.solve(&problem, start.as_deref())?;
    SparseSignal::embed(n, set, &sol.w)
}

/// One NDRT update `H_k(Ψ(x_p + λ(AᵀA + εI)⁻¹Aᵀ(y − A x_p)))`.
pub fn ndrt_step(
    a: &MeasurementMatrix,
    y: &[f64],
    x_p: &[f64],
    k: usize,
    lambda: f64,
    eps: f64,
) -> Result<SparseSignal> {
    check_problem(a, y, x_p, k)?;
    let u = newton_point(a, y, x_p, lambda, eps)?;
    relu_threshold(&u, k)
}

/// One NDRTP update: the support `S` of `H_k(Ψ(u))` for the NDRT point `u`,
/// followed by NNLS on the columns in `S`.
#[allow(clippy::too_many_arguments)]
pub fn ndrtp_step(
    a: &MeasurementMatrix,
    y: &[f64],
    x_p: &[f64],
    k: usize,
    lambda: f64,
    eps: f64,
    nnls: &NnlsMethod,
    warm_start: bool,
) -> Result<SparseSignal> {
    check_problem(a, y, x_p, k)?;
    let u = newton_point(a, y, x_p, lambda, eps)?;
    let s = top_k_positive(&u, k)?;
    nnls_on_support(a, y, &s, nnls, warm_start.then_some(x_p))
}

/// One RHT update `H_k(Ψ(x_p + λAᵀ(y − A x_p)))`.
pub fn rht_step(a: &Matrix, y: &[f64], x_p: &[f64], k: usize, lambda: f64) -> Result<SparseSignal> {
    check_problem(a, y, x_p, k)?;
    let u = gradient_point(a, y, x_p, lambda)?;
    relu_threshold(&u, k)
}

/// One RHTP update: support of the RHT point, then NNLS on it.
pub fn rhtp_step(
    a: &Matrix,
    y: &[f64],
    x_p: &[f64],
    k: usize,
    lambda: f64,
    nnls: &NnlsMethod,
    warm_start: bool,
) -> Result<SparseSignal> {
    check_problem(a, y, x_p, k)?;
    let u = gradient_point(a, y, x_p, lambda)?;
    let s = top_k_positive(&u, k)?;
    nnls_on_support(a, y, &s, nnls, warm_start.then_some(x_p))
}

struct Tracker<'a> {
    a: &'a Matrix,
    y: &'a [f64],
    truth: Option<&'a [f64]>,
    trace: Option<Vec<f64>>,
    residual_tol: f64,
}

impl<'a> Tracker<'a> {
    fn new(a: &'a Matrix, y: &'a [f64], truth: Option<&'a [f64]>, residual_tol: f64) -> Result<Self> {
        if let Some(t) = truth {
            if t.len() != a.cols() {
                return Err(Error::DimensionMismatch {
                    expected: a.cols(),
                    found: t.len(),
                });
            }
        }
        Ok(Self {
            a,
            y,
            truth,
            trace: truth.map(|_| Vec::new()),
            residual_tol,
        })
    }

    /// Records `x` and returns its residual norm.
    fn record(&mut self, x: &[f64]) -> Result<f64> {
        if let (Some(t), Some(trace)) = (self.truth, self.trace.as_mut()) {
            trace.push(distance(x, t));
        }
        Ok(norm2(&self.a.residual(self.y, x)?))
    }

    fn small_residual(&self, res: f64) -> bool {
        self.residual_tol > 0.0 && res <= self.residual_tol
    }

    fn finish(self, x: SparseSignal, iterations: usize, residual_norm: f64, stop_reason: StopReason) -> RecoveryResult {
        RecoveryResult {
            x_final: x,
            iterations,
            residual_norm,
            stop_reason,
            error_trace: self.trace,
        }
    }
}

/// Nonnegative OMP: up to `min(k, max_iters)` greedy passes, each adding the
/// column with the largest positive correlation `(Aᵀr)_i` (smallest index on
/// ties) and re-solving NNLS on the selected columns. Stops early when no
/// unselected column has positive correlation.
pub fn nnomp_run(
    a: &Matrix,
    y: &[f64],
    k: usize,
    nnls: &NnlsMethod,
    max_iters: usize,
    residual_tol: f64,
    truth: Option<&[f64]>,
) -> Result<RecoveryResult> {
    let n = a.cols();
    check_problem(a, y, &vec![0.0; n], k)?;
    let mut tr = Tracker::new(a, y, truth, residual_tol)?;
    let mut x = SparseSignal::zeros(n);
    let mut res = tr.record(x.values())?;
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut iterations = 0;
    if tr.small_residual(res) {
        return Ok(tr.finish(x, 0, res, StopReason::ResidualTol));
    }
    while iterations < max_iters.min(k) {
        let r = a.residual(y, x.values())?;
        let c = a.matvec_t(&r)?;
        let mut best: Option<(usize, f64)> = None;
        for (i, &ci) in c.iter().enumerate() {
            if selected.contains(&i) {
                continue;
            }
            if best.map_or(true, |(_, b)| ci > b) {
                best = Some((i, ci));
            }
        }
        match best {
            Some((i, ci)) if ci > 0.0 => selected.push(i),
            _ => return Ok(tr.finish(x, iterations, res, StopReason::FixedPoint)),
        }
        let set: IndexSet = selected.iter().copied().collect();
        x = nnls_on_support(a, y, &set, nnls, None)?;
        iterations += 1;
        res = tr.record(x.values())?;
        if tr.small_residual(res) {
            return Ok(tr.finish(x, iterations, res, StopReason::ResidualTol));
        }
    }
    Ok(tr.finish(x, iterations, res, StopReason::MaxIters))
}

/// Nonnegative subspace pursuit from `x0`. Each iteration merges `supp(x)`
/// with `L_k(Ψ(Aᵀr))`, solves NNLS on the merged columns, keeps the `k`
/// largest positive coefficients and solves NNLS again on those. Stops when
/// the support repeats.
#[allow(clippy::too_many_arguments)]
pub fn nnsp_run_from(
    a: &Matrix,
    y: &[f64],
    k: usize,
    nnls: &NnlsMethod,
    max_iters: usize,
    residual_tol: f64,
    x0: SparseSignal,
    truth: Option<&[f64]>,
) -> Result<RecoveryResult> {
    check_problem(a, y, x0.values(), k)?;
    let mut tr = Tracker::new(a, y, truth, residual_tol)?;
    let mut x = x0;
    let mut res = tr.record(x.values())?;
    if tr.small_residual(res) {
        return Ok(tr.finish(x, 0, res, StopReason::ResidualTol));
    }
    for p in 0..max_iters {
        let r = a.residual(y, x.values())?;
        let c = a.matvec_t(&r)?;
        let candidates = x.support().union(&top_k_positive(&c, k)?);
        let wide = nnls_on_support(a, y, &candidates, nnls, None)?;
        let s = if wide.nnz() > k {
            top_k_positive(wide.values(), k)?
        } else {
            wide.support().clone()
        };
        let next = nnls_on_support(a, y, &s, nnls, None)?;
        let same_support = s == *x.support();
        let delta = distance(next.values(), x.values());
        x = next;
        res = tr.record(x.values())?;
        if tr.small_residual(res) {
            return Ok(tr.finish(x, p + 1, res, StopReason::ResidualTol));
        }
        if same_support || delta < FIXED_POINT_TOL {
            return Ok(tr.finish(x, p + 1, res, StopReason::FixedPoint));
        }
    }
    Ok(tr.finish(x, max_iters, res, StopReason::MaxIters))
}

/// [`nnsp_run_from`] starting at zero.
pub fn nnsp_run(
    a: &Matrix,
    y: &[f64],
    k: usize,
    nnls: &NnlsMethod,
    max_iters: usize,
    residual_tol: f64,
    truth: Option<&[f64]>,
) -> Result<RecoveryResult> {
    nnsp_run_from(a, y, k, nnls, max_iters, residual_tol, SparseSignal::zeros(a.cols()), truth)
}

/// Runs `cfg.algorithm` from `x = 0`. `truth` enables the error trace.
pub fn run_recovery(
    a: &MeasurementMatrix,
    y: &[f64],
    cfg: &RecoveryConfig,
    truth: Option<&[f64]>,
) -> Result<RecoveryResult> {
    run_recovery_from(a, y, cfg, SparseSignal::zeros(a.cols()), truth)
}

/// Runs `cfg.algorithm` from a nonnegative, at most `k`-sparse `x0`.
/// NNOMP always starts from zero and ignores `x0`.
pub fn run_recovery_from(
    a: &MeasurementMatrix,
    y: &[f64],
    cfg: &RecoveryConfig,
    x0: SparseSignal,
    truth: Option<&[f64]>,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    let k = cfg.k;
    check_problem(a, y, x0.values(), k)?;
    if let Some(index) = x0.values().iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeEntry {
            index,
            value: x0.values()[index],
        });
    }
    if x0.nnz() > k {
        return Err(Error::InvalidConfig(format!(
            "initial point has {} nonzeros, more than k = {k}",
            x0.nnz()
        )));
    }
    let alg = cfg.algorithm;
    match alg {
        Algorithm::Nnomp => {
            return nnomp_run(a, y, k, &cfg.nnls, cfg.max_iters, cfg.residual_tol, truth)
        }
        Algorithm::Nnsp => {
            return nnsp_run_from(a, y, k, &cfg.nnls, cfg.max_iters, cfg.residual_tol, x0, truth)
        }
        _ => {}
    }
    let lambda = cfg.resolve_lambda(a)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidConfig(format!("resolved stepsize {lambda} is not positive")));
    }
    let mut tr = Tracker::new(a, y, truth, cfg.residual_tol)?;
    let mut x = x0;
    let mut res = tr.record(x.values())?;
    if tr.small_residual(res) {
        return Ok(tr.finish(x, 0, res, StopReason::ResidualTol));
    }
    for p in 0..cfg.max_iters {
        let xv = x.values();
        let next = match alg {
            Algorithm::Ndrt => ndrt_step(a, y, xv, k, lambda, cfg.eps)?,
            Algorithm::Ndrtp => ndrtp_step(a, y, xv, k, lambda, cfg.eps, &cfg.nnls, cfg.warm_start)?,
            Algorithm::Rht => rht_step(a, y, xv, k, lambda)?,
            Algorithm::Rhtp => rhtp_step(a, y, xv, k, lambda, &cfg.nnls, cfg.warm_start)?,
            Algorithm::Nnomp | Algorithm::Nnsp => unreachable!(),
        };
        let delta = distance(next.values(), xv);
        x = next;
        res = tr.record(x.values())?;
        if tr.small_residual(res) {
            return Ok(tr.finish(x, p + 1, res, StopReason::ResidualTol));
        }
        if delta < FIXED_POINT_TOL {
            return Ok(tr.finish(x, p + 1, res, StopReason::FixedPoint));
        }
    }
    Ok(tr.finish(x, cfg.max_iters, res, StopReason::MaxIters))
}
