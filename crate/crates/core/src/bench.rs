//! Random instances, success-frequency sweeps and threshold extraction.
//!
//! Randomness comes from ChaCha8 seeded with the plan seed; trial `t` at
//! sparsity `k` reads stream `(k << 32) | t`, so every trial can be
//! regenerated on its own and in any order.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{distance, norm2, Matrix, MeasurementMatrix};
use crate::nnls::NnlsMethod;
use crate::recovery::{run_recovery, Algorithm, RecoveryConfig, StepsizeMode};
use crate::{Error, Result};

/// Success frequency levels reported as thresholds.
pub const THRESHOLD_LEVELS: [f64; 3] = [0.9, 0.8, 0.5];

/// Default relative error below which a recovery counts as a success.
pub const DEFAULT_SUCCESS_TOL: f64 = 1e-4;

/// One algorithm in a plan, with optional overrides of its benchmark
/// defaults ([`RecoveryConfig::benchmark_defaults`]).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSetup {
    pub algorithm: Algorithm,
    pub lambda: Option<f64>,
    pub eps: Option<f64>,
    pub max_iters: Option<usize>,
    pub residual_tol: f64,
    pub nnls: NnlsMethod,
    pub warm_start: bool,
}

impl AlgorithmSetup {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            lambda: None,
            eps: None,
            max_iters: None,
            residual_tol: 0.0,
            nnls: NnlsMethod::default(),
            warm_start: false,
        }
    }

    /// The configuration used at sparsity `k` on an `m x n` problem.
    pub fn config(&self, k: usize, m: usize, n: usize) -> RecoveryConfig {
        let mut cfg = RecoveryConfig::benchmark_defaults(self.algorithm, k, m, n);
        if let Some(l) = self.lambda {
            cfg.lambda = l;
            cfg.stepsize_mode = StepsizeMode::Fixed;
        }
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        if let Some(it) = self.max_iters {
            cfg.max_iters = it;
        }
        cfg.residual_tol = self.residual_tol;
        cfg.nnls = self.nnls;
        cfg.warm_start = self.warm_start;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub m: usize,
    pub n: usize,
    /// Strictly increasing sparsity levels.
    pub k_grid: Vec<usize>,
    pub trials_per_k: usize,
    /// `‖e‖`; 0 gives noiseless measurements.
    pub noise_level: f64,
    pub algorithms: Vec<AlgorithmSetup>,
    pub seed: u64,
    pub success_tol: f64,
}

impl ExperimentPlan {
    /// `600 x 2000`, `k = 5, 10, …, 400`, 50 trials, all six algorithms.
    pub fn paper(noise_level: f64, seed: u64) -> Self {
        Self {
            m: 600,
            n: 2000,
            k_grid: (1..=80).map(|t| 5 * t).collect(),
            trials_per_k: 50,
            noise_level,
            algorithms: Algorithm::ALL.into_iter().map(AlgorithmSetup::new).collect(),
            seed,
            success_tol: DEFAULT_SUCCESS_TOL,
        }
    }

    /// Reduced plan: `150 x 500`, `k = 5, 10, …, 125`, 20 trials.
    pub fn desk(noise_level: f64, seed: u64) -> Self {
        Self {
            m: 150,
            n: 500,
            k_grid: (1..=25).map(|t| 5 * t).collect(),
            trials_per_k: 20,
            ..Self::paper(noise_level, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.n == 0 {
            return fail(format!("dimensions must be positive, got {} x {}", self.m, self.n));
        }
        if self.trials_per_k == 0 {
            return fail("trials per k must be at least 1".into());
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("k grid must be strictly increasing".into());
        }
        if let Some(&k) = self.k_grid.iter().find(|&&k| k == 0 || k > self.n) {
            return Err(Error::SparsityOutOfRange { k, n: self.n });
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return fail(format!("noise level must be >= 0, got {}", self.noise_level));
        }
        if !(self.success_tol > 0.0) {
            return fail(format!("success tolerance must be > 0, got {}", self.success_tol));
        }
        for (i, s) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].iter().any(|o| o.algorithm == s.algorithm) {
                return fail(format!("{} listed twice", s.algorithm));
            }
            for &k in &self.k_grid {
                s.config(k, self.m, self.n).validate()?;
            }
        }
        Ok(())
    }
}

/// Stream id of trial `trial` at sparsity `k`.
pub fn stream_id(k: usize, trial: usize) -> u64 {
    ((k as u64) << 32) | (trial as u64 & 0xffff_ffff)
}

/// Generator for one trial.
pub fn trial_rng(seed: u64, k: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(k, trial));
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: Matrix,
    pub x_star: Vec<f64>,
    pub y: Vec<f64>,
}

/// Draws, in this order: `A` column by column with `N(0, 1/m)` entries, the
/// support of `x*` by partial Fisher–Yates, its values `|N(0, 1)|` in support
/// order, and for `noise_level > 0` a Gaussian `h` added as
/// `noise_level · h/‖h‖`.
pub fn gen_instance<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    k: usize,
    noise_level: f64,
    rng: &mut R,
) -> Result<Instance> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    let sd = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n)
        .map(|_| sd * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect();
    let a = Matrix::from_col_major(m, n, data)?;

    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        perm.swap(i, j);
    }
    let mut x_star = vec![0.0; n];
    for &i in &perm[..k] {
        let v: f64 = StandardNormal.sample(rng);
        x_star[i] = v.abs();
    }

    let mut y = a.matvec(&x_star)?;
    if noise_level > 0.0 {
        let h: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        let nh = norm2(&h);
        for (yi, hi) in y.iter_mut().zip(&h) {
            *yi += noise_level * hi / nh;
        }
    }
    Ok(Instance { a, x_star, y })
}

/// `(‖x̂ − x*‖/‖x*‖ ≤ tol, ‖x̂ − x*‖/‖x*‖)`.
pub fn success_check(x_hat: &[f64], x_star: &[f64], tol: f64) -> Result<(bool, f64)> {
    if x_hat.len() != x_star.len() {
        return Err(Error::DimensionMismatch {
            expected: x_star.len(),
            found: x_hat.len(),
        });
    }
    let nx = norm2(x_star);
    if nx == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    let rel = distance(x_hat, x_star) / nx;
    Ok((rel <= tol, rel))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub algorithm: Algorithm,
    pub k: usize,
    pub trial: usize,
    /// Stream id the trial was drawn from.
    pub seed: u64,
    pub success: bool,
    /// Infinite when the run returned an error.
    pub rel_error: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
}

/// Source of wall-clock time in seconds from an arbitrary origin.
pub trait Clock {
    fn now_s(&self) -> f64;
}

/// Clock that always reads zero, for builds without a time source.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_s(&self) -> f64 {
        0.0
    }
}

/// Runs every algorithm of `plan` on trial `trial` at sparsity `k`. All
/// algorithms see the same instance; each gets its own copy of `A` with empty
/// caches so factorization time is charged to every run.
pub fn run_trial<C: Clock + ?Sized>(
    plan: &ExperimentPlan,
    k: usize,
    trial: usize,
    clock: &C,
) -> Result<Vec<TrialOutcome>> {
    let mut rng = trial_rng(plan.seed, k, trial);
    let inst = gen_instance(plan.m, plan.n, k, plan.noise_level, &mut rng)?;
    let mut out = Vec::with_capacity(plan.algorithms.len());
    for setup in &plan.algorithms {
        let cfg = setup.config(k, plan.m, plan.n);
        let a = MeasurementMatrix::new(inst.a.clone());
        let t0 = clock.now_s();
        let run = run_recovery(&a, &inst.y, &cfg, None);
        let wall_time_s = clock.now_s() - t0;
        let (success, rel_error, iterations) = match run {
            Ok(r) => {
                let (ok, rel) = success_check(r.x_final.values(), &inst.x_star, plan.success_tol)?;
                (ok, rel, r.iterations)
            }
            Err(_) => (false, f64::INFINITY, 0),
        };
        out.push(TrialOutcome {
            algorithm: setup.algorithm,
            k,
            trial,
            seed: stream_id(k, trial),
            success,
            rel_error,
            iterations,
            wall_time_s,
        });
    }
    Ok(out)
}

/// All `(k, trial)` pairs of a plan in output order.
pub fn work_items(plan: &ExperimentPlan) -> Vec<(usize, usize)> {
    plan.k_grid
        .iter()
        .flat_map(|&k| (0..plan.trials_per_k).map(move |t| (k, t)))
        .collect()
}

/// Sequential sweep over the whole plan.
pub fn run_sweep<C: Clock + ?Sized>(
    plan: &ExperimentPlan,
    clock: &C,
) -> Result<(Vec<TrialOutcome>, SweepSummary)> {
    plan.validate()?;
    let mut outcomes = Vec::new();
    if !plan.algorithms.is_empty() {
        for (k, t) in work_items(plan) {
            outcomes.extend(run_trial(plan, k, t, clock)?);
        }
    }
    let summary = SweepSummary::from_outcomes(plan, &outcomes)?;
    Ok((outcomes, summary))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub success_frequency: f64,
    /// Mean wall time over successful trials; `None` without successes.
    pub mean_time_success: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub algorithm: Algorithm,
    pub level: f64,
    /// Largest `k` on the grid whose success frequency reaches `level`.
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SummaryRow>,
    pub thresholds: Vec<ThresholdRow>,
}

impl SweepSummary {
    /// Aggregates outcomes in any order. Every `(algorithm, k)` of the plan
    /// must have exactly `trials_per_k` outcomes.
    pub fn from_outcomes(plan: &ExperimentPlan, outcomes: &[TrialOutcome]) -> Result<Self> {
        let mut rows = Vec::new();
        let mut thresholds = Vec::new();
        for setup in &plan.algorithms {
            let alg = setup.algorithm;
            let mut alg_rows = Vec::with_capacity(plan.k_grid.len());
            for &k in &plan.k_grid {
                let mut count = 0usize;
                let mut successes = 0usize;
                let mut time = 0.0;
                for o in outcomes.iter().filter(|o| o.algorithm == alg && o.k == k) {
                    count += 1;
                    if o.success {
                        successes += 1;
                        time += o.wall_time_s;
                    }
                }
                if count != plan.trials_per_k {
                    return Err(Error::InvalidConfig(format!(
                        "{alg} at k = {k} has {count} outcomes, expected {}",
                        plan.trials_per_k
                    )));
                }
                alg_rows.push(SummaryRow {
                    algorithm: alg,
                    k,
                    success_frequency: successes as f64 / count as f64,
                    mean_time_success: (successes > 0).then(|| time / successes as f64),
                });
            }
            for level in THRESHOLD_LEVELS {
                let k = alg_rows
                    .iter()
                    .filter(|r| r.success_frequency >= level)
                    .map(|r| r.k)
                    .max();
                thresholds.push(ThresholdRow {
                    algorithm: alg,
                    level,
                    k,
                });
            }
            rows.extend(alg_rows);
        }
        Ok(Self { rows, thresholds })
    }

    pub fn frequency(&self, algorithm: Algorithm, k: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.k == k)
            .map(|r| r.success_frequency)
    }

    pub fn threshold(&self, algorithm: Algorithm, level: f64) -> Option<usize> {
        self.thresholds
            .iter()
            .find(|t| t.algorithm == algorithm && t.level == level)
            .and_then(|t| t.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_ids_are_distinct() {
        assert_ne!(stream_id(5, 1), stream_id(1, 5));
        assert_eq!(stream_id(0, 7), 7);
    }

    #[test]
    fn noiseless_instance_is_consistent() {
        let mut rng = trial_rng(3, 4, 0);
        let inst = gen_instance(20, 30, 4, 0.0, &mut rng).unwrap();
        assert_eq!(inst.x_star.iter().filter(|&&v| v != 0.0).count(), 4);
        assert!(inst.x_star.iter().all(|&v| v >= 0.0));
        let r = inst.a.residual(&inst.y, &inst.x_star).unwrap();
        assert_eq!(norm2(&r), 0.0);
    }

    #[test]
    fn noisy_instance_has_requested_noise() {
        let mut rng = trial_rng(3, 4, 1);
        let inst = gen_instance(20, 30, 30, 1e-4, &mut rng).unwrap();
        assert!(inst.x_star.iter().all(|&v| v > 0.0));
        let r = inst.a.residual(&inst.y, &inst.x_star).unwrap();
        assert!((norm2(&r) - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn success_check_examples() {
        assert_eq!(success_check(&[1.0, 2.0], &[1.0, 2.0], 1e-4).unwrap(), (true, 0.0));
        assert_eq!(success_check(&[0.0, 0.0], &[3.0, 4.0], 1e-4).unwrap(), (false, 1.0));
        let (ok, rel) = success_check(&[3.0 * (1.0 + 5e-5), 4.0 * (1.0 + 5e-5)], &[3.0, 4.0], 1e-4).unwrap();
        assert!(ok && (rel - 5e-5).abs() < 1e-12);
        assert_eq!(success_check(&[1.0], &[0.0], 1e-4), Err(Error::ZeroGroundTruth));
    }

    #[test]
    fn plan_validation() {
        let mut p = ExperimentPlan::desk(0.0, 1);
        assert!(p.validate().is_ok());
        p.trials_per_k = 0;
        assert!(p.validate().is_err());
        let mut q = ExperimentPlan::desk(0.0, 1);
        q.k_grid = vec![10, 5];
        assert!(q.validate().is_err());
        let mut r = ExperimentPlan::desk(0.0, 1);
        r.k_grid = vec![501];
        assert!(matches!(r.validate(), Err(Error::SparsityOutOfRange { .. })));
    }

    #[test]
    fn empty_algorithm_list() {
        let mut p = ExperimentPlan::desk(0.0, 1);
        p.algorithms.clear();
        let (out, summary) = run_sweep(&p, &NoClock).unwrap();
        assert!(out.is_empty() && summary.rows.is_empty());
    }
}
