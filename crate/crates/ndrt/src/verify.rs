//! Toy-scale runs of the inequality checks in `ndrt_core::theory`.

use std::fmt;

use ndrt_core::bench::gen_instance;
use ndrt_core::theory::{
    self, check_golden_ratio_bound, check_ndrt_contraction, check_ndrtp_contraction,
    check_newton_operator_bounds, check_projection_bound, check_relu_contraction,
    check_rip_inequalities, near_isometry, CheckReport, ContractionSetup,
};
use ndrt_core::{theory_stepsize_window, Matrix, MeasurementMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, CliResult};

/// Redraws allowed while looking for a matrix that meets a check's hypothesis.
pub const MAX_DRAWS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckKind {
    /// Restricted isometry inequalities for Aᵀu, I − AᵀA and its bilinear form.
    Rip,
    /// Hard thresholding error within the golden ratio of the restricted error.
    GoldenRatio,
    /// ReLU never increases the restricted distance to a nonnegative vector.
    Relu,
    /// Bounds on I − λ(AᵀA + εI)⁻¹AᵀA and the norm of q(AᵀA).
    NewtonOperator,
    /// Error of the exact NNLS projection onto a support.
    Projection,
    /// Per-iterate NDRT contraction on certified near-isometries.
    NdrtContraction,
    /// Per-iterate NDRTP contraction on certified near-isometries.
    NdrtpContraction,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Rip,
        CheckKind::GoldenRatio,
        CheckKind::Relu,
        CheckKind::NewtonOperator,
        CheckKind::Projection,
        CheckKind::NdrtContraction,
        CheckKind::NdrtpContraction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rip => "rip",
            Self::GoldenRatio => "golden-ratio",
            Self::Relu => "relu",
            Self::NewtonOperator => "newton-operator",
            Self::Projection => "projection",
            Self::NdrtContraction => "ndrt-contraction",
            Self::NdrtpContraction => "ndrtp-contraction",
        }
    }

    /// `(m, n, s, trials)` used when not overridden.
    fn defaults(self) -> (usize, usize, usize, usize) {
        match self {
            Self::Rip => (8, 12, 3, 10_000),
            Self::GoldenRatio | Self::Relu => (8, 12, 3, 10_000),
            Self::NewtonOperator => (6, 10, 3, 10_000),
            Self::Projection => (8, 12, 2, 1_000),
            Self::NdrtContraction | Self::NdrtpContraction => (11, 12, 1, 20),
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub checks: Vec<CheckKind>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    /// Sparsity or RIC order.
    pub s: Option<usize>,
    pub eps: f64,
    /// Stepsize for the operator and contraction checks; defaults to the
    /// midpoint of the theory window.
    pub lambda: Option<f64>,
    pub trials: Option<usize>,
    /// Matrices drawn for each contraction check.
    pub instances: usize,
    pub iterations: usize,
    pub noise: f64,
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            checks: CheckKind::ALL.to_vec(),
            m: None,
            n: None,
            s: None,
            eps: 0.5,
            lambda: None,
            trials: None,
            instances: 10,
            iterations: 30,
            noise: 1e-3,
            perturbation: 0.02,
            seed: 2024,
        }
    }
}

/// One printed line of a verification run.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyLine {
    pub check: CheckKind,
    pub report: CheckReport,
    pub detail: String,
}

impl VerifyLine {
    pub fn passed(&self) -> bool {
        self.report.passed() && self.report.trials > 0
    }
}

impl fmt::Display for VerifyLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}/{} trials={} violations={} worst_excess={:.3e} worst_ratio={:.6}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.check,
            self.report.name,
            self.report.trials,
            self.report.violations,
            self.report.worst_excess,
            self.report.worst_ratio,
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn gaussian_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> CliResult<Matrix> {
    Ok(gen_instance(m, n, 1, 0.0, rng)?.a)
}

fn stepsize(a: &MeasurementMatrix, opts: &VerifyOptions) -> CliResult<f64> {
    match opts.lambda {
        Some(l) => Ok(l),
        None => {
            let (lo, hi) = theory_stepsize_window(a, opts.eps)?;
            Ok(0.5 * (lo + hi))
        }
    }
}

/// Runs the selected checks. Every check gets its own generator seeded from
/// `opts.seed` and the check's position in [`CheckKind::ALL`].
pub fn run_checks(opts: &VerifyOptions) -> CliResult<Vec<VerifyLine>> {
    let mut lines = Vec::new();
    for &check in &opts.checks {
        let (dm, dn, ds, dt) = check.defaults();
        let (m, n, s) = (opts.m.unwrap_or(dm), opts.n.unwrap_or(dn), opts.s.unwrap_or(ds));
        let trials = opts.trials.unwrap_or(dt);
        if m == 0 || n == 0 || s == 0 || s > n {
            return Err(CliError::Validation(format!(
                "{check}: need 1 <= s <= n and m, n >= 1 (got m = {m}, n = {n}, s = {s})"
            )));
        }
        let stream = CheckKind::ALL.iter().position(|&c| c == check).unwrap() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(stream);
        let dims = format!("m={m} n={n} s={s}");
        match check {
            CheckKind::Rip => {
                let a = gaussian_matrix(m, n, &mut rng)?;
                for report in check_rip_inequalities(&a, s, trials, &mut rng)? {
                    lines.push(VerifyLine {
                        check,
                        report,
                        detail: dims.clone(),
                    });
                }
            }
            CheckKind::GoldenRatio => lines.push(VerifyLine {
                check,
                report: check_golden_ratio_bound(n, s, trials, &mut rng)?,
                detail: format!("n={n} k={s}"),
            }),
            CheckKind::Relu => lines.push(VerifyLine {
                check,
                report: check_relu_contraction(n, s, trials, &mut rng)?,
                detail: format!("n={n} k={s}"),
            }),
            CheckKind::NewtonOperator => {
                let a = MeasurementMatrix::new(gaussian_matrix(m, n, &mut rng)?);
                let lambda = stepsize(&a, opts)?;
                let rep = check_newton_operator_bounds(&a, opts.eps, lambda, s, trials, &mut rng)?;
                let detail = format!("{dims} eps={} lambda={lambda:.6}", opts.eps);
                let mut qnorm = CheckReport::new("q_norm_eigenvalue_formula");
                let gap = (rep.q_norm_assembled - rep.q_norm_formula).abs();
                qnorm.record(gap, theory::ROUNDOFF * 100.0 * (1.0 + rep.q_norm_formula));
                lines.push(VerifyLine {
                    check,
                    report: rep.bilinear,
                    detail: detail.clone(),
                });
                lines.push(VerifyLine {
                    check,
                    report: rep.restricted,
                    detail: detail.clone(),
                });
                lines.push(VerifyLine {
                    check,
                    report: qnorm,
                    detail: format!(
                        "assembled {:.12} formula {:.12}",
                        rep.q_norm_assembled, rep.q_norm_formula
                    ),
                });
            }
            CheckKind::Projection => {
                // redraw until the bound's hypothesis δ2k < 1 holds
                let mut draws = 0;
                let report = loop {
                    draws += 1;
                    let a = gaussian_matrix(m, n, &mut rng)?;
                    match check_projection_bound(&a, s, opts.noise, trials, &mut rng) {
                        Ok(r) => break r,
                        Err(ndrt_core::Error::Hypothesis(msg)) if draws < MAX_DRAWS => {
                            log::debug!("projection draw {draws} rejected: {msg}");
                        }
                        Err(e) => return Err(e.into()),
                    }
                };
                lines.push(VerifyLine {
                    check,
                    report,
                    detail: format!("{dims} draws={draws}"),
                });
            }
            CheckKind::NdrtContraction | CheckKind::NdrtpContraction => {
                let mut total = None::<CheckReport>;
                let mut worst_condition = f64::NEG_INFINITY;
                let mut worst_factor = f64::NEG_INFINITY;
                let mut draws = 0;
                for _ in 0..opts.instances {
                    let (bc, rep) = loop {
                        draws += 1;
                        let a = MeasurementMatrix::new(near_isometry(n, opts.perturbation, &mut rng)?);
                        let lambda = stepsize(&a, opts)?;
                        let setup = ContractionSetup {
                            k: s,
                            eps: opts.eps,
                            lambda,
                            noise: opts.noise,
                            trials,
                            iterations: opts.iterations,
                        };
                        let out = if check == CheckKind::NdrtContraction {
                            check_ndrt_contraction(&a, &setup, &mut rng)
                        } else {
                            check_ndrtp_contraction(&a, &setup, &mut rng)
                        };
                        match out {
                            Ok(v) => break v,
                            Err(ndrt_core::Error::Hypothesis(msg)) if draws < MAX_DRAWS * opts.instances => {
                                log::debug!("{check} draw {draws} rejected: {msg}");
                            }
                            Err(e) => return Err(e.into()),
                        }
                    };
                    worst_condition = worst_condition.max(if check == CheckKind::NdrtContraction {
                        bc.condition_ndrt
                    } else {
                        bc.condition_ndrtp
                    });
                    let factor = if check == CheckKind::NdrtContraction {
                        bc.alpha
                    } else {
                        bc.rho.unwrap_or(f64::INFINITY)
                    };
                    worst_factor = worst_factor.max(factor);
                    match total.as_mut() {
                        Some(t) => t.merge(&rep),
                        None => total = Some(rep),
                    }
                }
                let report = total.unwrap_or_else(|| CheckReport::new("no instances"));
                let factor_name = if check == CheckKind::NdrtContraction { "alpha" } else { "rho" };
                lines.push(VerifyLine {
                    check,
                    report,
                    detail: format!(
                        "n={n} k={s} instances={} draws={draws} max condition={worst_condition:.4} max {factor_name}={worst_factor:.4}",
                        opts.instances
                    ),
                });
            }
        }
    }
    Ok(lines)
}
