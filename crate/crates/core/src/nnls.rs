//! Nonnegative least squares `min ½‖y − Bw‖²  s.t.  w ≥ 0`.
//!
//! [`gradient_projection_nnls`] is the solver used inside the pursuit
//! algorithms. [`active_set_oracle`] enumerates every active set and is only
//! meant for small problems and tests.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;


use crate::linalg::{dot, lstsq, Matrix};
use crate::{Error, Result};

/// Largest column count accepted by [`active_set_oracle`].
pub const ORACLE_MAX_COLS: usize = 16;
/// Free coordinates above `-ORACLE_FEASIBILITY_TOL` count as feasible.
pub const ORACLE_FEASIBILITY_TOL: f64 = 1e-12;
const ORACLE_RANK_TOL: f64 = 1e-10;

/// Least squares data: an `m x k` matrix `B` and right-hand side `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct NnlsProblem {
    b: Matrix,
    y: Vec<f64>,
}

impl NnlsProblem {
    pub fn new(b: Matrix, y: Vec<f64>) -> Result<Self> {
        if y.len() != b.rows() {
            return Err(Error::DimensionMismatch {
                expected: b.rows(),
                found: y.len(),
            });
        }
        Ok(Self { b, y })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    pub fn rhs(&self) -> &[f64] {
        &self.y
    }

    pub fn num_vars(&self) -> usize {
        self.b.cols()
    }

    /// `½‖y − Bw‖²`.
    pub fn objective(&self, w: &[f64]) -> Result<f64> {
        let r = self.b.residual(&self.y, w)?;
        Ok(0.5 * dot(&r, &r))
    }

    /// `Bᵀ(Bw − y)`.
    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        let r = self.b.residual(&self.y, w)?;
        Ok(self.b.matvec_t(&r)?.into_iter().map(|v| -v).collect())
    }
}

/// Constants of the gradient projection loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpConfig {
    /// Cap `C` on the step length.
    pub step_cap: f64,
    pub max_iters: usize,
    /// Coordinates with `|w_i| < eta1` and a negative gradient step are frozen.
    pub eta1: f64,
    /// Stop once `‖w_new − w_old‖ < eta2`.
    pub eta2: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            step_cap: 0.6,
            max_iters: 300,
            eta1: 1e-6,
            eta2: 1e-8,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.step_cap > 0.0
            && self.step_cap.is_finite()
            && self.max_iters >= 1
            && self.eta1 > 0.0
            && self.eta2 > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "gradient projection needs C > 0, max_iters >= 1, eta1 > 0, eta2 > 0 (got {self:?})"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NnlsStatus {
    ConvergedStepTol,
    HitIterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    /// Entrywise nonnegative.
    pub w: Vec<f64>,
    pub iterations: usize,
    pub status: NnlsStatus,
    pub kkt_residual: f64,
    /// Iterations whose objective went up. The fixed step rule has no line
    /// search, so this can be nonzero on ill-conditioned problems.
    pub nonmonotone_steps: usize,
}

/// Which NNLS solver a pursuit algorithm uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NnlsMethod {
    GradientProjection(GpConfig),
    /// Exact solution by [`active_set_oracle`]; at most [`ORACLE_MAX_COLS`]
    /// columns.
    ExhaustiveActiveSet,
}

impl Default for NnlsMethod {
    fn default() -> Self {
        Self::GradientProjection(GpConfig::default())
    }
}

impl NnlsMethod {
    /// Solves `p`, starting gradient projection from `warm` when given.
    pub fn solve(&self, p: &NnlsProblem, warm: Option<&[f64]>) -> Result<NnlsSolution> {
        match self {
            Self::GradientProjection(cfg) => match warm {
                Some(w0) => gradient_projection_nnls_from(p, cfg, w0),
                None => gradient_projection_nnls(p, cfg),
            },
            Self::ExhaustiveActiveSet => active_set_oracle(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::GradientProjection(cfg) => cfg.validate(),
            Self::ExhaustiveActiveSet => Ok(()),
        }
    }
}

/// Gradient projection from `w = 0`.
pub fn gradient_projection_nnls(p: &NnlsProblem, cfg: &GpConfig) -> Result<NnlsSolution> {
    gradient_projection_nnls_from(p, cfg, &vec![0.0; p.num_vars()])
}

/// Gradient projection from a given nonnegative start.
///
/// Each iteration takes `a = Bᵀ(y − Bw)`, freezes coordinates with
/// `a_i < 0` and `|w_i| < η1`, and moves along the remaining gradient with
/// `β = min(C, −max{w_i/d_i : d_i < 0})`, i.e. at most `C` and never past the
/// first coordinate that would hit zero.
pub fn gradient_projection_nnls_from(
    p: &NnlsProblem,
    cfg: &GpConfig,
    w0: &[f64],
) -> Result<NnlsSolution> {
    cfg.validate()?;
    let k = p.num_vars();
    if w0.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: w0.len(),
        });
    }
    if let Some(index) = w0.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeEntry {
            index,
            value: w0[index],
        });
    }
    // a = c − G w with G = BᵀB, c = Bᵀy; O(k²) per iteration
    let gram = p.b.gram_cols();
    let c = p.b.matvec_t(&p.y)?;
    let half_yy = 0.5 * dot(&p.y, &p.y);

    let mut w = w0.to_vec();
    let mut a = vec![0.0; k];
    let mut d = vec![0.0; k];
    let mut status = NnlsStatus::HitIterationCap;
    let mut iterations = 0;
    let mut nonmonotone_steps = 0;
    let mut prev_obj = f64::INFINITY;

    for _ in 0..cfg.max_iters {
        for (i, ai) in a.iter_mut().enumerate() {
            *ai = c[i] - dot(gram.col(i), &w);
        }
        // f(w) = ½‖y‖² − cᵀw + ½wᵀGw = ½‖y‖² − ½cᵀw − ½wᵀa
        let obj = half_yy - 0.5 * dot(&c, &w) - 0.5 * dot(&w, &a);
        if obj > prev_obj * (1.0 + 1e-12) + 1e-300 {
            nonmonotone_steps += 1;
        }
        prev_obj = obj;

        for i in 0..k {
            d[i] = if a[i] < 0.0 && w[i].abs() < cfg.eta1 {
                0.0
            } else {
                a[i]
            };
        }
        let blocking = (0..k)
            .filter(|&i| d[i] < 0.0)
            .map(|i| w[i] / d[i])
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |m| m.max(r))));
        let beta = match blocking {
            None => cfg.step_cap,
            Some(max_ratio) => cfg.step_cap.min(-max_ratio),
        };
        iterations += 1;
        if !(beta > 0.0) {
            // a blocked coordinate sits exactly on the boundary
            status = NnlsStatus::ConvergedStepTol;
            break;
        }
        let mut step2 = 0.0;
        for i in 0..k {
            let delta = beta * d[i];
            w[i] += delta;
            step2 += delta * delta;
        }
        if step2.sqrt() < cfg.eta2 {
            status = NnlsStatus::ConvergedStepTol;
            break;
        }
    }
    for wi in &mut w {
        if *wi < 0.0 {
            *wi = 0.0;
        }
    }
    let kkt_residual = kkt_residual(p, &w)?;
    Ok(NnlsSolution {
        w,
        iterations,
        status,
        kkt_residual,
        nonmonotone_steps,
    })
}

/// KKT violation of a nonnegative `w`: with `g = Bᵀ(Bw − y)`, the larger of
/// `max_i max(−g_i, 0)` (dual infeasibility) and `max_i |g_i w_i|`
/// (complementary slackness). Zero exactly at the NNLS optimum.
pub fn kkt_residual(p: &NnlsProblem, w: &[f64]) -> Result<f64> {
    if let Some(index) = w.iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeEntry {
            index,
            value: w[index],
        });
    }
    let g = p.gradient(w)?;
    Ok(g.iter()
        .zip(w)
        .map(|(&gi, &wi)| (-gi).max(0.0).max((gi * wi).abs()))
        .fold(0.0, f64::max))
}

/// Exact NNLS by enumerating all `2^k` free sets.
///
/// Each free set gets an unconstrained least squares solve; candidates with a
/// free coordinate below `-ORACLE_FEASIBILITY_TOL` are discarded and rank
/// deficient free sets are skipped. The feasible candidate with the smallest
/// objective wins, so the result is the global optimum whenever `B` has full
/// column rank.
pub fn active_set_oracle(p: &NnlsProblem) -> Result<NnlsSolution> {
    let k = p.num_vars();
    if k > ORACLE_MAX_COLS {
        return Err(Error::TooLarge(format!(
            "active-set enumeration over {k} columns (limit {ORACLE_MAX_COLS})"
        )));
    }
    let mut best = vec![0.0; k];
    let mut best_obj = p.objective(&best)?;
    let mut candidates = 0usize;
    let mut free = Vec::with_capacity(k);
    for mask in 1u32..(1u32 << k) {
        free.clear();
        free.extend((0..k).filter(|&j| mask & (1 << j) != 0));
        let sub = p.b.select_columns(&free)?;
        let Some(coef) = lstsq(&sub, &p.y, ORACLE_RANK_TOL)? else {
            continue;
        };
        if coef.iter().any(|&v| v < -ORACLE_FEASIBILITY_TOL) {
            continue;
        }
        candidates += 1;
        let mut w = vec![0.0; k];
        for (&j, &v) in free.iter().zip(&coef) {
            w[j] = v.max(0.0);
        }
        let obj = p.objective(&w)?;
        if obj < best_obj {
            best_obj = obj;
            best = w;
        }
    }
    let kkt_residual = kkt_residual(p, &best)?;
    Ok(NnlsSolution {
        w: best,
        iterations: candidates,
        status: NnlsStatus::ConvergedStepTol,
        kkt_residual,
        nonmonotone_steps: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(rows: &[&[f64]], y: &[f64]) -> NnlsProblem {
        NnlsProblem::new(Matrix::from_rows(rows).unwrap(), y.to_vec()).unwrap()
    }

    #[test]
    fn published_constants_are_the_defaults() {
        let cfg = GpConfig::default();
        assert_eq!(cfg.step_cap, 0.6);
        assert_eq!(cfg.max_iters, 300);
        assert_eq!(cfg.eta1, 1e-6);
        assert_eq!(cfg.eta2, 1e-8);
    }

    #[test]
    fn gp_identity_interior_optimum() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 2.0]);
        let sol = gradient_projection_nnls(&p, &GpConfig::default()).unwrap();
        assert!((sol.w[0] - 1.0).abs() < 1e-6);
        assert!((sol.w[1] - 2.0).abs() < 1e-6);
        assert_eq!(sol.status, NnlsStatus::ConvergedStepTol);
    }

    #[test]
    fn gp_boundary_optimum() {
        let p = problem(&[&[1.0], &[0.0]], &[-1.0, 0.0]);
        let sol = gradient_projection_nnls(&p, &GpConfig::default()).unwrap();
        assert_eq!(sol.w, vec![0.0]);
        assert_eq!(sol.kkt_residual, 0.0);
    }

    #[test]
    fn gp_reports_iteration_cap() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1e-3]], &[1.0, 1.0]);
        let cfg = GpConfig {
            max_iters: 5,
            ..GpConfig::default()
        };
        let sol = gradient_projection_nnls(&p, &cfg).unwrap();
        assert_eq!(sol.status, NnlsStatus::HitIterationCap);
        assert_eq!(sol.iterations, 5);
        assert!(sol.w.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn gp_rejects_bad_config_and_start() {
        let p = problem(&[&[1.0]], &[1.0]);
        let cfg = GpConfig {
            step_cap: 0.0,
            ..GpConfig::default()
        };
        assert!(matches!(
            gradient_projection_nnls(&p, &cfg),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            gradient_projection_nnls_from(&p, &GpConfig::default(), &[-1.0]),
            Err(Error::NegativeEntry { index: 0, .. })
        ));
    }

    #[test]
    fn kkt_examples() {
        let p = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 2.0]);
        assert_eq!(kkt_residual(&p, &[1.0, 2.0]).unwrap(), 0.0);
        let q = problem(&[&[1.0, 0.0], &[0.0, 1.0]], &[-3.0, 0.0]);
        assert_eq!(kkt_residual(&q, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(
            kkt_residual(&q, &[-1.0, 0.0]),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn kkt_shrinks_with_perturbation() {
        let p = problem(&[&[2.0, 1.0], &[0.0, 1.0], &[1.0, 0.0]], &[3.0, 1.0, 1.0]);
        let opt = active_set_oracle(&p).unwrap();
        let mut prev = f64::INFINITY;
        for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
            let w: Vec<f64> = opt.w.iter().map(|v| v + delta).collect();
            let r = kkt_residual(&p, &w).unwrap();
            assert!(r > 0.0 && r < prev);
            prev = r;
        }
    }

    #[test]
    fn oracle_examples() {
        let p = problem(
            &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]],
            &[1.0, -1.0, 2.0],
        );
        let sol = active_set_oracle(&p).unwrap();
        assert!((sol.w[0] - 1.0).abs() < 1e-14);
        assert_eq!(sol.w[1], 0.0);
        assert!((sol.w[2] - 2.0).abs() < 1e-14);

        let ortho = problem(&[&[1.0], &[0.0]], &[0.0, 5.0]);
        assert_eq!(active_set_oracle(&ortho).unwrap().w, vec![0.0]);
    }

    #[test]
    fn oracle_refuses_large_problems() {
        let p = NnlsProblem::new(Matrix::zeros(2, 17), vec![0.0; 2]).unwrap();
        assert!(matches!(active_set_oracle(&p), Err(Error::TooLarge(_))));
    }
}
