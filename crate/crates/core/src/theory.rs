//! Restricted isometry constants and randomized checks of the inequalities
//! behind the NDRT and NDRTP convergence bounds.
//!
//! Every check returns a [`CheckReport`]. A violation means the left side
//! exceeded the right side by more than [`ROUNDOFF`] relative to their size,
//! which for a correct implementation on a certified instance never happens.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{dot, norm2, symmetric_eigenvalues, Cholesky, Matrix, MeasurementMatrix};
use crate::nnls::{active_set_oracle, NnlsMethod, NnlsProblem};
use crate::recovery::{ndrt_step, ndrtp_step};
use crate::thresholding::{hard_threshold, relu, restricted_norm, IndexSet, SparseSignal};
use crate::{Error, Result, GOLDEN_RATIO};

/// Largest number of supports [`ric_bruteforce`] will enumerate.
pub const MAX_SUPPORTS: u64 = 1_000_000;

/// Relative slack granted to floating point roundoff in every inequality.
pub const ROUNDOFF: f64 = 1e-10;

/// `(√5 − 1)/2`, the NDRT threshold on `δ3k + σ1² − σm²`.
pub const NDRT_CONDITION: f64 = 0.618_033_988_749_894_8;

/// `1/√3`, the NDRTP threshold on `δ3k + σ1² − σm²`.
pub const NDRTP_CONDITION: f64 = 0.577_350_269_189_625_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RicMode {
    ExactBruteforce,
    /// Maximum over sampled supports; a lower bound on the true constant.
    MonteCarloLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicEstimate {
    pub order: usize,
    pub delta: f64,
    pub mode: RicMode,
    pub supports_checked: u64,
}

/// `C(n, s)`, or `None` once it exceeds `limit`.
pub fn binomial_capped(n: usize, s: usize, limit: u64) -> Option<u64> {
    if s > n {
        return Some(0);
    }
    let s = s.min(n - s);
    let mut c: u128 = 1;
    for i in 0..s {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > limit as u128 {
            return None;
        }
    }
    Some(c as u64)
}

/// `max(λmax − 1, 1 − λmin)` of `A_Tᵀ A_T`.
pub fn support_deviation(a: &Matrix, support: &[usize]) -> Result<f64> {
    let g = a.select_columns(support)?.gram_cols();
    let ev = symmetric_eigenvalues(&g)?;
    let hi = ev[0];
    let lo = ev[ev.len() - 1];
    Ok((hi - 1.0).max(1.0 - lo).max(0.0))
}

fn advance(comb: &mut [usize], n: usize) -> bool {
    let s = comb.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if comb[i] < n - s + i {
            comb[i] += 1;
            for j in i + 1..s {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact `δ_s` by enumerating every support of size `s`. Orders above `n`
/// are treated as `n`.
pub fn ric_bruteforce(a: &Matrix, s: usize) -> Result<RicEstimate> {
    let n = a.cols();
    if s == 0 {
        return Err(Error::SparsityOutOfRange { k: s, n });
    }
    let order = s.min(n);
    if binomial_capped(n, order, MAX_SUPPORTS).is_none() {
        return Err(Error::TooLarge(format!(
            "C({n}, {order}) supports exceed the enumeration limit {MAX_SUPPORTS}"
        )));
    }
    let mut comb: Vec<usize> = (0..order).collect();
    let mut delta = 0.0f64;
    let mut checked = 0u64;
    loop {
        delta = delta.max(support_deviation(a, &comb)?);
        checked += 1;
        if !advance(&mut comb, n) {
            break;
        }
    }
    Ok(RicEstimate {
        order: s,
        delta,
        mode: RicMode::ExactBruteforce,
        supports_checked: checked,
    })
}

/// Lower bound on `δ_s` from `samples` uniformly drawn supports.
pub fn ric_monte_carlo<R: Rng + ?Sized>(
    a: &Matrix,
    s: usize,
    samples: u64,
    rng: &mut R,
) -> Result<RicEstimate> {
    let n = a.cols();
    if s == 0 {
        return Err(Error::SparsityOutOfRange { k: s, n });
    }
    let order = s.min(n);
    let mut delta = 0.0f64;
    for _ in 0..samples {
        let mut t = sample(rng, n, order).into_vec();
        t.sort_unstable();
        delta = delta.max(support_deviation(a, &t)?);
    }
    Ok(RicEstimate {
        order: s,
        delta,
        mode: RicMode::MonteCarloLowerBound,
        supports_checked: samples,
    })
}

/// Outcome of one randomized inequality check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` seen; negative when every trial held strictly.
    pub worst_excess: f64,
    /// Largest `lhs / rhs` over trials with `rhs > 0`.
    pub worst_ratio: f64,
}

impl CheckReport {
    pub fn new(name: &'static str) -> Self {
        Self {
            name,
            trials: 0,
            violations: 0,
            worst_excess: f64::NEG_INFINITY,
            worst_ratio: 0.0,
        }
    }

    /// Adds one trial of `lhs ≤ rhs`.
    pub fn record(&mut self, lhs: f64, rhs: f64) {
        self.trials += 1;
        let excess = lhs - rhs;
        self.worst_excess = self.worst_excess.max(excess);
        if rhs > 0.0 {
            self.worst_ratio = self.worst_ratio.max(lhs / rhs);
        }
        if !(excess <= ROUNDOFF * (1.0 + lhs.abs() + rhs.abs())) {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Folds another report of the same check into this one.
    pub fn merge(&mut self, other: &CheckReport) {
        self.trials += other.trials;
        self.violations += other.violations;
        self.worst_excess = self.worst_excess.max(other.worst_excess);
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
    }
}

fn gaussian<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn random_set<R: Rng + ?Sized>(n: usize, s: usize, rng: &mut R) -> IndexSet {
    sample(rng, n, s.min(n)).into_iter().collect()
}

/// Random subset of `set` with between 1 and `|set|` elements.
fn random_subset<R: Rng + ?Sized>(set: &IndexSet, rng: &mut R) -> IndexSet {
    let s = set.len();
    if s == 0 {
        return IndexSet::empty();
    }
    let size = rng.random_range(1..=s);
    sample(rng, s, size).into_iter().map(|j| set.as_slice()[j]).collect()
}

/// Gaussian vector supported on `set`.
fn supported_gaussian<R: Rng + ?Sized>(n: usize, set: &IndexSet, rng: &mut R) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for i in set.iter() {
        v[i] = StandardNormal.sample(rng);
    }
    v
}

/// Nonnegative `k`-sparse vector with `|N(0, 1)|` entries on a uniform support.
fn nonneg_sparse<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Vec<f64> {
    let set = random_set(n, k, rng);
    let mut v = supported_gaussian(n, &set, rng);
    v.iter_mut().for_each(|x| *x = x.abs());
    v
}

/// `(I − AᵀA) v`.
fn identity_gap(a: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    let av = a.matvec(v)?;
    let atav = a.matvec_t(&av)?;
    Ok(v.iter().zip(&atav).map(|(x, y)| x - y).collect())
}

/// Checks, with the exact `δ_s`, over `trials` random inputs:
///
/// * `‖(Aᵀu)_Ω‖ ≤ √(1 + δ_s) ‖u‖` for `|Ω| ≤ s`,
/// * `‖((I − AᵀA)v)_Γ‖ ≤ δ_s ‖v‖` for `|Γ ∪ supp v| ≤ s`,
/// * `|⟨v, (I − AᵀA)w⟩| ≤ δ_s ‖v‖‖w‖` for `|supp v ∪ supp w| ≤ s`.
pub fn check_rip_inequalities<R: Rng + ?Sized>(
    a: &Matrix,
    s: usize,
    trials: usize,
    rng: &mut R,
) -> Result<[CheckReport; 3]> {
    let delta = ric_bruteforce(a, s)?.delta;
    let (m, n) = (a.rows(), a.cols());
    let mut adj = CheckReport::new("rip_adjoint_restricted");
    let mut gap = CheckReport::new("rip_identity_gap_restricted");
    let mut bil = CheckReport::new("rip_identity_gap_bilinear");
    for _ in 0..trials {
        let u = gaussian(m, rng);
        let omega = random_set(n, s, rng);
        let atu = a.matvec_t(&u)?;
        adj.record(restricted_norm(&atu, &omega), (1.0 + delta).sqrt() * norm2(&u));

        let t = random_set(n, s, rng);
        let v = supported_gaussian(n, &random_subset(&t, rng), rng);
        let gamma = random_subset(&t, rng);
        let g = identity_gap(a, &v)?;
        gap.record(restricted_norm(&g, &gamma), delta * norm2(&v));

        let w = supported_gaussian(n, &random_subset(&t, rng), rng);
        let gw = identity_gap(a, &w)?;
        bil.record(dot(&v, &gw).abs(), delta * norm2(&v) * norm2(&w));
    }
    Ok([adj, gap, bil])
}

/// `‖H_k(u) − x‖ ≤ φ ‖(u − x)_Ω‖` with `Ω = supp H_k(u) ∪ supp x`, for random
/// `u` and `k`-sparse `x` of length `n`. Half of the trials draw `u` near `x`.
pub fn check_golden_ratio_bound<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("golden_ratio_thresholding");
    for t in 0..trials {
        let set = random_set(n, k, rng);
        let x = supported_gaussian(n, &set, rng);
        let noise = gaussian(n, rng);
        let scale = if t % 2 == 0 { 1.0 } else { 0.1 };
        let u: Vec<f64> = x.iter().zip(&noise).map(|(a, b)| a + scale * b).collect();
        let h = hard_threshold(&u, k)?;
        let omega = h.support().union(&IndexSet::support_of(&x));
        let diff: Vec<f64> = u.iter().zip(&x).map(|(a, b)| a - b).collect();
        let lhs = norm2(&h.values().iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
        rep.record(lhs, GOLDEN_RATIO * restricted_norm(&diff, &omega));
    }
    Ok(rep)
}

/// `‖(Ψ(u) − x)_Ω‖ ≤ ‖(u − x)_Ω‖` for nonnegative `x` and any `u`, `Ω`.
pub fn check_relu_contraction<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    trials: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let mut rep = CheckReport::new("relu_contraction");
    for _ in 0..trials {
        let x = nonneg_sparse(n, k, rng);
        let u = gaussian(n, rng);
        let size = rng.random_range(1..=n);
        let omega = random_set(n, size, rng);
        let up = relu(&u);
        let lhs: Vec<f64> = up.iter().zip(&x).map(|(a, b)| a - b).collect();
        let rhs: Vec<f64> = u.iter().zip(&x).map(|(a, b)| a - b).collect();
        rep.record(restricted_norm(&lhs, &omega), restricted_norm(&rhs, &omega));
    }
    Ok(rep)
}

/// `M = I − λ(AᵀA + εI)⁻¹AᵀA`, assembled as a dense `n x n` matrix.
pub fn newton_operator(a: &Matrix, eps: f64, lambda: f64) -> Result<Matrix> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositiveEps(eps));
    }
    let n = a.cols();
    let ata = a.gram_cols();
    let mut shifted = ata.clone();
    for i in 0..n {
        shifted[(i, i)] += eps;
    }
    let chol = Cholesky::new(&shifted)?;
    let mut m = Matrix::identity(n);
    for j in 0..n {
        let col = chol.solve(ata.col(j))?;
        for (dst, c) in m.col_mut(j).iter_mut().zip(col) {
            *dst -= lambda * c;
        }
    }
    Ok(m)
}

/// `q(t) = (1 − λ/(t + ε)) t`.
pub fn q_value(t: f64, eps: f64, lambda: f64) -> f64 {
    (1.0 - lambda / (t + eps)) * t
}

/// Results of [`check_newton_operator_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOperatorReport {
    pub bilinear: CheckReport,
    pub restricted: CheckReport,
    /// `‖q(AᵀA)‖` from the eigenvalues of the assembled matrix.
    pub q_norm_assembled: f64,
    /// `q(σ1²)`.
    pub q_norm_formula: f64,
}

/// Checks the two bounds on `M = I − λ(AᵀA + εI)⁻¹AᵀA` with
/// `c = δ_s + σ1² − λσ1²/(σ1² + ε)`:
///
/// * `|⟨u, Mv⟩| ≤ c ‖u‖‖v‖` for `|supp u ∪ supp v| ≤ s`,
/// * `‖(Mv)_Ω‖ ≤ c ‖v‖` for `|Ω ∪ supp v| ≤ s`,
///
/// and compares `‖q(AᵀA)‖` with `q(σ1²)`. Refuses when `λ > σm² + ε`.
pub fn check_newton_operator_bounds<R: Rng + ?Sized>(
    a: &MeasurementMatrix,
    eps: f64,
    lambda: f64,
    s: usize,
    trials: usize,
    rng: &mut R,
) -> Result<NewtonOperatorReport> {
    let spec = a.spectral()?;
    let (s1, sm) = (spec.sigma_max.powi(2), spec.sigma_min.powi(2));
    if lambda > sm + eps || lambda < 0.0 {
        return Err(Error::Hypothesis(format!(
            "stepsize {lambda} outside [0, σm² + ε] = [0, {}]",
            sm + eps
        )));
    }
    let delta = ric_bruteforce(a, s)?.delta;
    let mop = newton_operator(a, eps, lambda)?;
    let q1 = q_value(s1, eps, lambda);
    let c = delta + q1;

    // q(AᵀA) = M − (I − AᵀA), symmetrized against roundoff
    let ata = a.gram_cols();
    let n = a.cols();
    let mut qm = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            qm[(i, j)] = mop[(i, j)] - id + ata[(i, j)];
        }
    }
    let qs = symmetrized(&qm);
    let ev = symmetric_eigenvalues(&qs)?;
    let q_norm_assembled = ev.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    let mut bilinear = CheckReport::new("newton_operator_bilinear");
    let mut restricted = CheckReport::new("newton_operator_restricted");
    for _ in 0..trials {
        let t = random_set(n, s, rng);
        let u = supported_gaussian(n, &random_subset(&t, rng), rng);
        let v = supported_gaussian(n, &random_subset(&t, rng), rng);
        let mv = mop.matvec(&v)?;
        bilinear.record(dot(&u, &mv).abs(), c * norm2(&u) * norm2(&v));
        let omega = random_subset(&t, rng);
        restricted.record(restricted_norm(&mv, &omega), c * norm2(&v));
    }
    Ok(NewtonOperatorReport {
        bilinear,
        restricted,
        q_norm_assembled,
        q_norm_formula: q1,
    })
}

fn symmetrized(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut s = m.clone();
    for j in 0..n {
        for i in 0..n {
            s[(i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]);
        }
    }
    s
}

/// Constants of the NDRT and NDRTP error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub delta_k: f64,
    pub delta_2k: f64,
    pub delta_3k: f64,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub eps: f64,
    pub lambda: f64,
    /// `φ(δ3k + σ1² − λσ1²/(σ1² + ε))`.
    pub alpha: f64,
    /// `φλσ1/(σm² + ε)`.
    pub gamma: f64,
    /// `√(2/(1 − δ2k²))(δ3k + σ1² − λσ1²/(σ1² + ε))`; `None` when `δ2k ≥ 1`.
    pub rho: Option<f64>,
    /// `√(2/(1 − δ2k²))λσ1/(σm² + ε) + √(1 + δk)/(1 − δ2k)`; `None` when
    /// `δ2k ≥ 1`.
    pub tau: Option<f64>,
    /// `δ3k + σ1² − σm²`, compared with [`NDRT_CONDITION`].
    pub condition_ndrt: f64,
    /// The same quantity, compared with [`NDRTP_CONDITION`].
    pub condition_ndrtp: f64,
    pub lambda_window: (f64, f64),
}

impl BoundConstants {
    /// Evaluates every constant from raw RIC and singular values.
    pub fn from_parts(
        deltas: [f64; 3],
        sigma_max: f64,
        sigma_min: f64,
        eps: f64,
        lambda: f64,
    ) -> Self {
        let [delta_k, delta_2k, delta_3k] = deltas;
        let s1 = sigma_max * sigma_max;
        let sm = sigma_min * sigma_min;
        let core = delta_3k + s1 - lambda * s1 / (s1 + eps);
        let alpha = GOLDEN_RATIO * core;
        let gamma = GOLDEN_RATIO * lambda * sigma_max / (sm + eps);
        let (rho, tau) = if delta_2k < 1.0 {
            let lead = (2.0 / (1.0 - delta_2k * delta_2k)).sqrt();
            (
                Some(lead * core),
                Some(lead * lambda * sigma_max / (sm + eps) + (1.0 + delta_k).sqrt() / (1.0 - delta_2k)),
            )
        } else {
            (None, None)
        };
        let condition = delta_3k + s1 - sm;
        let window = if s1 > 0.0 {
            (sm + sm / s1 * eps, sm + eps)
        } else {
            (f64::NAN, f64::NAN)
        };
        Self {
            delta_k,
            delta_2k,
            delta_3k,
            sigma_max,
            sigma_min,
            eps,
            lambda,
            alpha,
            gamma,
            rho,
            tau,
            condition_ndrt: condition,
            condition_ndrtp: condition,
            lambda_window: window,
        }
    }

    pub fn lambda_in_window(&self) -> bool {
        let (lo, hi) = self.lambda_window;
        let slack = ROUNDOFF * (1.0 + hi.abs());
        self.lambda >= lo - slack && self.lambda <= hi + slack
    }

    /// Hypotheses of the NDRT bound hold.
    pub fn ndrt_certified(&self) -> bool {
        self.condition_ndrt < NDRT_CONDITION && self.lambda_in_window()
    }

    /// Hypotheses of the NDRTP bound hold.
    pub fn ndrtp_certified(&self) -> bool {
        self.condition_ndrtp < NDRTP_CONDITION && self.lambda_in_window() && self.delta_2k < 1.0
    }
}

/// [`BoundConstants`] with exact `δk, δ2k, δ3k` and the cached spectrum of `a`.
pub fn bound_constants(a: &MeasurementMatrix, eps: f64, lambda: f64, k: usize) -> Result<BoundConstants> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::NonPositiveEps(eps));
    }
    let d1 = ric_bruteforce(a, k)?.delta;
    let d2 = ric_bruteforce(a, 2 * k)?.delta;
    let d3 = ric_bruteforce(a, 3 * k)?.delta;
    let spec = a.spectral()?;
    if spec.sigma_max == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(BoundConstants::from_parts(
        [d1, d2, d3],
        spec.sigma_max,
        spec.sigma_min,
        eps,
        lambda,
    ))
}

/// For random nonnegative `k`-sparse `x`, noise `e` with `‖e‖ = noise` and
/// supports `Λ` with `|Λ| ≤ k`, checks that the exact NNLS solution `z*` on `Λ`
/// satisfies
/// `‖z* − x‖ ≤ ‖(z* − x)_Λ̄‖/√(1 − δ2k²) + √(1 + δk)‖e‖/(1 − δ2k)`.
///
/// Every fourth trial uses `Λ = supp x`. Requires `δ2k < 1` and `k ≤ 16`.
pub fn check_projection_bound<R: Rng + ?Sized>(
    a: &Matrix,
    k: usize,
    noise: f64,
    trials: usize,
    rng: &mut R,
) -> Result<CheckReport> {
    let d1 = ric_bruteforce(a, k)?.delta;
    let d2 = ric_bruteforce(a, 2 * k)?.delta;
    if d2 >= 1.0 {
        return Err(Error::Hypothesis(format!("δ2k = {d2} is not below 1")));
    }
    let (m, n) = (a.rows(), a.cols());
    let c1 = 1.0 / (1.0 - d2 * d2).sqrt();
    let c2 = (1.0 + d1).sqrt() / (1.0 - d2);
    let mut rep = CheckReport::new("nnls_projection_bound");
    for t in 0..trials {
        let x = nonneg_sparse(n, k, rng);
        let mut e = gaussian(m, rng);
        let ne = norm2(&e);
        e.iter_mut().for_each(|v| *v *= noise / ne);
        let y: Vec<f64> = a.matvec(&x)?.iter().zip(&e).map(|(p, q)| p + q).collect();
        let lam = if t % 4 == 0 {
            IndexSet::support_of(&x)
        } else {
            let size = rng.random_range(1..=k);
            random_set(n, size, rng)
        };
        let z = exact_projection(a, &y, &lam)?;
        let diff: Vec<f64> = z.values().iter().zip(&x).map(|(p, q)| p - q).collect();
        let outside = restricted_norm(&diff, &lam.complement(n));
        rep.record(norm2(&diff), c1 * outside + c2 * noise);
    }
    Ok(rep)
}

/// Settings for the per-iterate contraction checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionSetup {
    pub k: usize,
    pub eps: f64,
    pub lambda: f64,
    /// `‖e‖` of the measurement noise.
    pub noise: f64,
    pub trials: usize,
    pub iterations: usize,
}

fn noisy_instance<R: Rng + ?Sized>(
    a: &Matrix,
    k: usize,
    noise: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = nonneg_sparse(a.cols(), k, rng);
    let mut y = a.matvec(&x)?;
    if noise > 0.0 {
        let e = gaussian(a.rows(), rng);
        let ne = norm2(&e);
        for (yi, ei) in y.iter_mut().zip(e) {
            *yi += noise * ei / ne;
        }
    }
    Ok((x, y))
}

/// Runs NDRT from zero and from random nonnegative starts and checks every
/// step against `‖x_{p+1} − x‖ ≤ α‖x_p − x‖ + γ‖e‖`. Refuses unless the
/// instance is certified by [`BoundConstants::ndrt_certified`].
pub fn check_ndrt_contraction<R: Rng + ?Sized>(
    a: &MeasurementMatrix,
    setup: &ContractionSetup,
    rng: &mut R,
) -> Result<(BoundConstants, CheckReport)> {
    let bc = bound_constants(a, setup.eps, setup.lambda, setup.k)?;
    if !bc.ndrt_certified() {
        return Err(Error::Hypothesis(format!(
            "NDRT bound not certified: condition {} (needs < {NDRT_CONDITION}), λ = {} window {:?}",
            bc.condition_ndrt, setup.lambda, bc.lambda_window
        )));
    }
    let mut rep = CheckReport::new("ndrt_contraction");
    for t in 0..setup.trials {
        let (x, y) = noisy_instance(a, setup.k, setup.noise, rng)?;
        let mut xp = start_point(a.cols(), setup.k, t, rng);
        for _ in 0..setup.iterations {
            let next = ndrt_step(a, &y, &xp, setup.k, setup.lambda, setup.eps)?;
            let before = dist(&xp, &x);
            let after = dist(next.values(), &x);
            rep.record(after, bc.alpha * before + bc.gamma * setup.noise);
            xp = next.into_values();
        }
    }
    Ok((bc, rep))
}

/// As [`check_ndrt_contraction`] for NDRTP with `ρ` and `τ`. The NNLS step is
/// solved exactly by enumeration, matching the argmin in the update.
pub fn check_ndrtp_contraction<R: Rng + ?Sized>(
    a: &MeasurementMatrix,
    setup: &ContractionSetup,
    rng: &mut R,
) -> Result<(BoundConstants, CheckReport)> {
    let bc = bound_constants(a, setup.eps, setup.lambda, setup.k)?;
    let (Some(rho), Some(tau)) = (bc.rho, bc.tau) else {
        return Err(Error::Hypothesis(format!("δ2k = {} is not below 1", bc.delta_2k)));
    };
    if !bc.ndrtp_certified() {
        return Err(Error::Hypothesis(format!(
            "NDRTP bound not certified: condition {} (needs < {NDRTP_CONDITION}), λ = {} window {:?}",
            bc.condition_ndrtp, setup.lambda, bc.lambda_window
        )));
    }
    let exact = NnlsMethod::ExhaustiveActiveSet;
    let mut rep = CheckReport::new("ndrtp_contraction");
    for t in 0..setup.trials {
        let (x, y) = noisy_instance(a, setup.k, setup.noise, rng)?;
        let mut xp = start_point(a.cols(), setup.k, t, rng);
        for _ in 0..setup.iterations {
            let next = ndrtp_step(a, &y, &xp, setup.k, setup.lambda, setup.eps, &exact, false)?;
            let before = dist(&xp, &x);
            let after = dist(next.values(), &x);
            rep.record(after, rho * before + tau * setup.noise);
            xp = next.into_values();
        }
    }
    Ok((bc, rep))
}

fn start_point<R: Rng + ?Sized>(n: usize, k: usize, trial: usize, rng: &mut R) -> Vec<f64> {
    if trial % 2 == 0 {
        vec![0.0; n]
    } else {
        nonneg_sparse(n, k, rng)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::distance(a, b)
}

/// `m = n − 1` rows orthonormal to the all-ones vector, plus `perturbation`
/// times a Gaussian matrix with `N(0, 1/m)` entries. With no perturbation
/// `AAᵀ = I` and `δ_s = s/n`.
pub fn near_isometry<R: Rng + ?Sized>(n: usize, perturbation: f64, rng: &mut R) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("near-isometry needs n >= 2, got {n}")));
    }
    let m = n - 1;
    // Householder reflector mapping e_n to the normalized ones vector; its
    // first n − 1 rows span the orthogonal complement of that vector
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    v[n - 1] -= 1.0;
    let vv = dot(&v, &v);
    let scale = (m as f64).sqrt().recip();
    let mut a = Matrix::zeros(m, n);
    for j in 0..n {
        for i in 0..m {
            let id = if i == j { 1.0 } else { 0.0 };
            let noise: f64 = StandardNormal.sample(rng);
            a[(i, j)] = id - 2.0 * v[i] * v[j] / vv + perturbation * scale * noise;
        }
    }
    Ok(a)
}

/// Exact NNLS on `A_Λ`, embedded in length `n`.
pub fn exact_projection(a: &Matrix, y: &[f64], lam: &IndexSet) -> Result<SparseSignal> {
    if lam.is_empty() {
        return Ok(SparseSignal::zeros(a.cols()));
    }
    let p = NnlsProblem::new(a.select_columns(lam.as_slice())?, y.to_vec())?;
    SparseSignal::embed(a.cols(), lam, &active_set_oracle(&p)?.w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial_capped(5, 2, 100), Some(10));
        assert_eq!(binomial_capped(12, 0, 100), Some(1));
        assert_eq!(binomial_capped(3, 4, 100), Some(0));
        assert_eq!(binomial_capped(60, 30, MAX_SUPPORTS), None);
    }

    #[test]
    fn ric_of_scaled_identity() {
        let a = Matrix::identity(6).scaled(1.5);
        let r = ric_bruteforce(&a, 2).unwrap();
        assert!((r.delta - 1.25).abs() < 1e-12);
        assert_eq!(r.supports_checked, 15);
        let i = Matrix::identity(5);
        assert_eq!(ric_bruteforce(&i, 3).unwrap().delta, 0.0);
    }

    #[test]
    fn ric_refuses_huge_enumeration() {
        let a = Matrix::identity(60);
        assert!(matches!(ric_bruteforce(&a, 30), Err(Error::TooLarge(_))));
    }

    #[test]
    fn near_isometry_has_unit_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = near_isometry(8, 0.0, &mut rng).unwrap();
        let g = a.gram_rows();
        for i in 0..7 {
            for j in 0..7 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((g[(i, j)] - id).abs() < 1e-14);
            }
        }
        let d = ric_bruteforce(&a, 3).unwrap().delta;
        assert!((d - 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_isometry_endpoint() {
        let eps = 0.3;
        let bc = BoundConstants::from_parts([0.0; 3], 1.0, 1.0, eps, 1.0 + eps);
        assert!(bc.alpha.abs() < 1e-15);
        assert!((bc.gamma - GOLDEN_RATIO).abs() < 1e-15);
        assert_eq!(bc.lambda_window, (1.0 + eps, 1.0 + eps));
        assert!(bc.ndrt_certified() && bc.ndrtp_certified());
    }

    #[test]
    fn rho_undefined_past_unit_delta() {
        let bc = BoundConstants::from_parts([0.5, 1.0, 1.2], 1.0, 0.5, 0.1, 0.3);
        assert_eq!(bc.rho, None);
        assert_eq!(bc.tau, None);
        assert!(!bc.ndrtp_certified());
    }
}
