//! Argument parsing and the three subcommands.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ndrt_core::bench::{gen_instance, success_check, AlgorithmSetup, ExperimentPlan, DEFAULT_SUCCESS_TOL};
use ndrt_core::{
    run_recovery, Algorithm, GpConfig, MeasurementMatrix, NnlsMethod, RecoveryConfig, StepsizeMode,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigFile, ResolvedConfig};
use crate::error::{CliError, CliResult};
use crate::io;
use crate::sweep::run_sweep_parallel;
use crate::verify::{run_checks, CheckKind, VerifyOptions};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NDRT_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "ndrt-out";
/// Noise level of the noisy half of the `paper` preset.
pub const PAPER_NOISE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "ndrt", version, about = "Nonnegative sparse recovery by Newton-direction ReLU thresholding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover one signal from files or from a generated instance.
    Recover(RecoverArgs),
    /// Success-frequency sweep over a sparsity grid.
    Bench(BenchArgs),
    /// Randomized checks of the recovery guarantees at toy scale.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// `key = value` file; keys are long flag names. Flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $NDRT_OUT_DIR, else ndrt-out]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

/// Stepsize choice on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaArg {
    /// The benchmark default of the algorithm.
    Auto,
    /// Midpoint of the stepsize window derived from the extreme singular values.
    Theory,
    Value(f64),
}

impl FromStr for LambdaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(Self::Auto),
            "theory" => Ok(Self::Theory),
            v => v
                .parse::<f64>()
                .map(Self::Value)
                .map_err(|_| format!("expected auto, theory or a number, got {s:?}")),
        }
    }
}

impl fmt::Display for LambdaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Theory => f.write_str("theory"),
            Self::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NnlsChoice {
    /// Gradient projection with the capped step rule.
    Gp,
    /// Exhaustive active-set search; supports of at most 16 columns.
    Exact,
}

impl FromStr for NnlsChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl fmt::Display for NnlsChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gp => "gp",
            Self::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct NnlsArgs {
    /// NNLS solver used by the pursuit algorithms [default: gp]
    #[arg(long, value_enum)]
    pub nnls: Option<NnlsChoice>,
    /// Upper bound on the projected-gradient step [default: 0.6]
    #[arg(long)]
    pub nnls_step_cap: Option<f64>,
    /// Projected-gradient iteration cap [default: 300]
    #[arg(long)]
    pub nnls_max_iters: Option<usize>,
    /// Coordinates closer to zero than this are frozen [default: 1e-6]
    #[arg(long)]
    pub nnls_eta1: Option<f64>,
    /// Stop once a step is shorter than this [default: 1e-8]
    #[arg(long)]
    pub nnls_eta2: Option<f64>,
}

impl NnlsArgs {
    fn resolve(&self, cfg: &ConfigFile, out: &mut ResolvedConfig) -> CliResult<NnlsMethod> {
        let choice = cfg.pick(self.nnls, "nnls")?.unwrap_or(NnlsChoice::Gp);
        let d = GpConfig::default();
        let gp = GpConfig {
            step_cap: cfg.pick(self.nnls_step_cap, "nnls-step-cap")?.unwrap_or(d.step_cap),
            max_iters: cfg.pick(self.nnls_max_iters, "nnls-max-iters")?.unwrap_or(d.max_iters),
            eta1: cfg.pick(self.nnls_eta1, "nnls-eta1")?.unwrap_or(d.eta1),
            eta2: cfg.pick(self.nnls_eta2, "nnls-eta2")?.unwrap_or(d.eta2),
        };
        out.set("nnls", choice)
            .set("nnls-step-cap", gp.step_cap)
            .set("nnls-max-iters", gp.max_iters)
            .set("nnls-eta1", gp.eta1)
            .set("nnls-eta2", gp.eta2);
        let method = match choice {
            NnlsChoice::Gp => NnlsMethod::GradientProjection(gp),
            NnlsChoice::Exact => NnlsMethod::ExhaustiveActiveSet,
        };
        method.validate()?;
        Ok(method)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// ndrt, ndrtp, rht, rhtp, nnomp or nnsp [default: ndrtp]
    #[arg(long)]
    pub algo: Option<Algorithm>,
    /// Sparsity level of the output.
    #[arg(long)]
    pub k: Option<usize>,
    /// `auto`, `theory` or a positive number [default: auto]
    #[arg(long)]
    pub lambda: Option<LambdaArg>,
    /// Newton regularization [default: 0.1 for NDRT, 0.5 for NDRTP]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Iteration cap [default: per algorithm]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop when the residual norm falls to this value; 0 disables [default: 0]
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Warm-start the pursuit NNLS solves from the previous iterate.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub warm_start: Option<bool>,
    #[command(flatten)]
    pub nnls: NnlsArgs,
    /// Measurement matrix (binary `NNSM1` or CSV).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Measurement vector.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    /// Ground truth, for the relative error.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Rows of a generated instance [default: 600]
    #[arg(long)]
    pub m: Option<usize>,
    /// Columns of a generated instance [default: 2000]
    #[arg(long)]
    pub n: Option<usize>,
    /// Nonzeros of a generated ground truth [default: k]
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Noise norm of a generated instance [default: 0]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Seed of a generated instance [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative error counted as success when a truth is known [default: 1e-4]
    #[arg(long)]
    pub success_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// 600 x 2000, k = 5..400, 50 trials, noiseless and noisy.
    Paper,
    /// 150 x 500, k = 5..125, 20 trials, noiseless.
    Desk,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Paper => "paper",
            Self::Desk => "desk",
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Starting plan; other flags override its fields [default: desk]
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub k_step: Option<usize>,
    /// Trials per sparsity level.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Noise norm. The paper preset runs 0 and 1e-4 unless this is given.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Relative error counted as success [default: 1e-4]
    #[arg(long)]
    pub success_tol: Option<f64>,
    /// Comma separated algorithms [default: all six]
    #[arg(long, value_delimiter = ',')]
    pub algos: Vec<Algorithm>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core [default: 0]
    #[arg(long)]
    pub threads: Option<usize>,
    /// Fixed stepsize for every stepsize-based algorithm, replacing the defaults.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Newton regularization for NDRT and NDRTP, replacing the defaults.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Iteration cap for every algorithm, replacing the defaults.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub warm_start: Option<bool>,
    #[command(flatten)]
    pub nnls: NnlsArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Checks to run, repeatable or comma separated [default: all]
    #[arg(long, value_enum, value_delimiter = ',')]
    pub check: Vec<CheckKind>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Sparsity or RIC order.
    #[arg(long)]
    pub s: Option<usize>,
    /// Newton regularization [default: 0.5]
    #[arg(long)]
    pub eps: Option<f64>,
    /// Stepsize [default: midpoint of the certified window]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Randomized trials per check.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Matrices per contraction check [default: 10]
    #[arg(long)]
    pub instances: Option<usize>,
    /// Iterations per contraction run [default: 30]
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Noise norm in the projection and contraction checks [default: 1e-3]
    #[arg(long)]
    pub noise: Option<f64>,
    /// Perturbation of the near-isometry construction [default: 0.02]
    #[arg(long)]
    pub perturbation: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn load_config(common: &CommonArgs) -> CliResult<ConfigFile> {
    match &common.config {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

/// `--out-dir`, then the config file, then `$NDRT_OUT_DIR`, then `ndrt-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ConfigFile) -> CliResult<PathBuf> {
    if let Some(p) = cfg.pick(flag, "out-dir")? {
        return Ok(p);
    }
    Ok(std::env::var_os(OUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)))
}

fn make_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Recover(a) => cmd_recover(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

pub fn cmd_recover(args: &RecoverArgs) -> CliResult<()> {
    let cfg = load_config(&args.common)?;
    let mut echo = ResolvedConfig::new("recover");

    let matrix: Option<PathBuf> = cfg.pick(args.matrix.clone(), "matrix")?;
    let measurements: Option<PathBuf> = cfg.pick(args.measurements.clone(), "measurements")?;
    let truth_path: Option<PathBuf> = cfg.pick(args.truth.clone(), "truth")?;
    let gen_m: Option<usize> = cfg.pick(args.m, "m")?;
    let gen_n: Option<usize> = cfg.pick(args.n, "n")?;
    let sparsity: Option<usize> = cfg.pick(args.sparsity, "sparsity")?;
    let noise: Option<f64> = cfg.pick(args.noise, "noise")?;
    let seed: Option<u64> = cfg.pick(args.seed, "seed")?;

    let algorithm = cfg.pick(args.algo, "algo")?.unwrap_or(Algorithm::Ndrtp);
    let k = cfg
        .pick(args.k, "k")?
        .ok_or_else(|| CliError::Validation("--k is required".into()))?;
    let lambda_arg = cfg.pick(args.lambda, "lambda")?.unwrap_or(LambdaArg::Auto);
    let success_tol = cfg.pick(args.success_tol, "success-tol")?.unwrap_or(DEFAULT_SUCCESS_TOL);

    let file_mode = matrix.is_some() || measurements.is_some();
    let (a, y, truth) = if file_mode {
        if gen_m.is_some() || gen_n.is_some() || sparsity.is_some() || noise.is_some() || seed.is_some() {
            return Err(CliError::Validation(
                "input files and generation parameters (--m, --n, --sparsity, --noise, --seed) are mutually exclusive"
                    .into(),
            ));
        }
        let (Some(mp), Some(yp)) = (&matrix, &measurements) else {
            return Err(CliError::Validation("file input needs both --matrix and --measurements".into()));
        };
        let a = io::read_matrix(mp)?;
        let y = io::read_vector(yp)?;
        if y.len() != a.rows() {
            return Err(CliError::Validation(format!(
                "{} has {} entries but the matrix has {} rows",
                yp.display(),
                y.len(),
                a.rows()
            )));
        }
        let truth = match &truth_path {
            Some(tp) => {
                let t = io::read_vector(tp)?;
                if t.len() != a.cols() {
                    return Err(CliError::Validation(format!(
                        "{} has {} entries but the matrix has {} columns",
                        tp.display(),
                        t.len(),
                        a.cols()
                    )));
                }
                Some(t)
            }
            None => None,
        };
        echo.set("matrix", mp.display()).set("measurements", yp.display());
        if let Some(tp) = &truth_path {
            echo.set("truth", tp.display());
        }
        (a, y, truth)
    } else {
        if truth_path.is_some() {
            return Err(CliError::Validation("--truth needs --matrix and --measurements".into()));
        }
        let (m, n) = (gen_m.unwrap_or(600), gen_n.unwrap_or(2000));
        let s = sparsity.unwrap_or(k);
        let noise = noise.unwrap_or(0.0);
        let seed = seed.unwrap_or(1);
        if m == 0 || n == 0 {
            return Err(CliError::Validation(format!("dimensions must be positive, got {m} x {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = gen_instance(m, n, s, noise, &mut rng)?;
        echo.set("m", m)
            .set("n", n)
            .set("sparsity", s)
            .set("noise", noise)
            .set("seed", seed);
        (inst.a, inst.y, Some(inst.x_star))
    };

    let (m, n) = (a.rows(), a.cols());
    if k == 0 || k > n {
        return Err(ndrt_core::Error::SparsityOutOfRange { k, n }.into());
    }
    let mut rc = RecoveryConfig::benchmark_defaults(algorithm, k, m, n);
    match lambda_arg {
        LambdaArg::Auto => {}
        LambdaArg::Theory => rc.stepsize_mode = StepsizeMode::TheoryWindow,
        LambdaArg::Value(v) => {
            rc.lambda = v;
            rc.stepsize_mode = StepsizeMode::Fixed;
        }
    }
    if let Some(e) = cfg.pick(args.eps, "eps")? {
        rc.eps = e;
    }
    if let Some(it) = cfg.pick(args.max_iters, "max-iters")? {
        rc.max_iters = it;
    }
    rc.residual_tol = cfg.pick(args.residual_tol, "residual-tol")?.unwrap_or(0.0);
    rc.warm_start = cfg.pick(args.warm_start, "warm-start")?.unwrap_or(false);
    echo.set("algo", algorithm).set("k", k);
    rc.nnls = args.nnls.resolve(&cfg, &mut echo)?;
    rc.validate()?;

    let out_dir = resolve_out_dir(args.common.out_dir.clone(), &cfg)?;
    let am = MeasurementMatrix::new(a);
    let lambda = if algorithm.uses_lambda() {
        Some(rc.resolve_lambda(&am)?)
    } else {
        None
    };
    match lambda {
        Some(l) => echo.set("lambda", l),
        None => echo.set("lambda", lambda_arg),
    };
    echo.set("eps", rc.eps)
        .set("max-iters", rc.max_iters)
        .set("residual-tol", rc.residual_tol)
        .set("warm-start", rc.warm_start)
        .set("success-tol", success_tol)
        .set("out-dir", out_dir.display());

    let res = run_recovery(&am, &y, &rc, None)?;
    let rel = match &truth {
        Some(t) => Some(success_check(res.x_final.values(), t, success_tol)?),
        None => None,
    };

    let mut report = String::new();
    report.push_str(&format!("algorithm = {algorithm}\n"));
    if let Some(l) = lambda {
        report.push_str(&format!("lambda = {l}\n"));
    }
    if algorithm.uses_eps() {
        report.push_str(&format!("eps = {}\n", rc.eps));
    }
    report.push_str(&format!("iterations = {}\n", res.iterations));
    report.push_str(&format!("stop_reason = {}\n", res.stop_reason.name()));
    report.push_str(&format!("residual_norm = {:e}\n", res.residual_norm));
    report.push_str(&format!("nonzeros = {}\n", res.x_final.nnz()));
    if let Some((ok, r)) = rel {
        report.push_str(&format!("rel_error = {r:e}\nsuccess = {ok}\n"));
    }
    print!("{report}");

    make_dir(&out_dir)?;
    io::write_signal_csv(&out_dir.join("signal.csv"), res.x_final.values())?;
    let result_path = out_dir.join("result.txt");
    fs::write(&result_path, &report).map_err(|e| CliError::io(&result_path, e))?;
    echo.write(&out_dir.join("config.txt"))?;
    Ok(())
}

/// Plans described by the bench flags, each paired with the subdirectory it
/// writes to (empty for the output directory itself).
pub fn resolve_bench(args: &BenchArgs) -> CliResult<(Vec<(String, ExperimentPlan)>, ResolvedConfig, PathBuf, usize)> {
    let cfg = load_config(&args.common)?;
    let mut echo = ResolvedConfig::new("bench");
    let preset = cfg.pick(args.preset, "preset")?.unwrap_or(Preset::Desk);
    let seed = cfg.pick(args.seed, "seed")?.unwrap_or(0);
    let noise: Option<f64> = cfg.pick(args.noise, "noise")?;
    let mut base = match preset {
        Preset::Paper => ExperimentPlan::paper(0.0, seed),
        Preset::Desk => ExperimentPlan::desk(0.0, seed),
    };
    if let Some(m) = cfg.pick(args.m, "m")? {
        base.m = m;
    }
    if let Some(n) = cfg.pick(args.n, "n")? {
        base.n = n;
    }
    let k_min = cfg.pick(args.k_min, "k-min")?.unwrap_or(base.k_grid[0]);
    let k_max = cfg.pick(args.k_max, "k-max")?.unwrap_or(*base.k_grid.last().unwrap());
    let k_step = cfg.pick(args.k_step, "k-step")?.unwrap_or(5);
    if k_step == 0 || k_min == 0 || k_min > k_max {
        return Err(CliError::Validation(format!(
            "need 1 <= k-min <= k-max and k-step >= 1 (got {k_min}, {k_max}, {k_step})"
        )));
    }
    base.k_grid = (k_min..=k_max).step_by(k_step).collect();
    if let Some(t) = cfg.pick(args.trials, "trials")? {
        base.trials_per_k = t;
    }
    base.success_tol = cfg.pick(args.success_tol, "success-tol")?.unwrap_or(DEFAULT_SUCCESS_TOL);

    let algos = cfg.pick_list(args.algos.clone(), "algos")?;
    let algos = if algos.is_empty() { Algorithm::ALL.to_vec() } else { algos };
    let lambda: Option<f64> = cfg.pick(args.lambda, "lambda")?;
    let eps: Option<f64> = cfg.pick(args.eps, "eps")?;
    let max_iters: Option<usize> = cfg.pick(args.max_iters, "max-iters")?;
    let warm_start = cfg.pick(args.warm_start, "warm-start")?.unwrap_or(false);
    let threads = cfg.pick(args.threads, "threads")?.unwrap_or(0);
    let out_dir = resolve_out_dir(args.common.out_dir.clone(), &cfg)?;

    echo.set("preset", preset)
        .set("m", base.m)
        .set("n", base.n)
        .set("k-min", k_min)
        .set("k-max", k_max)
        .set("k-step", k_step)
        .set("trials", base.trials_per_k);
    if let Some(v) = noise {
        echo.set("noise", v);
    }
    echo.set("success-tol", base.success_tol).set(
        "algos",
        algos.iter().map(|a| a.name()).collect::<Vec<_>>().join(","),
    );
    if let Some(l) = lambda {
        echo.set("lambda", l);
    }
    if let Some(e) = eps {
        echo.set("eps", e);
    }
    if let Some(it) = max_iters {
        echo.set("max-iters", it);
    }
    echo.set("warm-start", warm_start);
    let nnls = args.nnls.resolve(&cfg, &mut echo)?;
    echo.set("seed", seed)
        .set("threads", threads)
        .set("out-dir", out_dir.display());

    base.algorithms = algos
        .iter()
        .map(|&alg| {
            let mut s = AlgorithmSetup::new(alg);
            if alg.uses_lambda() {
                s.lambda = lambda;
            }
            if alg.uses_eps() {
                s.eps = eps;
            }
            s.max_iters = max_iters;
            s.nnls = nnls;
            s.warm_start = warm_start;
            s
        })
        .collect();

    let plans = match (preset, noise) {
        (_, Some(v)) => vec![(String::new(), ExperimentPlan { noise_level: v, ..base })],
        (Preset::Desk, None) => vec![(String::new(), base)],
        (Preset::Paper, None) => vec![
            ("noiseless".to_string(), base.clone()),
            (
                "noisy".to_string(),
                ExperimentPlan {
                    noise_level: PAPER_NOISE,
                    ..base
                },
            ),
        ],
    };
    for (_, p) in &plans {
        p.validate()?;
    }
    Ok((plans, echo, out_dir, threads))
}

fn print_thresholds(label: &str, plan: &ExperimentPlan, summary: &ndrt_core::bench::SweepSummary) {
    let algos: Vec<Algorithm> = plan.algorithms.iter().map(|s| s.algorithm).collect();
    if !label.is_empty() {
        println!("[{label}] noise = {}", plan.noise_level);
    }
    print!("{:>6}", "level");
    for a in &algos {
        print!(" {:>6}", a.name());
    }
    println!();
    for level in ndrt_core::bench::THRESHOLD_LEVELS {
        print!("{level:>6}");
        for &a in &algos {
            match summary.threshold(a, level) {
                Some(k) => print!(" {k:>6}"),
                None => print!(" {:>6}", "-"),
            }
        }
        println!();
    }
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let (plans, echo, out_dir, threads) = resolve_bench(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {threads} worker threads: {e}")))?;
    make_dir(&out_dir)?;
    echo.write(&out_dir.join("config.txt"))?;
    for (sub, plan) in &plans {
        let dir = if sub.is_empty() { out_dir.clone() } else { out_dir.join(sub) };
        make_dir(&dir)?;
        log::info!(
            "sweep {} x {}, {} sparsity levels, {} trials, noise {}",
            plan.m,
            plan.n,
            plan.k_grid.len(),
            plan.trials_per_k,
            plan.noise_level
        );
        let (outcomes, summary) = pool.install(|| run_sweep_parallel(plan))?;
        let algos: Vec<Algorithm> = plan.algorithms.iter().map(|s| s.algorithm).collect();
        io::write_outcomes_csv(&dir.join("outcomes.csv"), &outcomes)?;
        io::write_summary_csv(&dir.join("summary.csv"), &summary)?;
        io::write_thresholds_csv(&dir.join("thresholds.csv"), &summary, &algos)?;
        io::write_plot_data(&dir, &summary, &algos)?;
        print_thresholds(sub, plan, &summary);
    }
    Ok(())
}

pub fn resolve_verify(args: &VerifyArgs) -> CliResult<(VerifyOptions, ResolvedConfig, PathBuf)> {
    let cfg = load_config(&args.common)?;
    let d = VerifyOptions::default();
    let checks: Vec<CheckKind> = cfg
        .pick_list(
            args.check.iter().map(|c| c.name().to_string()).collect::<Vec<String>>(),
            "check",
        )?
        .iter()
        .map(|s| <CheckKind as ValueEnum>::from_str(s, true).map_err(CliError::Validation))
        .collect::<CliResult<_>>()?;
    let opts = VerifyOptions {
        checks: if checks.is_empty() { d.checks } else { checks },
        m: cfg.pick(args.m, "m")?,
        n: cfg.pick(args.n, "n")?,
        s: cfg.pick(args.s, "s")?,
        eps: cfg.pick(args.eps, "eps")?.unwrap_or(d.eps),
        lambda: cfg.pick(args.lambda, "lambda")?,
        trials: cfg.pick(args.trials, "trials")?,
        instances: cfg.pick(args.instances, "instances")?.unwrap_or(d.instances),
        iterations: cfg.pick(args.iterations, "iterations")?.unwrap_or(d.iterations),
        noise: cfg.pick(args.noise, "noise")?.unwrap_or(d.noise),
        perturbation: cfg.pick(args.perturbation, "perturbation")?.unwrap_or(d.perturbation),
        seed: cfg.pick(args.seed, "seed")?.unwrap_or(d.seed),
    };
    if !(opts.eps > 0.0 && opts.eps.is_finite()) {
        return Err(ndrt_core::Error::NonPositiveEps(opts.eps).into());
    }
    if opts.instances == 0 {
        return Err(CliError::Validation("--instances must be at least 1".into()));
    }
    let out_dir = resolve_out_dir(args.common.out_dir.clone(), &cfg)?;
    let mut echo = ResolvedConfig::new("verify");
    echo.set(
        "check",
        opts.checks.iter().map(|c| c.name()).collect::<Vec<_>>().join(","),
    );
    for (key, v) in [("m", opts.m), ("n", opts.n), ("s", opts.s), ("trials", opts.trials)] {
        if let Some(v) = v {
            echo.set(key, v);
        }
    }
    echo.set("eps", opts.eps);
    if let Some(l) = opts.lambda {
        echo.set("lambda", l);
    }
    echo.set("instances", opts.instances)
        .set("iterations", opts.iterations)
        .set("noise", opts.noise)
        .set("perturbation", opts.perturbation)
        .set("seed", opts.seed)
        .set("out-dir", out_dir.display());
    Ok((opts, echo, out_dir))
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let (opts, echo, out_dir) = resolve_verify(args)?;
    let lines = run_checks(&opts)?;
    for l in &lines {
        println!("{l}");
    }
    make_dir(&out_dir)?;
    echo.write(&out_dir.join("config.txt"))?;
    io::write_verify_csv(&out_dir.join("verify.csv"), &lines)?;
    let failed: Vec<String> = lines
        .iter()
        .filter(|l| !l.passed())
        .map(|l| format!("{}/{}", l.check, l.report.name))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
