//! Command-line front end: generate fBm paths, run strong-convergence
//! experiments, run rough-analysis diagnostics, and emit plot-ready CSV/JSON.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
//! The environment variable `RE_SEED` overrides the built-in default seed;
//! explicit `--seed` flags and config-file values take precedence over it.

mod kv;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use roughsde::harness::{self, BenchmarkOptions, ExperimentConfig};
use roughsde::io::{self, RunManifest};
use roughsde::kernel::{CovKernel, Rect};
use roughsde::sampler::{self, Method};
use roughsde::sde::{Drift, SdeProblem};
use roughsde::variation;
use roughsde::RngStream;

const DEFAULT_SEED: u64 = 42;
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or configuration: exit code 2.
    Usage(String),
    /// Failure while running: exit code 1.
    Runtime(String),
}

impl From<roughsde::Error> for CliError {
    fn from(e: roughsde::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "roughsde",
    version = VERSION,
    about = "Fractional-Brownian-motion SDE toolkit: exact samplers, Euler \
             strong-convergence experiments, and rough-analysis diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one fBm sample path on a uniform grid and write it as CSV
    Sample(SampleArgs),
    /// Evaluate the fBm covariance, a rectangular increment, or the fGn autocovariance
    Cov(CovArgs),
    /// Run a coupled multi-level strong-error experiment and fit the rate
    Converge(ConvergeArgs),
    /// Run rough-analysis diagnostics and emit a JSON report
    Diagnose(DiagnoseArgs),
    /// Run the full benchmark suite: both example drifts at H = 0.35, 0.4, 0.45
    ReproducePaper(ReproArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Hurst parameter in (0,1)
    #[arg(long)]
    hurst: Option<f64>,
    /// Number of grid steps (path has n+1 points)
    #[arg(long)]
    n: Option<usize>,
    /// Time horizon T
    #[arg(long)]
    horizon: Option<f64>,
    /// Master seed (overrides RE_SEED)
    #[arg(long)]
    seed: Option<u64>,
    /// Sampler: auto | cholesky | circulant
    #[arg(long)]
    method: Option<String>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags win
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct CovArgs {
    /// Hurst parameter in (0,1)
    #[arg(long)]
    hurst: Option<f64>,
    /// First time for a covariance evaluation R(s,t)
    #[arg(long)]
    s: Option<f64>,
    /// Second time for a covariance evaluation R(s,t)
    #[arg(long)]
    t: Option<f64>,
    /// Rectangle s_lo,s_hi,t_lo,t_hi for an increment covariance
    #[arg(long)]
    rect: Option<String>,
    /// Also cross-check the rectangle with the quadrature oracle at this m
    #[arg(long)]
    quadrature: Option<usize>,
    /// Lag for the fGn autocovariance
    #[arg(long)]
    lag: Option<u64>,
    /// Grid step for the fGn autocovariance (default 1)
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Benchmark preset: 1 (C³ log/poly drift, σ=1) or 2 (linear 2x, σ=9)
    #[arg(long)]
    example: Option<u8>,
    /// Custom linear drift coefficient A (mutually exclusive with --example)
    #[arg(long)]
    linear_a: Option<f64>,
    /// Diffusion coefficient for a custom drift (default 1)
    #[arg(long)]
    sigma: Option<f64>,
    /// Initial value for a custom drift (default 1)
    #[arg(long)]
    x0: Option<f64>,
    /// Hurst parameter in (1/3, 1/2)
    #[arg(long)]
    hurst: Option<f64>,
    /// Coarse level exponents, e.g. "6..11" or "6,7,8" (default 6..11)
    #[arg(long)]
    levels: Option<String>,
    /// Reference exponent (default 15; 12 with --quick)
    #[arg(long = "ref")]
    ref_exponent: Option<u32>,
    /// Monte Carlo paths (default 1000; 100 with --quick)
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sampler: auto | cholesky | circulant
    #[arg(long)]
    method: Option<String>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// CI-sized run: paths=100, ref=12
    #[arg(long)]
    quick: bool,
    /// Allow Hurst parameters outside (1/3, 1/2)
    #[arg(long)]
    allow_any_hurst: bool,
    /// Output directory for error_curve.csv and manifest.json
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DiagnoseWhich {
    /// Negativity of disjoint-increment covariance for H < 1/2
    CovNeg,
    /// Growth of the covariance 2D variation on diagonal squares
    LemmaRr,
    /// Decay of the double increment-covariance integral (target 2H+1)
    Eq31,
    /// Decay of the history-increment covariance integral (target 2H)
    Eq32,
    /// Young integration: constant-integrand exactness and bilinear convergence
    Young,
}

#[derive(Args)]
struct DiagnoseArgs {
    /// Which diagnostic to run
    #[arg(long, value_enum)]
    which: DiagnoseWhich,
    /// Hurst parameter
    #[arg(long)]
    hurst: Option<f64>,
    /// Grid sizes for eq31/eq32 (comma-separated powers of two)
    #[arg(long)]
    sizes: Option<String>,
    /// Interval lengths for lemma-rr (comma-separated)
    #[arg(long)]
    lengths: Option<String>,
    /// Quadrature points per cell/axis
    #[arg(long)]
    quad_points: Option<usize>,
    /// Random samples for cov-neg and young scans
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    /// Output directory for the six curve CSVs, summary.json, manifest.json
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// CI-sized run: paths=100, ref=12
    #[arg(long)]
    quick: bool,
    /// Sampler: auto | cholesky | circulant
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let code = match Cli::try_parse() {
        Ok(cli) => match run(cli) {
            Ok(()) => 0,
            Err(CliError::Usage(msg)) => {
                eprintln!("error: {msg}");
                2
            }
            Err(CliError::Runtime(msg)) => {
                eprintln!("error: {msg}");
                1
            }
        },
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            code
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Cov(args) => cmd_cov(args),
        Command::Converge(args) => cmd_converge(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::ReproducePaper(args) => cmd_reproduce(args),
    }
}

fn check_hurst(h: f64) -> Result<f64, CliError> {
    if !(h.is_finite() && 0.0 < h && h < 1.0) {
        return Err(CliError::Usage(format!(
            "--hurst must lie in (0,1), got {h}"
        )));
    }
    Ok(h)
}

fn parse_method(raw: Option<String>) -> Result<Option<Method>, CliError> {
    match raw.as_deref() {
        None | Some("auto") => Ok(None),
        Some("cholesky") => Ok(Some(Method::Cholesky)),
        Some("circulant") => Ok(Some(Method::Circulant)),
        Some(other) => Err(CliError::Usage(format!(
            "--method must be auto|cholesky|circulant, got `{other}`"
        ))),
    }
}

fn parse_levels(raw: &str) -> Result<Vec<u32>, CliError> {
    let parse_one = |s: &str| -> Result<u32, CliError> {
        s.trim()
            .parse::<u32>()
            .map_err(|e| CliError::Usage(format!("bad level `{s}`: {e}")))
    };
    if let Some((lo, hi)) = raw.split_once("..") {
        let (lo, hi) = (parse_one(lo)?, parse_one(hi)?);
        if lo > hi {
            return Err(CliError::Usage(format!("empty level range `{raw}`")));
        }
        return Ok((lo..=hi).collect());
    }
    raw.split(',').map(parse_one).collect()
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| CliError::Usage(format!("bad {what} `{s}`: {e}")))
        })
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let file = kv::KvConfig::load(args.config.as_deref())?;
    let hurst = check_hurst(kv::resolve_required(args.hurst, file.get("hurst")?, "hurst")?)?;
    let n: usize = kv::resolve_required(args.n, file.get("n")?, "n")?;
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let horizon = kv::resolve(args.horizon, file.get("horizon")?, 1.0);
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(CliError::Usage(format!(
            "--horizon must be positive, got {horizon}"
        )));
    }
    let seed = kv::resolve_seed(args.seed, file.get("seed")?, DEFAULT_SEED)?;
    let method = parse_method(args.method.or(file.get("method")?))?;
    if method == Some(Method::Cholesky) && n > sampler::CHOLESKY_CAP {
        return Err(CliError::Usage(format!(
            "--n {n} exceeds the Cholesky cap {}",
            sampler::CHOLESKY_CAP
        )));
    }

    let rng = RngStream::new(seed, 0);
    let path = roughsde::sde::sample_driving(method, hurst, n, horizon, rng)?;
    let csv = io::fbm_path_csv(&path);
    match &args.out {
        Some(p) => io::write_text(&csv, p).map_err(|e| CliError::Runtime(e.to_string()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_cov(args: CovArgs) -> Result<(), CliError> {
    let file = kv::KvConfig::load(args.config.as_deref())?;
    let hurst = check_hurst(kv::resolve_required(args.hurst, file.get("hurst")?, "hurst")?)?;
    let kernel = CovKernel::new(hurst).map_err(|e| CliError::Usage(e.to_string()))?;

    let modes = [
        args.s.is_some() || args.t.is_some(),
        args.rect.is_some(),
        args.lag.is_some(),
    ];
    if modes.iter().filter(|&&m| m).count() != 1 {
        return Err(CliError::Usage(
            "pass exactly one of: --s/--t, --rect, --lag".into(),
        ));
    }
    if args.s.is_some() || args.t.is_some() {
        let (Some(s), Some(t)) = (args.s, args.t) else {
            return Err(CliError::Usage("--s and --t must be given together".into()));
        };
        let v = kernel.cov(s, t).map_err(|e| CliError::Usage(e.to_string()))?;
        println!("{}", io::fmt_g17(v));
        return Ok(());
    }
    if let Some(spec) = &args.rect {
        let c: Vec<f64> = parse_list(spec, "rectangle coordinate")?;
        if c.len() != 4 {
            return Err(CliError::Usage("--rect needs s_lo,s_hi,t_lo,t_hi".into()));
        }
        let rect =
            Rect::new(c[0], c[1], c[2], c[3]).map_err(|e| CliError::Usage(e.to_string()))?;
        println!("{}", io::fmt_g17(kernel.rect_increment(&rect)));
        if let Some(m) = args.quadrature {
            let q = kernel.increment_cov_quadrature(&rect, m)?;
            println!("quadrature m={m}: {}", io::fmt_g17(q));
        }
        return Ok(());
    }
    let lag = args.lag.expect("mode checked");
    let step = args.step.unwrap_or(1.0);
    let v = kernel
        .fgn_autocovariance(lag, step)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    println!("{}", io::fmt_g17(v));
    Ok(())
}

fn cmd_converge(args: ConvergeArgs) -> Result<(), CliError> {
    let file = kv::KvConfig::load(args.config.as_deref())?;
    let hurst = check_hurst(kv::resolve_required(args.hurst, file.get("hurst")?, "hurst")?)?;
    let example = args.example.or(file.get("example")?);
    let linear_a = args.linear_a.or(file.get("linear_a")?);
    if example.is_some() && linear_a.is_some() {
        return Err(CliError::Usage(
            "--example and --linear-a are mutually exclusive".into(),
        ));
    }
    let allow_any = args.allow_any_hurst || file.get("allow_any_hurst")?.unwrap_or(false);
    if !(hurst > 1.0 / 3.0 && hurst < 0.5) && !allow_any {
        return Err(CliError::Usage(format!(
            "H={hurst} is outside (1/3, 1/2); pass --allow-any-hurst to run anyway"
        )));
    }

    let (problem, theory, tolerance) = match (example, linear_a) {
        (Some(e), None) => {
            if !(e == 1 || e == 2) {
                return Err(CliError::Usage(format!(
                    "--example must be 1 or 2, got {e}"
                )));
            }
            (
                harness::benchmark_problem(e)?,
                harness::theoretical_rate(e, hurst)?,
                harness::rate_tolerance(e)?,
            )
        }
        (None, Some(a)) => {
            let sigma = kv::resolve(args.sigma, file.get("sigma")?, 1.0);
            let x0 = kv::resolve(args.x0, file.get("x0")?, 1.0);
            (
                SdeProblem::new(Drift::linear(a), sigma, x0, 1.0)?,
                hurst + 0.5,
                0.10,
            )
        }
        _ => {
            return Err(CliError::Usage(
                "pass either --example {1,2} or --linear-a <A>".into(),
            ))
        }
    };

    let quick = args.quick || file.get("quick")?.unwrap_or(false);
    let (default_ref, default_paths) = if quick { (12, 100) } else { (15, 1000) };
    let ref_exponent = kv::resolve(args.ref_exponent, file.get("ref")?, default_ref);
    let paths = kv::resolve(args.paths, file.get("paths")?, default_paths);
    let levels = match args.levels.or(file.get("levels")?) {
        Some(raw) => parse_levels(&raw)?,
        None => (6..=11).collect(),
    };
    if levels.iter().any(|&k| k >= ref_exponent) {
        return Err(CliError::Usage(format!(
            "--ref {ref_exponent} must exceed every level in {levels:?}"
        )));
    }
    let seed = kv::resolve_seed(args.seed, file.get("seed")?, DEFAULT_SEED)?;
    let method = parse_method(args.method.or(file.get("method")?))?;
    let workers = kv::resolve(args.workers, file.get("workers")?, 0);

    let config = ExperimentConfig {
        problem,
        hurst,
        level_exponents: levels,
        ref_exponent,
        paths,
        master_seed: seed,
        method,
        workers,
    };
    let started = Instant::now();
    let output = harness::strong_error_curve(&config)?;
    let fit = harness::fit_rate(&output.curve)?;
    let slope_stderr = harness::bootstrap_slope_stderr(&output, 50, seed ^ 0xB00F_57A9)?;
    let wall = started.elapsed().as_secs_f64();
    let pass = (fit.slope - theory).abs() <= tolerance;

    if let Some(dir) = &args.out_dir {
        ensure_dir(dir)?;
        io::write_text(
            &io::error_curve_csv(&output.curve),
            &dir.join("error_curve.csv"),
        )?;
        let manifest = RunManifest {
            command: "converge".into(),
            version: VERSION.into(),
            config: serde_json::json!({
                "resolved": output.curve.config,
                "theory_rate": theory,
                "tolerance": tolerance,
                "slope_stderr": slope_stderr,
                "quick": quick,
            }),
            wall_time_s: wall,
            per_level_wall_s: output.per_level_seconds.clone(),
            fit: Some(fit),
            theory_rate: Some(theory),
            pass: Some(pass),
        };
        io::write_json_pretty(&manifest, &dir.join("manifest.json"))?;
    }
    println!(
        "H={hurst} slope={:.4} theory={theory:.2} pass={pass}",
        fit.slope
    );
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<(), CliError> {
    let file = kv::KvConfig::load(args.config.as_deref())?;
    let hurst = check_hurst(kv::resolve_required(args.hurst, file.get("hurst")?, "hurst")?)?;
    let m = kv::resolve(args.quad_points, file.get("quad_points")?, 6);
    let seed = kv::resolve_seed(args.seed, file.get("seed")?, DEFAULT_SEED)?;
    let samples = kv::resolve(args.samples, file.get("samples")?, 1000);

    let report: variation::ScalingReport = match args.which {
        DiagnoseWhich::CovNeg => cov_negativity_report(hurst, samples, seed)?,
        DiagnoseWhich::LemmaRr => {
            let lengths = match args.lengths.or(file.get("lengths")?) {
                Some(raw) => parse_list(&raw, "interval length")?,
                None => (1..=6).map(|k| 0.5f64.powi(k)).collect(),
            };
            variation::check_lemma_rr_scaling(hurst, &lengths, 24)?
        }
        DiagnoseWhich::Eq31 | DiagnoseWhich::Eq32 => {
            let ns: Vec<usize> = match args.sizes.or(file.get("sizes")?) {
                Some(raw) => parse_list(&raw, "grid size")?,
                None => (4..=9).map(|e| 1usize << e).collect(),
            };
            if args.which == DiagnoseWhich::Eq31 {
                variation::check_eq31_scaling(hurst, 1.0, &ns, m)?
            } else {
                variation::check_eq32_scaling(hurst, 1.0, &ns, m)?
            }
        }
        DiagnoseWhich::Young => young_report(hurst, samples.min(100), seed)?,
    };

    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    match &args.out {
        Some(p) => io::write_text(&format!("{text}\n"), p)?,
        None => println!("{text}"),
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Runtime(format!(
            "diagnostic `{}` did not pass",
            report.check
        )))
    }
}

/// Random disjoint quadruples must all have negative increment covariance.
fn cov_negativity_report(
    hurst: f64,
    samples: usize,
    seed: u64,
) -> Result<variation::ScalingReport, CliError> {
    if hurst >= 0.5 {
        return Err(CliError::Usage(
            "cov-neg requires H < 1/2 (at H = 1/2 the covariance vanishes)".into(),
        ));
    }
    let kernel = CovKernel::new(hurst)?;
    let rng = RngStream::new(seed, 0);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut negative = 0usize;
    for i in 0..samples {
        let base = 4 * i as u64;
        let mut q = [
            2.0 * rng.uniform(base),
            2.0 * rng.uniform(base + 1),
            2.0 * rng.uniform(base + 2),
            2.0 * rng.uniform(base + 3),
        ];
        q.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // Keep rectangles well-formed: widths at least 1e-6.
        let (a, b, c, d) = (
            q[0],
            q[1].max(q[0] + 1e-6),
            q[2].max(q[1] + 2e-6),
            q[3].max(q[2] + 3e-6),
        );
        // Every tenth quadruple shares the endpoint b = c.
        let (b, c) = if i % 10 == 0 { (b, b) } else { (b, c) };
        let rect = Rect::new(a, b, c, d).map_err(|e| CliError::Runtime(e.to_string()))?;
        let v = kernel.rect_increment(&rect);
        min = min.min(v);
        max = max.max(v);
        if v < 0.0 {
            negative += 1;
        }
    }
    Ok(variation::ScalingReport {
        check: "cov-neg".into(),
        hurst,
        grid: vec![samples as f64],
        estimates: vec![min, max],
        fitted_slope: None,
        pass: negative == samples,
        note: Some(format!(
            "{negative}/{samples} sampled disjoint quadruples had negative increment covariance"
        )),
        details: None,
    })
}

/// Constant-integrand exactness over random rectangles plus bilinear
/// convergence of the Young driver.
fn young_report(
    hurst: f64,
    samples: usize,
    seed: u64,
) -> Result<variation::ScalingReport, CliError> {
    let kernel = CovKernel::new(hurst)?;
    let rng = RngStream::new(seed, 1);
    let mut max_rel = 0.0f64;
    for i in 0..samples {
        let base = 4 * i as u64;
        let s0 = 2.0 * rng.uniform(base);
        let t0 = 2.0 * rng.uniform(base + 1);
        let rect = Rect::new(
            s0,
            s0 + 1e-3 + rng.uniform(base + 2),
            t0,
            t0 + 1e-3 + rng.uniform(base + 3),
        )
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        let exact = kernel.rect_increment(&rect);
        let refinement = 1 + (i % 7);
        let riemann = variation::young_integral_2d(|_, _| 1.0, &kernel, &rect, refinement)?;
        let scale = exact.abs().max(1e-6);
        max_rel = max_rel.max((riemann - exact).abs() / scale);
    }
    let exactness_ok = max_rel < 1e-10;

    let domain = Rect::square(0.0, 1.0).map_err(|e| CliError::Runtime(e.to_string()))?;
    let result =
        variation::young_integral_converge(|s, t| s * t, &kernel, &domain, 5e-4, 1 << 12)?;
    let ratios_ok = result.cauchy.windows(2).all(|w| w[1] < w[0] / 1.5);
    Ok(variation::ScalingReport {
        check: "young".into(),
        hurst,
        grid: vec![samples as f64],
        estimates: result.cauchy.clone(),
        fitted_slope: None,
        pass: exactness_ok && ratios_ok,
        note: Some(format!(
            "constant-integrand max relative deviation {max_rel:.3e}; \
             bilinear driver converged at refinement {}",
            result.refinement
        )),
        details: None,
    })
}

fn cmd_reproduce(args: ReproArgs) -> Result<(), CliError> {
    let file = kv::KvConfig::load(args.config.as_deref())?;
    let out_dir = args
        .out_dir
        .or(file.get::<String>("out_dir")?.map(PathBuf::from))
        .ok_or_else(|| CliError::Usage("missing required option --out-dir".into()))?;
    ensure_dir(&out_dir)?;
    let seed = kv::resolve_seed(args.seed, file.get("seed")?, DEFAULT_SEED)?;
    let workers = kv::resolve(args.workers, file.get("workers")?, 0);
    let quick = args.quick || file.get("quick")?.unwrap_or(false);
    let method = parse_method(args.method.or(file.get("method")?))?;
    let opts = BenchmarkOptions {
        master_seed: seed,
        workers,
        quick,
        allow_any_hurst: false,
        method,
    };

    let started = Instant::now();
    let mut pairs = Vec::new();
    let mut any_error = false;
    let mut all_pass = true;
    for example in [1u8, 2] {
        for &hurst in &[0.35, 0.4, 0.45] {
            let csv_name = format!("fig{example}_H{hurst}.csv");
            match harness::reproduce_benchmark(example, hurst, &opts) {
                Ok(run) => {
                    io::write_text(
                        &io::error_curve_csv(&run.output.curve),
                        &out_dir.join(&csv_name),
                    )?;
                    println!(
                        "example={example} H={hurst} slope={:.4} theory={:.2} pass={}",
                        run.fit.slope, run.theory, run.pass
                    );
                    all_pass &= run.pass;
                    pairs.push(serde_json::json!({
                        "example": example,
                        "hurst": hurst,
                        "slope": run.fit.slope,
                        "slope_stderr": run.slope_stderr,
                        "r_squared": run.fit.r_squared,
                        "theory": run.theory,
                        "tolerance": run.tolerance,
                        "pass": run.pass,
                        "csv": csv_name,
                    }));
                }
                Err(e) => {
                    any_error = true;
                    all_pass = false;
                    eprintln!("example={example} H={hurst} failed: {e}");
                    pairs.push(serde_json::json!({
                        "example": example,
                        "hurst": hurst,
                        "error": e.to_string(),
                        "csv": csv_name,
                    }));
                }
            }
        }
    }
    let summary = serde_json::json!({ "pairs": pairs, "all_pass": all_pass });
    io::write_json_pretty(&summary, &out_dir.join("summary.json"))?;
    let manifest = RunManifest {
        command: "reproduce-paper".into(),
        version: VERSION.into(),
        config: serde_json::json!({
            "seed": seed,
            "workers": workers,
            "quick": quick,
            "hurst_values": [0.35, 0.4, 0.45],
            "examples": [1, 2],
            "out_dir": out_dir.display().to_string(),
        }),
        wall_time_s: started.elapsed().as_secs_f64(),
        per_level_wall_s: vec![],
        fit: None,
        theory_rate: None,
        pass: Some(all_pass),
    };
    io::write_json_pretty(&manifest, &out_dir.join("manifest.json"))?;
    if any_error {
        return Err(CliError::Runtime(
            "one or more benchmark pairs failed to run".into(),
        ));
    }
    Ok(())
}
