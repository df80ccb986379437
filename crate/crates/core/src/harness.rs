//! Monte Carlo strong-error experiments: coupled multi-level Euler runs,
//! sup-in-time root-mean-square error estimation, and log-log rate fitting.
//!
//! Protocol per path `m`: one fine fBm path is drawn from stream `m`, the
//! reference solution is the Euler scheme on the fine grid, and every coarse
//! level re-runs Euler on the subsampled (bit-shared) driving values. The
//! per-level error is `max_j sqrt(mean_m (X(t_j) − Y(t_j))²)` over the coarse
//! grid times. Paths are independent workers; results are merged by path
//! index, so output is bit-identical for any worker count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::{fit_loglog, RateFit};
use crate::rng::RngStream;
use crate::sampler::{subsample, Method, Sampler, AUTO_CHOLESKY_MAX};
use crate::sde::{euler_path, exact_linear_solution, SdeProblem};

/// Configuration of one strong-error experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: SdeProblem,
    pub hurst: f64,
    /// Coarse levels `n = 2^k`, strictly below the reference exponent.
    pub level_exponents: Vec<u32>,
    /// Reference (fine) level `n = 2^ref_exponent`.
    pub ref_exponent: u32,
    /// Monte Carlo sample count.
    pub paths: usize,
    pub master_seed: u64,
    /// Sampler choice; `None` selects Cholesky for small grids, circulant
    /// otherwise.
    pub method: Option<Method>,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(Error::domain("need at least 2 Monte Carlo paths"));
        }
        if self.level_exponents.is_empty() {
            return Err(Error::domain("need at least one coarse level"));
        }
        if self.level_exponents.iter().any(|&k| k >= self.ref_exponent) {
            return Err(Error::domain(format!(
                "reference exponent {} must exceed every level exponent {:?}",
                self.ref_exponent, self.level_exponents
            )));
        }
        if self.ref_exponent > 26 {
            return Err(Error::domain("reference exponent above 2^26 is not supported"));
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::domain(format!(
                "Hurst parameter must lie in (0,1), got {}",
                self.hurst
            )));
        }
        if !(self.hurst > 1.0 / 3.0 && self.hurst < 0.5) {
            log::warn!(
                "H={} is outside the additive-rough regime (1/3, 1/2); proceeding anyway",
                self.hurst
            );
        }
        Ok(())
    }

    fn sorted_levels(&self) -> Vec<u32> {
        let mut levels = self.level_exponents.clone();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            drift: self.problem.drift.name().to_string(),
            sigma: self.problem.sigma,
            x0: self.problem.x0,
            horizon: self.problem.horizon,
            hurst: self.hurst,
            level_exponents: self.sorted_levels(),
            ref_exponent: self.ref_exponent,
            paths: self.paths,
            master_seed: self.master_seed,
            method: self.method.map(|m| m.to_string()),
            workers: self.workers,
        }
    }
}

/// Serializable echo of the resolved configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub drift: String,
    pub sigma: f64,
    pub x0: f64,
    pub horizon: f64,
    pub hurst: f64,
    pub level_exponents: Vec<u32>,
    pub ref_exponent: u32,
    pub paths: usize,
    pub master_seed: u64,
    pub method: Option<String>,
    pub workers: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRow {
    /// Level exponent `k` (coarse grid has `2^k` steps).
    pub level: u32,
    pub h: f64,
    /// `max_j sqrt(mean_m (X − Y)²(t_j))` over the coarse grid.
    pub error: f64,
    /// Monte Carlo standard error of `error`, from the per-path squared
    /// errors at the argmax time (delta method).
    pub stderr: f64,
    /// Coarse grid index attaining the max (observable from reports).
    pub argmax_index: usize,
}

/// Per-level strong-error table with the configuration that produced it.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorCurve {
    pub rows: Vec<ErrorRow>,
    pub config: ConfigEcho,
}

/// Error curve plus the per-path samples and timings backing it.
#[derive(Debug, Clone)]
pub struct StrongErrorOutput {
    pub curve: ErrorCurve,
    /// `argmax_samples[level][path]` = squared error at that level's argmax
    /// time; feeds the stderr column and the slope bootstrap.
    pub argmax_samples: Vec<Vec<f64>>,
    /// Wall seconds attributed to each level across all workers.
    pub per_level_seconds: Vec<f64>,
    /// Wall seconds attributed to sampling + the reference solve.
    pub sampling_seconds: f64,
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        Ok(f())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::domain(format!("failed to build thread pool: {e}")))?;
        Ok(pool.install(f))
    }
}

/// Run the coupled multi-level experiment described by `config`.
pub fn strong_error_curve(config: &ExperimentConfig) -> Result<StrongErrorOutput> {
    config.validate()?;
    let levels = config.sorted_levels();
    let n_ref = 1usize << config.ref_exponent;
    let method = config.method.unwrap_or(if n_ref <= AUTO_CHOLESKY_MAX {
        Method::Cholesky
    } else {
        Method::Circulant
    });
    let sampler = Sampler::new(method, config.hurst, n_ref, config.problem.horizon)?;
    let problem = &config.problem;
    let level_nanos: Vec<AtomicU64> = levels.iter().map(|_| AtomicU64::new(0)).collect();
    let sampling_nanos = AtomicU64::new(0);

    // profiles[path][level][coarse index] = squared error.
    let profiles: Vec<Vec<Vec<f64>>> = with_pool(config.workers, || {
        (0..config.paths)
            .into_par_iter()
            .map(|m| {
                let t0 = Instant::now();
                let rng = RngStream::new(config.master_seed, m as u64);
                let fine = sampler.sample(rng);
                let reference =
                    euler_path(problem, &fine).map_err(|e| e.in_path(m, None))?;
                sampling_nanos.fetch_add(t0.elapsed().as_nanos() as u64, Ordering::Relaxed);
                let mut per_level = Vec::with_capacity(levels.len());
                for (li, &k) in levels.iter().enumerate() {
                    let t1 = Instant::now();
                    let factor = 1usize << (config.ref_exponent - k);
                    let coarse =
                        subsample(&fine, factor).map_err(|e| e.in_path(m, Some(k)))?;
                    let y = euler_path(problem, &coarse).map_err(|e| e.in_path(m, Some(k)))?;
                    let profile: Vec<f64> = (0..=coarse.n)
                        .map(|j| {
                            let d = reference.values[j * factor] - y.values[j];
                            d * d
                        })
                        .collect();
                    level_nanos[li].fetch_add(t1.elapsed().as_nanos() as u64, Ordering::Relaxed);
                    per_level.push(profile);
                }
                Ok(per_level)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let paths_f = config.paths as f64;
    let mut rows = Vec::with_capacity(levels.len());
    let mut argmax_samples = Vec::with_capacity(levels.len());
    for (li, &k) in levels.iter().enumerate() {
        let n_k = 1usize << k;
        // Mean squared error profile over paths, accumulated in path order.
        let mut mean = vec![0.0f64; n_k + 1];
        for profile in &profiles {
            for (j, &e2) in profile[li].iter().enumerate() {
                mean[j] += e2;
            }
        }
        for v in &mut mean {
            *v /= paths_f;
        }
        let mut argmax = 0usize;
        for (j, &v) in mean.iter().enumerate() {
            if v > mean[argmax] {
                argmax = j;
            }
        }
        let mse = mean[argmax];
        let error = mse.sqrt();
        let samples: Vec<f64> = profiles.iter().map(|p| p[li][argmax]).collect();
        let var = if config.paths > 1 {
            samples.iter().map(|&s| (s - mse) * (s - mse)).sum::<f64>() / (paths_f - 1.0)
        } else {
            0.0
        };
        let se_mean = (var / paths_f).sqrt();
        let stderr = if error > 0.0 { se_mean / (2.0 * error) } else { 0.0 };
        rows.push(ErrorRow {
            level: k,
            h: config.problem.horizon / n_k as f64,
            error,
            stderr,
            argmax_index: argmax,
        });
        argmax_samples.push(samples);
    }
    Ok(StrongErrorOutput {
        curve: ErrorCurve {
            rows,
            config: config.echo(),
        },
        argmax_samples,
        per_level_seconds: level_nanos
            .iter()
            .map(|a| a.load(Ordering::Relaxed) as f64 * 1e-9)
            .collect(),
        sampling_seconds: sampling_nanos.load(Ordering::Relaxed) as f64 * 1e-9,
    })
}

/// Ordinary least squares of `log error` on `log h`. Rows with exactly zero
/// error are excluded with a warning; at least three usable rows remain or
/// the fit fails.
pub fn fit_rate(curve: &ErrorCurve) -> Result<RateFit> {
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    for row in &curve.rows {
        if row.error > 0.0 {
            hs.push(row.h);
            errs.push(row.error);
        } else {
            log::warn!("fit_rate: excluding zero-error row at level {}", row.level);
        }
    }
    if hs.len() < 3 {
        return Err(Error::domain(format!(
            "fit_rate needs >= 3 nonzero error rows, have {}",
            hs.len()
        )));
    }
    fit_loglog(&hs, &errs)
}

/// Bootstrap standard error of the fitted slope: resample paths with
/// replacement, recompute the per-level errors at the (fixed) argmax times,
/// and refit. Deterministic in `seed`.
pub fn bootstrap_slope_stderr(
    output: &StrongErrorOutput,
    resamples: usize,
    seed: u64,
) -> Result<f64> {
    if resamples < 2 {
        return Err(Error::domain("need at least 2 bootstrap resamples"));
    }
    let paths = output
        .argmax_samples
        .first()
        .map(|s| s.len())
        .ok_or_else(|| Error::domain("empty output"))?;
    let mut slopes = Vec::with_capacity(resamples);
    for b in 0..resamples {
        let rng = RngStream::new(seed, b as u64);
        let idx: Vec<usize> = (0..paths)
            .map(|i| ((rng.uniform(i as u64) * paths as f64) as usize).min(paths - 1))
            .collect();
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for (li, row) in output.curve.rows.iter().enumerate() {
            let mean: f64 = idx
                .iter()
                .map(|&i| output.argmax_samples[li][i])
                .sum::<f64>()
                / paths as f64;
            let err = mean.sqrt();
            if err > 0.0 {
                hs.push(row.h);
                errs.push(err);
            }
        }
        if hs.len() >= 3 {
            slopes.push(fit_loglog(&hs, &errs)?.slope);
        }
    }
    if slopes.len() < 2 {
        return Err(Error::domain("bootstrap produced fewer than 2 usable fits"));
    }
    let m = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let var =
        slopes.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (slopes.len() as f64 - 1.0);
    Ok(var.sqrt())
}

/// The two benchmark drifts: (1) the C³ log/polynomial drift with σ = 1 and
/// (2) the linear drift `a(x) = 2x` with σ = 9; both start at `x0 = 1` on
/// `[0, 1]`.
pub fn benchmark_problem(example: u8) -> Result<SdeProblem> {
    match example {
        1 => SdeProblem::new(crate::sde::Drift::log_poly(), 1.0, 1.0, 1.0),
        2 => SdeProblem::new(crate::sde::Drift::linear(2.0), 9.0, 1.0, 1.0),
        other => Err(Error::domain(format!(
            "unknown benchmark example {other}; expected 1 or 2"
        ))),
    }
}

/// Theoretical strong rate: `2H` for the C³ drift benchmark, `H + ½` for the
/// linear benchmark.
pub fn theoretical_rate(example: u8, hurst: f64) -> Result<f64> {
    match example {
        1 => Ok(2.0 * hurst),
        2 => Ok(hurst + 0.5),
        other => Err(Error::domain(format!("unknown benchmark example {other}"))),
    }
}

/// Slope tolerance around the theoretical rate per example (the C³ case gets
/// more slack for Monte Carlo noise at M = 1000).
pub fn rate_tolerance(example: u8) -> Result<f64> {
    match example {
        1 => Ok(0.15),
        2 => Ok(0.10),
        other => Err(Error::domain(format!("unknown benchmark example {other}"))),
    }
}

/// Options for [`reproduce_benchmark`].
#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub master_seed: u64,
    pub workers: usize,
    /// Scale down to M = 100 paths against a 2¹² reference (CI-sized).
    pub quick: bool,
    /// Allow Hurst parameters outside the (1/3, 1/2) preset range.
    pub allow_any_hurst: bool,
    pub method: Option<Method>,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            master_seed: 42,
            workers: 0,
            quick: false,
            allow_any_hurst: false,
            method: None,
        }
    }
}

/// Result of one benchmark reproduction run.
#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub example: u8,
    pub hurst: f64,
    pub output: StrongErrorOutput,
    pub fit: RateFit,
    pub slope_stderr: f64,
    pub theory: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Reproduce one benchmark point: T = 1, x0 = 1, levels 2⁶..2¹¹ against a
/// 2¹⁵ reference with 1000 paths (the full protocol), fitting the strong
/// rate and comparing against the theoretical exponent.
pub fn reproduce_benchmark(
    example: u8,
    hurst: f64,
    opts: &BenchmarkOptions,
) -> Result<BenchmarkRun> {
    if !(hurst > 1.0 / 3.0 && hurst < 0.5) {
        if opts.allow_any_hurst {
            log::warn!("H={hurst} is outside the (1/3, 1/2) preset range");
        } else {
            return Err(Error::domain(format!(
                "H={hurst} is outside the (1/3, 1/2) preset range; pass the override to run anyway"
            )));
        }
    }
    let problem = benchmark_problem(example)?;
    let (ref_exponent, paths) = if opts.quick { (12, 100) } else { (15, 1000) };
    let config = ExperimentConfig {
        problem,
        hurst,
        level_exponents: (6..=11).collect(),
        ref_exponent,
        paths,
        master_seed: opts.master_seed,
        method: opts.method,
        workers: opts.workers,
    };
    let output = strong_error_curve(&config)?;
    let fit = fit_rate(&output.curve)?;
    let slope_stderr = bootstrap_slope_stderr(&output, 50, opts.master_seed ^ 0xB00F_57A9)?;
    let theory = theoretical_rate(example, hurst)?;
    let tolerance = rate_tolerance(example)?;
    let pass = (fit.slope - theory).abs() <= tolerance;
    Ok(BenchmarkRun {
        example,
        hurst,
        output,
        fit,
        slope_stderr,
        theory,
        tolerance,
        pass,
    })
}

/// Report of [`linear_oracle_crosscheck`].
#[derive(Debug, Clone, Serialize)]
pub struct CrosscheckReport {
    pub euler_reference: ErrorCurve,
    pub exact_reference: ErrorCurve,
    pub euler_fit: Option<RateFit>,
    pub exact_fit: Option<RateFit>,
    pub slope_gap: Option<f64>,
    /// Largest |error difference| between the two references across levels.
    pub max_error_gap: f64,
    pub pass: bool,
}

/// For a linear drift, replace the fine-Euler reference by the closed-form
/// variation-of-constants solution (trapezoidal quadrature on the fine grid)
/// and re-fit the rate; the two slopes must agree within 0.1.
pub fn linear_oracle_crosscheck(config: &ExperimentConfig) -> Result<CrosscheckReport> {
    config.validate()?;
    let a = config
        .problem
        .drift
        .linear_coefficient()
        .ok_or_else(|| Error::domain("crosscheck requires a linear drift"))?;
    let levels = config.sorted_levels();
    let n_ref = 1usize << config.ref_exponent;
    let method = config.method.unwrap_or(if n_ref <= AUTO_CHOLESKY_MAX {
        Method::Cholesky
    } else {
        Method::Circulant
    });
    let sampler = Sampler::new(method, config.hurst, n_ref, config.problem.horizon)?;
    let problem = &config.problem;

    // profiles[path][level] = (squared errors vs euler ref, vs exact ref).
    type PathProfiles = Vec<(Vec<f64>, Vec<f64>)>;
    let profiles: Vec<PathProfiles> = with_pool(config.workers, || {
        (0..config.paths)
            .into_par_iter()
            .map(|m| {
                let rng = RngStream::new(config.master_seed, m as u64);
                let fine = sampler.sample(rng);
                let reference =
                    euler_path(problem, &fine).map_err(|e| e.in_path(m, None))?;
                let mut out = Vec::with_capacity(levels.len());
                for &k in &levels {
                    let factor = 1usize << (config.ref_exponent - k);
                    let coarse =
                        subsample(&fine, factor).map_err(|e| e.in_path(m, Some(k)))?;
                    let y = euler_path(problem, &coarse).map_err(|e| e.in_path(m, Some(k)))?;
                    let times: Vec<f64> = (0..=coarse.n).map(|j| coarse.time(j)).collect();
                    let exact =
                        exact_linear_solution(a, problem.sigma, problem.x0, &fine, &times)
                            .map_err(|e| e.in_path(m, Some(k)))?;
                    let vs_euler: Vec<f64> = (0..=coarse.n)
                        .map(|j| {
                            let d = reference.values[j * factor] - y.values[j];
                            d * d
                        })
                        .collect();
                    let vs_exact: Vec<f64> = (0..=coarse.n)
                        .map(|j| {
                            let d = exact[j] - y.values[j];
                            d * d
                        })
                        .collect();
                    out.push((vs_euler, vs_exact));
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })??;

    let paths_f = config.paths as f64;
    let build_curve = |select: &dyn Fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> ErrorCurve {
        let mut rows = Vec::with_capacity(levels.len());
        for (li, &k) in levels.iter().enumerate() {
            let n_k = 1usize << k;
            let mut mean = vec![0.0f64; n_k + 1];
            for p in &profiles {
                for (j, &e2) in select(&p[li]).iter().enumerate() {
                    mean[j] += e2;
                }
            }
            for v in &mut mean {
                *v /= paths_f;
            }
            let mut argmax = 0usize;
            for (j, &v) in mean.iter().enumerate() {
                if v > mean[argmax] {
                    argmax = j;
                }
            }
            rows.push(ErrorRow {
                level: k,
                h: config.problem.horizon / n_k as f64,
                error: mean[argmax].sqrt(),
                stderr: 0.0,
                argmax_index: argmax,
            });
        }
        ErrorCurve {
            rows,
            config: config.echo(),
        }
    };
    let euler_curve = build_curve(&|p| &p.0);
    let exact_curve = build_curve(&|p| &p.1);

    let max_error_gap = euler_curve
        .rows
        .iter()
        .zip(&exact_curve.rows)
        .map(|(a, b)| (a.error - b.error).abs())
        .fold(0.0f64, f64::max);

    let euler_fit = fit_rate(&euler_curve).ok();
    let exact_fit = fit_rate(&exact_curve).ok();
    let (slope_gap, pass) = match (&euler_fit, &exact_fit) {
        (Some(e), Some(x)) => {
            let gap = (e.slope - x.slope).abs();
            (Some(gap), gap <= 0.1)
        }
        // Degenerate (e.g. A = 0, zero drift): errors must coincide outright.
        _ => (None, max_error_gap == 0.0),
    };
    Ok(CrosscheckReport {
        euler_reference: euler_curve,
        exact_reference: exact_curve,
        euler_fit,
        exact_fit,
        slope_gap,
        max_error_gap,
        pass,
    })
}
