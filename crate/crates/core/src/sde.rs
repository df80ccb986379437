//! The driven system `dX_t = a(X_t) dt + σ dB_t` and its Euler scheme
//!
//! ```text
//! Y_{t_{k+1}} = Y_{t_k} + a(Y_{t_k}) h + σ (B_{t_{k+1}} − B_{t_k})
//! ```
//!
//! The recursion is evaluated in drift-accumulator form: with
//! `D_k := Y_{t_k} − σ B_{t_k}` it reads `D_{k+1} = D_k + a(Y_{t_k}) h`,
//! `Y_{t_k} = D_k + σ B_{t_k}`. This is the same scheme in exact arithmetic,
//! and in floating point it telescopes the noise term, so that for zero drift
//! the solution at shared grid points is bit-identical across coupled levels
//! (the zero-drift strong error is exactly zero, not merely small).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sampler::{self, FbmPath, Method, Sampler};

/// State magnitude beyond which the Euler recursion aborts.
pub const STATE_OVERFLOW: f64 = 1e100;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A drift coefficient together with its first three derivatives and a bound
/// on `|a′|`.
#[derive(Clone)]
pub struct Drift {
    name: String,
    lipschitz_bound: f64,
    linear_coefficient: Option<f64>,
    eval: ScalarFn,
    d1: ScalarFn,
    d2: ScalarFn,
    d3: ScalarFn,
}

impl std::fmt::Debug for Drift {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Drift")
            .field("name", &self.name)
            .field("lipschitz_bound", &self.lipschitz_bound)
            .field("linear_coefficient", &self.linear_coefficient)
            .finish()
    }
}

impl Drift {
    pub fn new(
        name: impl Into<String>,
        lipschitz_bound: f64,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Drift {
            name: name.into(),
            lipschitz_bound,
            linear_coefficient: None,
            eval: Arc::new(eval),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
            d3: Arc::new(d3),
        }
    }

    /// The piecewise drift `a(x) = ln|x|` for `|x| ≥ 1`,
    /// `a(x) = x⁶/6 − 3x⁴/4 + 3x²/2 − 11/12` for `|x| < 1`.
    ///
    /// The polynomial matches the logarithm through third order at `|x| = 1`,
    /// so `a` has bounded derivatives up to order three. At `x = ±1` the
    /// logarithm branch is evaluated (the value agrees; fixing the branch
    /// keeps results bit-reproducible).
    pub fn log_poly() -> Self {
        // sup |a'| = 1.2428108882856108 at x ≈ 0.664637 (inner branch).
        Drift::new(
            "log_poly",
            1.2429,
            |x| {
                if x.abs() >= 1.0 {
                    x.abs().ln()
                } else {
                    let x2 = x * x;
                    ((x2 / 6.0 - 0.75) * x2 + 1.5) * x2 - 11.0 / 12.0
                }
            },
            |x| {
                if x.abs() >= 1.0 {
                    1.0 / x
                } else {
                    let x2 = x * x;
                    ((x2 - 3.0) * x2 + 3.0) * x
                }
            },
            |x| {
                if x.abs() >= 1.0 {
                    -1.0 / (x * x)
                } else {
                    let x2 = x * x;
                    (5.0 * x2 - 9.0) * x2 + 3.0
                }
            },
            |x| {
                if x.abs() >= 1.0 {
                    2.0 / (x * x * x)
                } else {
                    (20.0 * x * x - 18.0) * x
                }
            },
        )
    }

    /// The linear drift `a(x) = Ax`.
    pub fn linear(a: f64) -> Self {
        let mut d = Drift::new(
            format!("linear_{a}"),
            a.abs(),
            move |x| a * x,
            move |_| a,
            |_| 0.0,
            |_| 0.0,
        );
        d.linear_coefficient = Some(a);
        d
    }

    /// Zero drift.
    pub fn zero() -> Self {
        Drift::linear(0.0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    /// `Some(A)` when the drift is `x ↦ Ax`.
    pub fn linear_coefficient(&self) -> Option<f64> {
        self.linear_coefficient
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }
    pub fn d1(&self, x: f64) -> f64 {
        (self.d1)(x)
    }
    pub fn d2(&self, x: f64) -> f64 {
        (self.d2)(x)
    }
    pub fn d3(&self, x: f64) -> f64 {
        (self.d3)(x)
    }
}

/// The SDE `dX = a(X) dt + σ dB` on `[0, T]` with deterministic start `x0`.
#[derive(Debug, Clone)]
pub struct SdeProblem {
    pub drift: Drift,
    pub sigma: f64,
    pub x0: f64,
    pub horizon: f64,
}

impl SdeProblem {
    pub fn new(drift: Drift, sigma: f64, x0: f64, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::domain(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        if !(sigma.is_finite() && x0.is_finite()) {
            return Err(Error::domain("sigma and x0 must be finite"));
        }
        Ok(SdeProblem {
            drift,
            sigma,
            x0,
            horizon,
        })
    }
}

/// A solution (or scheme) path on the uniform grid `t_k = kT/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub n: usize,
    pub horizon: f64,
    /// `n + 1` grid values; `values[0] == x0`.
    pub values: Vec<f64>,
    pub drift_name: String,
    pub sigma: f64,
    pub x0: f64,
    /// Hurst parameter of the driving path.
    pub hurst: f64,
    /// Seed lineage of the driving path.
    pub seed: RngStream,
    pub method: Method,
}

impl SolutionPath {
    pub fn step(&self) -> f64 {
        self.horizon / self.n as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.horizon / self.n as f64
    }
}

fn check_state(y: f64, step: usize) -> Result<f64> {
    if !y.is_finite() || y.abs() > STATE_OVERFLOW {
        return Err(Error::NonFiniteState { step, value: y });
    }
    Ok(y)
}

/// Run the Euler scheme driven by `driving` over the driving path's grid.
pub fn euler_path(problem: &SdeProblem, driving: &FbmPath) -> Result<SolutionPath> {
    if driving.horizon != problem.horizon {
        return Err(Error::domain(format!(
            "driving path horizon {} != problem horizon {}",
            driving.horizon, problem.horizon
        )));
    }
    let n = driving.n;
    let h = driving.horizon / n as f64;
    let mut values = vec![0.0; n + 1];
    let mut drift_acc = problem.x0;
    for k in 0..=n {
        let y = check_state(drift_acc + problem.sigma * driving.values[k], k)?;
        values[k] = y;
        if k < n {
            drift_acc += problem.drift.eval(y) * h;
        }
    }
    Ok(SolutionPath {
        n,
        horizon: driving.horizon,
        values,
        drift_name: problem.drift.name().to_string(),
        sigma: problem.sigma,
        x0: problem.x0,
        hurst: driving.hurst,
        seed: driving.seed,
        method: driving.method,
    })
}

/// Run the Euler scheme on the coarse grid `fine.n / factor` and evaluate its
/// continuous interpolation
/// `Y_t = Y_{⌊t⌋} + a(Y_{⌊t⌋})(t − ⌊t⌋) + σ(B_t − B_{⌊t⌋})`
/// at every fine grid point (the fine path supplies `B_t`).
pub fn euler_path_interpolated(
    problem: &SdeProblem,
    fine: &FbmPath,
    factor: usize,
) -> Result<SolutionPath> {
    if factor == 0 || fine.n % factor != 0 {
        return Err(Error::domain(format!(
            "interpolation factor {factor} does not divide n={}",
            fine.n
        )));
    }
    if fine.horizon != problem.horizon {
        return Err(Error::domain("driving path horizon mismatch"));
    }
    let n_coarse = fine.n / factor;
    let h = fine.horizon / n_coarse as f64;
    let h_fine = fine.horizon / fine.n as f64;
    let mut values = vec![0.0; fine.n + 1];
    let mut drift_acc = problem.x0;
    for k in 0..=n_coarse {
        let y = check_state(drift_acc + problem.sigma * fine.values[k * factor], k * factor)?;
        let a = problem.drift.eval(y);
        // Off-grid points of the cell [t_k, t_{k+1}); dt = 0 reproduces y.
        let last = if k < n_coarse { factor - 1 } else { 0 };
        for j in 0..=last {
            let dt = j as f64 * h_fine;
            let idx = k * factor + j;
            values[idx] =
                check_state((drift_acc + a * dt) + problem.sigma * fine.values[idx], idx)?;
        }
        if k < n_coarse {
            drift_acc += a * h;
        }
    }
    Ok(SolutionPath {
        n: fine.n,
        horizon: fine.horizon,
        values,
        drift_name: problem.drift.name().to_string(),
        sigma: problem.sigma,
        x0: problem.x0,
        hurst: fine.hurst,
        seed: fine.seed,
        method: fine.method,
    })
}

/// Evaluate the exact solution of the linear SDE `dX = AX dt + σ dB` at the
/// requested times via variation of constants,
/// `X_t = e^{At} x0 + σ B_t + σ A ∫₀ᵗ e^{A(t−s)} B_s ds`,
/// with the integral computed by trapezoidal quadrature on the fine grid
/// (second-order accurate in the fine step). Each `eval_time` must lie on the
/// fine grid.
pub fn exact_linear_solution(
    a: f64,
    sigma: f64,
    x0: f64,
    fine: &FbmPath,
    eval_times: &[f64],
) -> Result<Vec<f64>> {
    let n = fine.n;
    let h = fine.horizon / n as f64;
    let eah = (a * h).exp();
    // integral[j] = ∫_0^{t_j} e^{A(t_j - s)} B_s ds, built recursively.
    let mut x_all = vec![0.0; n + 1];
    x_all[0] = x0;
    let mut integral = 0.0;
    for j in 1..=n {
        integral = eah * integral + 0.5 * h * (eah * fine.values[j - 1] + fine.values[j]);
        let t = j as f64 * h;
        x_all[j] = (a * t).exp() * x0 + sigma * fine.values[j] + sigma * a * integral;
    }
    eval_times
        .iter()
        .map(|&t| {
            let kf = t / h;
            let k = kf.round() as i64;
            if k < 0 || k as usize > n || (kf - k as f64).abs() > 1e-9 * (n as f64).max(1.0) {
                return Err(Error::domain(format!(
                    "evaluation time {t} is not on the fine grid (step {h})"
                )));
            }
            Ok(x_all[k as usize])
        })
        .collect()
}

/// Per-`n` row of the moment sanity report.
#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub sup_moment2: f64,
    pub sup_moment4: f64,
}

/// Report of [`moment_sanity`]: `sup_t E|Y_t|^p` estimates for `p ∈ {2,4}`
/// across grid resolutions, plus a divergence flag.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub max_rel_spread2: f64,
    pub max_rel_spread4: f64,
    pub diverging: bool,
}

/// Monte Carlo check that `sup_t E|Y_t|^p` stays stable as the grid refines
/// (`n ∈ {2⁶, 2⁸, 2¹⁰}`); a drifting estimate flags an unstable scheme or an
/// ill-posed drift. Report-only.
pub fn moment_sanity(
    problem: &SdeProblem,
    hurst: f64,
    paths: usize,
    rng: RngStream,
) -> Result<MomentReport> {
    if paths < 100 {
        return Err(Error::domain("moment_sanity needs at least 100 paths"));
    }
    let mut rows = Vec::new();
    for e in [6u32, 8, 10] {
        let n = 1usize << e;
        let sampler = Sampler::auto(hurst, n, problem.horizon)?;
        let mut sum2 = vec![0.0; n + 1];
        let mut sum4 = vec![0.0; n + 1];
        for p in 0..paths {
            let path = sampler.sample(rng.with_stream(p as u64));
            let y = euler_path(problem, &path).map_err(|err| err.in_path(p, Some(e)))?;
            for (k, &v) in y.values.iter().enumerate() {
                let v2 = v * v;
                sum2[k] += v2;
                sum4[k] += v2 * v2;
            }
        }
        let pf = paths as f64;
        let sup2 = sum2.iter().cloned().fold(0.0f64, f64::max) / pf;
        let sup4 = sum4.iter().cloned().fold(0.0f64, f64::max) / pf;
        rows.push(MomentRow {
            n,
            sup_moment2: sup2,
            sup_moment4: sup4,
        });
    }
    let spread = |get: fn(&MomentRow) -> f64| -> f64 {
        let vals: Vec<f64> = rows.iter().map(get).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(0.0f64, f64::max);
        if lo <= 0.0 { f64::INFINITY } else { hi / lo - 1.0 }
    };
    let s2 = spread(|r| r.sup_moment2);
    let s4 = spread(|r| r.sup_moment4);
    Ok(MomentReport {
        rows,
        max_rel_spread2: s2,
        max_rel_spread4: s4,
        diverging: !(s2.is_finite() && s4.is_finite()) || s2 > 0.25 || s4 > 0.6,
    })
}

/// Finite-difference consistency of a drift's stated derivatives, away from
/// non-smooth seams. Used by tests and the `diagnose` command.
pub fn derivative_consistency(drift: &Drift, points: &[f64], rel_tol: f64) -> Result<()> {
    let fd = |f: &dyn Fn(f64) -> f64, x: f64, scale: f64| -> f64 {
        let e = (f64::EPSILON).powf(1.0 / 3.0) * scale;
        (f(x + e) - f(x - e)) / (2.0 * e)
    };
    for &x in points {
        let scale = 1.0 + x.abs();
        let checks = [
            (fd(&|v| drift.eval(v), x, scale), drift.d1(x), "a'"),
            (fd(&|v| drift.d1(v), x, scale), drift.d2(x), "a''"),
            (fd(&|v| drift.d2(v), x, scale), drift.d3(x), "a'''"),
        ];
        for (num, stated, label) in checks {
            let denom = stated.abs().max(1.0);
            if (num - stated).abs() > rel_tol * denom {
                return Err(Error::domain(format!(
                    "{label}({x}) = {stated} disagrees with finite difference {num}"
                )));
            }
        }
    }
    Ok(())
}

/// First-return of [`sampler::sample`] kept alongside the SDE utilities for
/// convenience in drivers.
pub fn sample_driving(
    method: Option<Method>,
    hurst: f64,
    n: usize,
    horizon: f64,
    rng: RngStream,
) -> Result<FbmPath> {
    match method {
        Some(Method::Cholesky) => sampler::sample_cholesky(hurst, n, horizon, rng),
        Some(Method::Circulant) => sampler::sample_circulant(hurst, n, horizon, rng),
        None => sampler::sample(hurst, n, horizon, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn log_poly_seam_values() {
        let d = Drift::log_poly();
        // a(1) = 0 from both branches: ln 1 = 0 and 1/6 - 3/4 + 3/2 - 11/12 = 0.
        assert_eq!(d.eval(1.0), 0.0);
        let poly_at_1 = 1.0 / 6.0 - 0.75 + 1.5 - 11.0 / 12.0;
        assert_abs_diff_eq!(poly_at_1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.eval(1.0 - 1e-12), 0.0, epsilon = 1e-11);
        // a(e) = 1.
        assert_relative_eq!(d.eval(std::f64::consts::E), 1.0, max_relative = 1e-15);
        // Derivatives at the seam from both branches: a' = 1, a'' = -1, a''' = 2.
        assert_eq!(d.d1(1.0), 1.0);
        assert_eq!(d.d2(1.0), -1.0);
        assert_eq!(d.d3(1.0), 2.0);
        let eps = 1e-7;
        assert_abs_diff_eq!(d.d1(1.0 - eps), 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(d.d2(1.0 - eps), -1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(d.d3(1.0 - eps), 2.0, epsilon = 1e-4);
        // Mirror seam at x = -1.
        assert_abs_diff_eq!(d.d1(-1.0 - eps), d.d1(-1.0 + eps), epsilon = 1e-5);
        assert_abs_diff_eq!(d.d2(-1.0 - eps), d.d2(-1.0 + eps), epsilon = 1e-5);
        assert_abs_diff_eq!(d.d3(-1.0 - eps), d.d3(-1.0 + eps), epsilon = 1e-4);
    }

    #[test]
    fn linear_drift_basics() {
        let d = Drift::linear(2.0);
        assert_eq!(d.eval(3.0), 6.0);
        assert_eq!(d.d1(17.0), 2.0);
        // The second derivative of a vanishes.
        for x in [-5.0, 0.0, 0.3, 11.0] {
            assert_eq!(d.d2(x), 0.0);
            assert_eq!(d.d3(x), 0.0);
        }
        assert_eq!(d.linear_coefficient(), Some(2.0));
        let z = Drift::zero();
        assert_eq!(z.eval(4.2), 0.0);
        assert_eq!(z.linear_coefficient(), Some(0.0));
        assert_eq!(Drift::log_poly().linear_coefficient(), None);
    }

    #[test]
    fn derivative_consistency_away_from_seams() {
        let pts: Vec<f64> = vec![-2.5, -1.6, -0.7, -0.2, 0.0, 0.4, 0.85, 1.3, 2.0, 4.0];
        derivative_consistency(&Drift::log_poly(), &pts, 1e-5).unwrap();
        derivative_consistency(&Drift::linear(2.0), &pts, 1e-5).unwrap();
    }

    #[test]
    fn log_poly_lipschitz_bound_holds_on_sampled_pairs() {
        let d = Drift::log_poly();
        let rng = RngStream::new(404, 0);
        for c in 0..2000u64 {
            let x = 8.0 * rng.uniform(2 * c) - 4.0;
            let y = 8.0 * rng.uniform(2 * c + 1) - 4.0;
            let lhs = (d.eval(x) - d.eval(y)).abs();
            assert!(
                lhs <= d.lipschitz_bound() * (x - y).abs() + 1e-12,
                "|a({x})-a({y})| = {lhs}"
            );
        }
    }

    #[test]
    fn euler_zero_drift_telescopes_bit_exactly() {
        let path = sampler::sample_cholesky(0.35, 64, 1.0, RngStream::new(1, 0)).unwrap();
        let problem = SdeProblem::new(Drift::zero(), 1.0, 0.0, 1.0).unwrap();
        let y = euler_path(&problem, &path).unwrap();
        for k in 0..=64 {
            assert_eq!(y.values[k].to_bits(), path.values[k].to_bits());
        }
    }

    #[test]
    fn euler_deterministic_geometric_growth() {
        // sigma = 0, linear drift: Y_{t_k} = (1 + Ah)^k.
        let n = 16;
        let flat = FbmPath {
            hurst: 0.4,
            horizon: 1.0,
            n,
            values: vec![0.0; n + 1],
            seed: RngStream::new(0, 0),
            method: Method::Cholesky,
        };
        let a = 2.0;
        let problem = SdeProblem::new(Drift::linear(a), 0.0, 1.0, 1.0).unwrap();
        let y = euler_path(&problem, &flat).unwrap();
        let h = 1.0 / n as f64;
        for k in 0..=n {
            assert_relative_eq!(
                y.values[k],
                (1.0 + a * h).powi(k as i32),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn euler_single_step_matches_hand_recursion() {
        let path = sampler::sample_cholesky(0.4, 1, 1.0, RngStream::new(3, 1)).unwrap();
        let problem = SdeProblem::new(Drift::log_poly(), 0.7, 1.0, 1.0).unwrap();
        let y = euler_path(&problem, &path).unwrap();
        let d = Drift::log_poly();
        let expected = 1.0 + d.eval(1.0) * 1.0 + 0.7 * path.values[1];
        assert_relative_eq!(y.values[1], expected, max_relative = 1e-14);
    }

    #[test]
    fn euler_rejects_horizon_mismatch_and_overflow() {
        let path = sampler::sample_cholesky(0.4, 8, 1.0, RngStream::new(5, 0)).unwrap();
        let problem = SdeProblem::new(Drift::zero(), 1.0, 0.0, 2.0).unwrap();
        assert!(matches!(euler_path(&problem, &path), Err(Error::Domain(_))));

        let explosive = Drift::new("cubic", f64::INFINITY, |x| x * x * x * 1e60, |_| 0.0, |_| 0.0, |_| 0.0);
        let problem = SdeProblem::new(explosive, 1.0, 1.0, 1.0).unwrap();
        match euler_path(&problem, &path) {
            Err(Error::NonFiniteState { step, .. }) => assert!(step > 0),
            other => panic!("expected overflow error, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_agrees_with_coarse_euler_at_grid_points() {
        let fine = sampler::sample_cholesky(0.4, 64, 1.0, RngStream::new(8, 0)).unwrap();
        let problem = SdeProblem::new(Drift::log_poly(), 1.0, 1.0, 1.0).unwrap();
        let factor = 8;
        let interp = euler_path_interpolated(&problem, &fine, factor).unwrap();
        let coarse = euler_path(&problem, &sampler::subsample(&fine, factor).unwrap()).unwrap();
        for k in 0..=fine.n / factor {
            assert_eq!(
                interp.values[k * factor].to_bits(),
                coarse.values[k].to_bits()
            );
        }
        // Off-grid point: Y_t = Y_{t_k} + a(Y_{t_k})(t - t_k) + sigma (B_t - B_{t_k}).
        let (k, j) = (3usize, 5usize);
        let y_k = coarse.values[k];
        let dt = j as f64 * fine.step();
        let d = Drift::log_poly();
        let hand = (y_k - 1.0 * fine.values[k * factor]) + d.eval(y_k) * dt
            + 1.0 * fine.values[k * factor + j];
        assert_relative_eq!(
            interp.values[k * factor + j],
            hand,
            max_relative = 1e-12
        );
    }

    #[test]
    fn exact_linear_special_cases() {
        let fine = sampler::sample_cholesky(0.4, 128, 1.0, RngStream::new(21, 0)).unwrap();
        let times: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
        // sigma = 0: X_t = e^{At} x0.
        let x = exact_linear_solution(2.0, 0.0, 1.5, &fine, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            assert_relative_eq!(x[k], 1.5 * (2.0 * t).exp(), max_relative = 1e-12);
        }
        // A = 0: X_t = x0 + sigma B_t.
        let x = exact_linear_solution(0.0, 3.0, 1.0, &fine, &times).unwrap();
        for (k, &t) in times.iter().enumerate() {
            let idx = (t * 128.0).round() as usize;
            assert_relative_eq!(
                x[k],
                1.0 + 3.0 * fine.values[idx],
                max_relative = 1e-12
            );
        }
        // Off-grid time is rejected.
        assert!(exact_linear_solution(1.0, 1.0, 1.0, &fine, &[0.3].to_vec()).is_err());
    }

    #[test]
    fn exact_linear_triangle_with_euler() {
        // On one fixed path at n = 2^12 the exact-solution quadrature, the
        // Euler solution, and Richardson-extrapolated Euler tell one story:
        // |exact - euler_n| is small and Richardson shrinks it further.
        let nf = 1 << 12;
        let (a, sigma, x0) = (2.0, 9.0, 1.0);
        let fine = sampler::sample_circulant(0.4, nf, 1.0, RngStream::new(99, 0)).unwrap();
        let problem = SdeProblem::new(Drift::linear(a), sigma, x0, 1.0).unwrap();
        let euler_fine = euler_path(&problem, &fine).unwrap();
        let half = sampler::subsample(&fine, 2).unwrap();
        let euler_half = euler_path(&problem, &half).unwrap();
        let eval: Vec<f64> = (0..=half.n).map(|k| half.time(k)).collect();
        let exact = exact_linear_solution(a, sigma, x0, &fine, &eval).unwrap();
        let mut max_full = 0.0f64;
        let mut max_rich = 0.0f64;
        for k in 0..=half.n {
            let e_full = (exact[k] - euler_fine.values[2 * k]).abs();
            let rich = 2.0 * euler_fine.values[2 * k] - euler_half.values[k];
            max_full = max_full.max(e_full);
            max_rich = max_rich.max((exact[k] - rich).abs());
        }
        // Magnitudes calibrated on this configuration; headroom 10x.
        assert!(max_full < 0.05, "exact vs euler: {max_full}");
        assert!(max_rich < max_full, "richardson {max_rich} vs {max_full}");
    }

    #[test]
    fn moment_sanity_zero_drift_matches_gaussian_moments() {
        let problem = SdeProblem::new(Drift::zero(), 2.0, 1.0, 1.0).unwrap();
        let report = moment_sanity(&problem, 0.4, 2000, RngStream::new(61, 0)).unwrap();
        assert!(!report.diverging, "{report:?}");
        // E|Y_t|^2 = x0^2 + sigma^2 t^{2H}; sup over the grid is at t = T.
        for row in &report.rows {
            let exact = 1.0 + 4.0;
            assert_relative_eq!(row.sup_moment2, exact, max_relative = 0.15);
        }
    }

    #[test]
    fn moment_sanity_stable_for_paper_drifts() {
        let linear = SdeProblem::new(Drift::linear(2.0), 9.0, 1.0, 1.0).unwrap();
        let r = moment_sanity(&linear, 0.4, 1000, RngStream::new(62, 0)).unwrap();
        assert!(!r.diverging, "{r:?}");
        let logp = SdeProblem::new(Drift::log_poly(), 1.0, 1.0, 1.0).unwrap();
        let r = moment_sanity(&logp, 0.4, 1000, RngStream::new(63, 0)).unwrap();
        assert!(!r.diverging, "{r:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn additive_shift_property(seed in 0u64..500, h in 0.3f64..0.5) {
            // Zero drift, any x0: Y - x0 equals sigma*B to within one ulp-scale
            // rounding of the final addition; exactly when x0 = 0.
            let path = sampler::sample_cholesky(h, 16, 1.0, RngStream::new(seed, 0)).unwrap();
            let sigma = 1.7;
            let problem = SdeProblem::new(Drift::zero(), sigma, 0.0, 1.0).unwrap();
            let y = euler_path(&problem, &path).unwrap();
            for k in 0..=16 {
                prop_assert_eq!(y.values[k].to_bits(), (sigma * path.values[k]).to_bits());
            }
        }
    }
}
