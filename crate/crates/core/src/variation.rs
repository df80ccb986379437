//! Discrete rough-analysis laboratory: p-variation of grid functions (1D and
//! 2D over grid-like partitions), 2D Young–Riemann integration against the
//! fBm covariance, and quadrature checks of the integral scalings that drive
//! the Euler error analysis.
//!
//! Variation suprema are taken over sub-partitions of the supplied grid — the
//! only computable restriction — so 2D estimates are lower bounds of the true
//! norms; all scaling checks therefore test exponents, never constants.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::fit_loglog;
use crate::kernel::{CovKernel, Rect};

/// A scalar function tabulated on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction1D {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::domain("times and values must have equal length"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::domain("times must be strictly increasing"));
        }
        Ok(GridFunction1D { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// A two-parameter function tabulated on a rectangular grid (row `i` ↔
/// `s_times[i]`, column `j` ↔ `t_times[j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    s_times: Vec<f64>,
    t_times: Vec<f64>,
    values: Vec<f64>, // row-major, rows = s_times.len()
}

impl GridFunction2D {
    pub fn new(s_times: Vec<f64>, t_times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if s_times.windows(2).any(|w| !(w[0] < w[1]))
            || t_times.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::domain("grid axes must be strictly increasing"));
        }
        if values.len() != s_times.len() * t_times.len() {
            return Err(Error::domain(format!(
                "value matrix shape mismatch: {} != {} x {}",
                values.len(),
                s_times.len(),
                t_times.len()
            )));
        }
        Ok(GridFunction2D {
            s_times,
            t_times,
            values,
        })
    }

    pub fn from_fn(
        s_times: Vec<f64>,
        t_times: Vec<f64>,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(s_times.len() * t_times.len());
        for &s in &s_times {
            for &t in &t_times {
                values.push(f(s, t));
            }
        }
        GridFunction2D::new(s_times, t_times, values)
    }

    pub fn rows(&self) -> usize {
        self.s_times.len()
    }
    pub fn cols(&self) -> usize {
        self.t_times.len()
    }
    pub fn s_times(&self) -> &[f64] {
        &self.s_times
    }
    pub fn t_times(&self) -> &[f64] {
        &self.t_times
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.t_times.len() + j]
    }

    /// Rectangular increment between grid lines `i0 < i1`, `j0 < j1`.
    #[inline]
    pub fn rect(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> f64 {
        self.value(i1, j1) - self.value(i1, j0) - self.value(i0, j1) + self.value(i0, j0)
    }

    /// Bilinear interpolation, clamped to the grid's bounding box.
    pub fn interp_linear(&self, s: f64, t: f64) -> f64 {
        let locate = |axis: &[f64], x: f64| -> (usize, f64) {
            if x <= axis[0] {
                return (0, 0.0);
            }
            let last = axis.len() - 1;
            if x >= axis[last] {
                return (last - 1, 1.0);
            }
            let i = axis.partition_point(|&a| a <= x) - 1;
            let w = (x - axis[i]) / (axis[i + 1] - axis[i]);
            (i, w)
        };
        let (i, ws) = locate(&self.s_times, s);
        let (j, wt) = locate(&self.t_times, t);
        let f00 = self.value(i, j);
        let f01 = self.value(i, j + 1);
        let f10 = self.value(i + 1, j);
        let f11 = self.value(i + 1, j + 1);
        (1.0 - ws) * ((1.0 - wt) * f00 + wt * f01) + ws * ((1.0 - wt) * f10 + wt * f11)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationMode {
    /// The search space was exhausted (or the DP is provably optimal).
    Exact,
    /// A greedy lower bound of the on-grid supremum.
    LowerBound,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationEstimate {
    pub value: f64,
    pub mode: VariationMode,
    pub partition: String,
}

/// Exact p-variation of `f` over sub-partitions of its grid:
/// `sup (Σ |f(t_{k+1}) − f(t_k)|^p)^{1/p}`, by dynamic programming over the
/// best p-th-power sum ending at each grid point (quadratic time).
pub fn p_variation_1d(f: &GridFunction1D, p: f64) -> Result<VariationEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::domain(format!("p must be >= 1, got {p}")));
    }
    let n = f.len();
    if n < 2 {
        return Err(Error::domain("p-variation needs a grid of length >= 2"));
    }
    let v = f.values();
    let mut best = vec![0.0f64; n];
    let mut back = vec![0usize; n];
    for j in 1..n {
        let mut b = f64::NEG_INFINITY;
        let mut arg = 0;
        for i in 0..j {
            let cand = best[i] + (v[j] - v[i]).abs().powf(p);
            if cand > b {
                b = cand;
                arg = i;
            }
        }
        best[j] = b;
        back[j] = arg;
    }
    let mut count = 1usize;
    let mut k = n - 1;
    while k > 0 {
        k = back[k];
        count += 1;
    }
    Ok(VariationEstimate {
        value: best[n - 1].powf(1.0 / p),
        mode: VariationMode::Exact,
        partition: format!("{count} of {n} grid points"),
    })
}

fn sum_p_2d(g: &GridFunction2D, kept_s: &[usize], kept_t: &[usize], p: f64) -> f64 {
    let mut sum = 0.0;
    for si in kept_s.windows(2) {
        for tj in kept_t.windows(2) {
            sum += g.rect(si[0], si[1], tj[0], tj[1]).abs().powf(p);
        }
    }
    sum
}

/// How [`variation_2d`] explores grid-like sub-partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Search2D {
    /// Enumerate every subset of interior grid lines (exact on the grid);
    /// allowed only when `(rows-2) + (cols-2) <= 20`.
    Brute,
    /// Full-grid seed improved by single-line deletions to a local maximum.
    Greedy,
}

/// Interior-line budget for [`Search2D::Brute`].
pub const BRUTE_LINE_CAP: usize = 20;

/// 2D p-variation of `g` over grid-like sub-partitions:
/// `sup (Σ_{i,j} |g-rect-increment|^p)^{1/p}`.
pub fn variation_2d(g: &GridFunction2D, p: f64, mode: Search2D) -> Result<VariationEstimate> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::domain(format!("p must be >= 1, got {p}")));
    }
    let (rows, cols) = (g.rows(), g.cols());
    if rows < 2 || cols < 2 {
        return Err(Error::domain("2D variation needs at least a 2x2 grid"));
    }
    let (int_s, int_t) = (rows - 2, cols - 2);
    match mode {
        Search2D::Brute => {
            if int_s + int_t > BRUTE_LINE_CAP {
                return Err(Error::domain(format!(
                    "brute mode caps interior lines at {BRUTE_LINE_CAP}, got {}; use greedy",
                    int_s + int_t
                )));
            }
            let mut best = f64::NEG_INFINITY;
            let mut best_desc = (0u32, 0u32);
            for ms in 0u32..(1 << int_s) {
                let kept_s: Vec<usize> = std::iter::once(0)
                    .chain((0..int_s).filter(|b| ms >> b & 1 == 1).map(|b| b + 1))
                    .chain(std::iter::once(rows - 1))
                    .collect();
                for mt in 0u32..(1 << int_t) {
                    let kept_t: Vec<usize> = std::iter::once(0)
                        .chain((0..int_t).filter(|b| mt >> b & 1 == 1).map(|b| b + 1))
                        .chain(std::iter::once(cols - 1))
                        .collect();
                    let s = sum_p_2d(g, &kept_s, &kept_t, p);
                    if s > best {
                        best = s;
                        best_desc = (ms.count_ones() + 2, mt.count_ones() + 2);
                    }
                }
            }
            Ok(VariationEstimate {
                value: best.powf(1.0 / p),
                mode: VariationMode::Exact,
                partition: format!(
                    "{} of {rows} s-lines, {} of {cols} t-lines (exhaustive)",
                    best_desc.0, best_desc.1
                ),
            })
        }
        Search2D::Greedy => {
            let mut kept_s: Vec<usize> = (0..rows).collect();
            let mut kept_t: Vec<usize> = (0..cols).collect();
            let mut current = sum_p_2d(g, &kept_s, &kept_t, p);
            loop {
                let mut best_gain = current;
                let mut best_move: Option<(bool, usize)> = None;
                for i in 1..kept_s.len() - 1 {
                    let mut cand = kept_s.clone();
                    cand.remove(i);
                    let s = sum_p_2d(g, &cand, &kept_t, p);
                    if s > best_gain {
                        best_gain = s;
                        best_move = Some((true, i));
                    }
                }
                for j in 1..kept_t.len() - 1 {
                    let mut cand = kept_t.clone();
                    cand.remove(j);
                    let s = sum_p_2d(g, &kept_s, &cand, p);
                    if s > best_gain {
                        best_gain = s;
                        best_move = Some((false, j));
                    }
                }
                match best_move {
                    Some((true, i)) => {
                        kept_s.remove(i);
                        current = best_gain;
                    }
                    Some((false, j)) => {
                        kept_t.remove(j);
                        current = best_gain;
                    }
                    None => break,
                }
            }
            Ok(VariationEstimate {
                value: current.powf(1.0 / p),
                mode: VariationMode::LowerBound,
                partition: format!(
                    "{} of {rows} s-lines, {} of {cols} t-lines (greedy deletion)",
                    kept_s.len(),
                    kept_t.len()
                ),
            })
        }
    }
}

/// Left-corner Riemann sum of `∫∫ f dR` over `domain` on a uniform
/// `refinement × refinement` cell grid:
/// `Σ f(u_i, v_j) · R([u_i,u_{i+1}] × [v_j,v_{j+1}])`.
pub fn young_integral_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    kernel: &CovKernel,
    domain: &Rect,
    refinement: usize,
) -> Result<f64> {
    if refinement == 0 {
        return Err(Error::domain("refinement must be >= 1"));
    }
    let m = refinement;
    let (s0, s1) = (domain.s_lo(), domain.s_hi());
    let (t0, t1) = (domain.t_lo(), domain.t_hi());
    let ds = (s1 - s0) / m as f64;
    let dt = (t1 - t0) / m as f64;
    let mut sum = 0.0;
    for i in 0..m {
        let u0 = s0 + i as f64 * ds;
        let u1 = if i + 1 == m { s1 } else { s0 + (i + 1) as f64 * ds };
        for j in 0..m {
            let v0 = t0 + j as f64 * dt;
            let v1 = if j + 1 == m { t1 } else { t0 + (j + 1) as f64 * dt };
            let cell = Rect::new(u0, u1, v0, v1)?;
            sum += f(u0, v0) * kernel.rect_increment(&cell);
        }
    }
    Ok(sum)
}

/// Outcome of the Young convergence driver.
#[derive(Debug, Clone, Serialize)]
pub struct YoungResult {
    pub value: f64,
    pub refinement: usize,
    /// Successive Cauchy differences `|I_{2r} − I_r|`.
    pub cauchy: Vec<f64>,
}

/// Double the refinement until successive Riemann sums differ by less than
/// `tol`, or fail carrying the Cauchy-difference trace once the refinement
/// would exceed `max_refinement`.
pub fn young_integral_converge<F: Fn(f64, f64) -> f64>(
    f: F,
    kernel: &CovKernel,
    domain: &Rect,
    tol: f64,
    max_refinement: usize,
) -> Result<YoungResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    // Start at 2x2 cells: the single-cell sum anchors f at one corner only
    // and its Cauchy difference is uninformative.
    let mut r = 2usize;
    let mut prev = young_integral_2d(&f, kernel, domain, r)?;
    let mut cauchy = Vec::new();
    while 2 * r <= max_refinement {
        r *= 2;
        let next = young_integral_2d(&f, kernel, domain, r)?;
        let diff = (next - prev).abs();
        cauchy.push(diff);
        if diff < tol {
            return Ok(YoungResult {
                value: next,
                refinement: r,
                cauchy,
            });
        }
        prev = next;
    }
    Err(Error::YoungNonConvergence {
        cap: max_refinement,
        trace: cauchy,
    })
}

/// JSON-exportable report of a scaling check.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub check: String,
    #[serde(rename = "H")]
    pub hurst: f64,
    /// The abscissa of the fit: interval lengths or grid sizes.
    pub grid: Vec<f64>,
    pub estimates: Vec<f64>,
    pub fitted_slope: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

/// Slope slack shared by the scaling checks; reflects quadrature and
/// lower-bound bias.
pub const SCALING_SLOPE_TOL: f64 = 0.15;

/// Growth of the covariance's 2D variation on diagonal squares `[0,ℓ]²`:
/// the greedy lower bound of `‖R‖_{V^{1/2H}}` is computed for each `ℓ` and
/// the slope of `log estimate` vs `log ℓ` is fitted; estimates growing like
/// `ℓ^{2H}` (slope within tolerance of `2H`) are consistent with the
/// `C_H ℓ^{2H}` bound being attained at this order.
pub fn check_lemma_rr_scaling(
    hurst: f64,
    lengths: &[f64],
    density: usize,
) -> Result<ScalingReport> {
    let kernel = CovKernel::new(hurst)?;
    if hurst > 0.5 {
        return Err(Error::domain("scaling check requires H <= 1/2"));
    }
    if lengths.len() < 3 {
        return Err(Error::domain("need >= 3 interval lengths to fit a slope"));
    }
    if density < 2 {
        return Err(Error::domain("need at least 2 cells per axis"));
    }
    if lengths.iter().any(|&l| !(l.is_finite() && l > 0.0)) {
        return Err(Error::domain("interval lengths must be positive"));
    }
    let p = 1.0 / (2.0 * hurst);
    let mut estimates = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let axis: Vec<f64> = (0..=density).map(|i| i as f64 * len / density as f64).collect();
        let g = GridFunction2D::from_fn(axis.clone(), axis, |s, t| {
            kernel.cov(s, t).expect("nonnegative times")
        })?;
        estimates.push(variation_2d(&g, p, Search2D::Greedy)?.value);
    }
    let fit = fit_loglog(lengths, &estimates)?;
    let pass = fit.slope >= 2.0 * hurst - SCALING_SLOPE_TOL;
    Ok(ScalingReport {
        check: "lemma-rr".into(),
        hurst,
        grid: lengths.to_vec(),
        estimates,
        fitted_slope: Some(fit.slope),
        pass,
        note: Some(format!(
            "target exponent {}; estimates are greedy on-grid lower bounds",
            2.0 * hurst
        )),
        details: None,
    })
}

fn require_dyadic(ns: &[usize]) -> Result<()> {
    if ns.iter().any(|&n| n == 0 || !n.is_power_of_two()) {
        return Err(Error::domain("grid sizes must be dyadic (powers of two)"));
    }
    Ok(())
}

/// The double integral `∫₀ᵀ∫₀ᵀ |E[(B_s−B_{⌊s⌋})(B_t−B_{⌊t⌋})]| ds dt`
/// for step `h = T/n`, split into the same-cell part and the disjoint-cell
/// part, by `m`-point midpoint product quadrature per cell pair. The
/// integrand depends only on the cell lag (stationary increments), so the
/// cost is `O(n·m²)`.
pub fn eq31_integral(kernel: &CovKernel, horizon: f64, n: usize, m: usize) -> Result<(f64, f64)> {
    if n == 0 || m == 0 {
        return Err(Error::domain("need n >= 1 and m >= 1"));
    }
    let h = horizon / n as f64;
    let mids: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * h / m as f64).collect();
    let cell_weight = (h / m as f64) * (h / m as f64);
    // q[lag] = ∫∫ over one cell pair at that lag of |E[..]|.
    let mut diagonal = 0.0;
    let mut off_diagonal = 0.0;
    for lag in 0..n {
        let base = lag as f64 * h;
        let mut q = 0.0;
        for &a in &mids {
            for &b in &mids {
                let r = Rect::new(0.0, a, base, base + b)?;
                q += kernel.rect_increment(&r).abs();
            }
        }
        q *= cell_weight;
        if lag == 0 {
            diagonal = n as f64 * q;
        } else {
            off_diagonal += 2.0 * (n - lag) as f64 * q;
        }
    }
    Ok((diagonal, off_diagonal))
}

/// The integral `∫₀ᵀ |E[(B_t−B_{⌊t⌋})(B_{⌊t⌋}−B₀)]| dt` for step `h = T/n`
/// by `m`-point midpoint quadrature per cell on the closed form.
pub fn eq32_integral(kernel: &CovKernel, horizon: f64, n: usize, m: usize) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::domain("need n >= 1 and m >= 1"));
    }
    let h = horizon / n as f64;
    let weight = h / m as f64;
    let mut total = 0.0;
    for i in 1..n {
        let ti = i as f64 * h;
        let mut cell = 0.0;
        for k in 0..m {
            let b = (k as f64 + 0.5) * h / m as f64;
            let r = Rect::new(0.0, ti, ti, ti + b)?;
            cell += kernel.rect_increment(&r).abs();
        }
        total += cell * weight;
    }
    Ok(total)
}

/// Fit the decay of the [`eq31_integral`] against the step size; the bound is
/// `C h^{2H+1}`, so the check passes when the fitted slope is at least
/// `2H + 1 −` [`SCALING_SLOPE_TOL`].
pub fn check_eq31_scaling(
    hurst: f64,
    horizon: f64,
    ns: &[usize],
    m: usize,
) -> Result<ScalingReport> {
    if !(hurst > 1.0 / 3.0 && hurst < 0.5) {
        return Err(Error::domain(format!(
            "eq31 check requires H in (1/3, 1/2), got {hurst}"
        )));
    }
    require_dyadic(ns)?;
    if ns.len() < 3 {
        return Err(Error::domain("need >= 3 grid sizes to fit a slope"));
    }
    let kernel = CovKernel::new(hurst)?;
    let mut hs = Vec::new();
    let mut totals = Vec::new();
    let mut rows = Vec::new();
    for &n in ns {
        let (diag, off) = eq31_integral(&kernel, horizon, n, m)?;
        hs.push(horizon / n as f64);
        totals.push(diag + off);
        rows.push(serde_json::json!({
            "n": n,
            "h": horizon / n as f64,
            "diagonal": diag,
            "off_diagonal": off,
        }));
    }
    let fit = fit_loglog(&hs, &totals)?;
    let target = 2.0 * hurst + 1.0;
    Ok(ScalingReport {
        check: "eq31".into(),
        hurst,
        grid: ns.iter().map(|&n| n as f64).collect(),
        estimates: totals,
        fitted_slope: Some(fit.slope),
        pass: fit.slope >= target - SCALING_SLOPE_TOL,
        note: Some(format!("target exponent {target}")),
        details: Some(serde_json::Value::Array(rows)),
    })
}

/// Fit the decay of the [`eq32_integral`]; the bound is `C h^{2H}`, so the
/// check passes when the fitted slope is at least `2H −`
/// [`SCALING_SLOPE_TOL`]. At `H = ½` the integrand vanishes identically and
/// the slope fit is skipped.
pub fn check_eq32_scaling(
    hurst: f64,
    horizon: f64,
    ns: &[usize],
    m: usize,
) -> Result<ScalingReport> {
    if !(hurst > 1.0 / 3.0 && hurst <= 0.5) {
        return Err(Error::domain(format!(
            "eq32 check requires H in (1/3, 1/2], got {hurst}"
        )));
    }
    require_dyadic(ns)?;
    if ns.len() < 3 {
        return Err(Error::domain("need >= 3 grid sizes to fit a slope"));
    }
    let kernel = CovKernel::new(hurst)?;
    let mut hs = Vec::new();
    let mut totals = Vec::new();
    for &n in ns {
        hs.push(horizon / n as f64);
        totals.push(eq32_integral(&kernel, horizon, n, m)?);
    }
    let scale = kernel.abs_pow_2h(horizon) * horizon;
    if totals.iter().all(|&v| v.abs() < 1e-13 * scale.max(1.0)) {
        return Ok(ScalingReport {
            check: "eq32".into(),
            hurst,
            grid: ns.iter().map(|&n| n as f64).collect(),
            estimates: totals,
            fitted_slope: None,
            pass: true,
            note: Some("integrand identically zero (independent increments)".into()),
            details: None,
        });
    }
    let fit = fit_loglog(&hs, &totals)?;
    let target = 2.0 * hurst;
    Ok(ScalingReport {
        check: "eq32".into(),
        hurst,
        grid: ns.iter().map(|&n| n as f64).collect(),
        estimates: totals,
        fitted_slope: Some(fit.slope),
        pass: fit.slope >= target - SCALING_SLOPE_TOL,
        note: Some(format!("target exponent {target}")),
        details: None,
    })
}
