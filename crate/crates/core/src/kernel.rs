//! Closed-form covariance analytics of fractional Brownian motion.
//!
//! The fBm with Hurst parameter `H ∈ (0,1)` is the centered Gaussian process
//! with `B_0 = 0` and covariance
//!
//! ```text
//! R(s,t) = ½ (t^{2H} + s^{2H} − |t−s|^{2H})
//! ```
//!
//! This module evaluates `R`, its rectangular increments
//! `E[(B_{s_hi}−B_{s_lo})(B_{t_hi}−B_{t_lo})]`, the fractional Gaussian noise
//! autocovariance, and an independent quadrature oracle for the increment
//! covariance of disjoint intervals based on the integral identity
//!
//! ```text
//! E[(B_b−B_a)(B_d−B_c)] = H(2H−1) ∫_a^b ∫_c^d (v−u)^{2H−2} dv du ,  b ≤ c,
//! ```
//!
//! which is strictly negative for `H < ½` (rough increments are negatively
//! correlated). All operations are pure functions of `(H, times)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// The fBm covariance kernel, parameterized by its Hurst exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovKernel {
    hurst: f64,
}

/// An axis-aligned rectangle `[s_lo, s_hi] × [t_lo, t_hi]` of nonnegative
/// times. Zero-area rectangles are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    s_lo: f64,
    s_hi: f64,
    t_lo: f64,
    t_hi: f64,
}

impl Rect {
    pub fn new(s_lo: f64, s_hi: f64, t_lo: f64, t_hi: f64) -> Result<Self> {
        for v in [s_lo, s_hi, t_lo, t_hi] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!(
                    "rectangle endpoints must be finite nonnegative times, got {v}"
                )));
            }
        }
        if s_lo > s_hi || t_lo > t_hi {
            return Err(Error::domain(format!(
                "rectangle endpoints out of order: [{s_lo},{s_hi}]x[{t_lo},{t_hi}]"
            )));
        }
        Ok(Rect {
            s_lo,
            s_hi,
            t_lo,
            t_hi,
        })
    }

    /// The square `[lo, hi]²`.
    pub fn square(lo: f64, hi: f64) -> Result<Self> {
        Rect::new(lo, hi, lo, hi)
    }

    pub fn s_lo(&self) -> f64 {
        self.s_lo
    }
    pub fn s_hi(&self) -> f64 {
        self.s_hi
    }
    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }
    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }
}

impl CovKernel {
    pub fn new(hurst: f64) -> Result<Self> {
        if !(hurst.is_finite() && 0.0 < hurst && hurst < 1.0) {
            return Err(Error::domain(format!(
                "Hurst parameter must lie in (0,1), got {hurst}"
            )));
        }
        Ok(CovKernel { hurst })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    /// Reject kernels outside the short-memory regime `H < ½`.
    pub fn require_rough(&self) -> Result<()> {
        if self.hurst >= 0.5 {
            return Err(Error::domain(format!(
                "operation requires H < 1/2, got H={}",
                self.hurst
            )));
        }
        Ok(())
    }

    /// `|x|^{2H}` evaluated as `exp(2H·ln|x|)` with an explicit zero branch,
    /// avoiding the `0^0` ambiguity of `powf` at `x = 0`.
    #[inline]
    pub fn abs_pow_2h(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            (2.0 * self.hurst * x.abs().ln()).exp()
        }
    }

    /// The covariance `R(s,t) = ½(t^{2H} + s^{2H} − |t−s|^{2H})`.
    pub fn cov(&self, s: f64, t: f64) -> Result<f64> {
        if !(s.is_finite() && t.is_finite()) || s < 0.0 || t < 0.0 {
            return Err(Error::domain(format!(
                "covariance requires finite nonnegative times, got ({s},{t})"
            )));
        }
        Ok(0.5 * (self.abs_pow_2h(t) + self.abs_pow_2h(s) - self.abs_pow_2h(t - s)))
    }

    /// The rectangular increment of `R`, equal to
    /// `E[(B_{s_hi}−B_{s_lo})(B_{t_hi}−B_{t_lo})]`.
    ///
    /// Algebraically this is `R(s_hi,t_hi) − R(s_hi,t_lo) − R(s_lo,t_hi) +
    /// R(s_lo,t_lo)`; it is evaluated in the cancellation-free difference form
    /// `½(|t_hi−s_lo|^{2H} + |t_lo−s_hi|^{2H} − |t_hi−s_hi|^{2H} − |t_lo−s_lo|^{2H})`.
    pub fn rect_increment(&self, r: &Rect) -> f64 {
        0.5 * (self.abs_pow_2h(r.t_hi - r.s_lo) + self.abs_pow_2h(r.t_lo - r.s_hi)
            - self.abs_pow_2h(r.t_hi - r.s_hi)
            - self.abs_pow_2h(r.t_lo - r.s_lo))
    }

    /// Autocovariance of the stationary increment sequence
    /// `B_{(j+1)h} − B_{jh}` at lag `k`:
    /// `γ(k) = h^{2H} · ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
    pub fn fgn_autocovariance(&self, lag: u64, step: f64) -> Result<f64> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::domain(format!("step must be positive, got {step}")));
        }
        let k = lag as f64;
        let unit = 0.5
            * (self.abs_pow_2h(k + 1.0) - 2.0 * self.abs_pow_2h(k) + self.abs_pow_2h(k - 1.0));
        Ok(self.abs_pow_2h(step) * unit)
    }

    /// Quadrature oracle for the increment covariance of disjoint intervals.
    ///
    /// Requires the two factor intervals of `r` to be disjoint up to a shared
    /// endpoint and `H < ½`. Evaluates `H(2H−1)∫∫(v−u)^{2H−2} dv du` with a
    /// midpoint product rule under the substitution `u = b−(b−a)x^κ`,
    /// `v = c+(d−c)y^κ`, `κ = max(1,⌈2/H⌉)`; the distance `v−u` is computed as
    /// `gap + (b−a)x^κ + (d−c)y^κ`, which keeps the integrand finite at the
    /// shared-endpoint corner. Converges at second order in `m`.
    pub fn increment_cov_quadrature(&self, r: &Rect, m: usize) -> Result<f64> {
        self.require_rough()?;
        if m == 0 {
            return Err(Error::domain("quadrature needs m >= 1 sub-intervals"));
        }
        // Order the two intervals; reject genuine overlap.
        let (a, b, c, d) = if r.s_hi <= r.t_lo {
            (r.s_lo, r.s_hi, r.t_lo, r.t_hi)
        } else if r.t_hi <= r.s_lo {
            (r.t_lo, r.t_hi, r.s_lo, r.s_hi)
        } else {
            return Err(Error::domain(format!(
                "increment_cov_quadrature requires disjoint intervals, got \
                 [{},{}]x[{},{}]",
                r.s_lo, r.s_hi, r.t_lo, r.t_hi
            )));
        };
        if a == b || c == d {
            return Ok(0.0);
        }
        let gap = c - b;
        let kappa = (2.0 / self.hurst).ceil().max(1.0);
        let wu = b - a;
        let wv = d - c;
        let mf = m as f64;
        let mut offs = Vec::with_capacity(m);
        let mut jacs = Vec::with_capacity(m);
        for i in 0..m {
            let x = (i as f64 + 0.5) / mf;
            offs.push(x.powf(kappa));
            jacs.push(kappa * x.powf(kappa - 1.0) / mf);
        }
        let expo = 2.0 * self.hurst - 2.0;
        let mut sum = 0.0;
        for i in 0..m {
            let p = wu * offs[i];
            let ju = wu * jacs[i];
            let mut row = 0.0;
            for j in 0..m {
                let w = gap + p + wv * offs[j];
                row += w.powf(expo) * jacs[j];
            }
            sum += row * ju * wv;
        }
        Ok(self.hurst * (2.0 * self.hurst - 1.0) * sum)
    }
}
