//! Least-squares line fitting on log-log axes, used to extract empirical
//! convergence rates from (step size, error) and (length, estimate) tables.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Result of an ordinary least-squares fit of `ln y` on `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// OLS fit of `ln y` against `ln x`. Requires at least two points with
/// strictly positive coordinates.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() {
        return Err(Error::domain("fit_loglog: mismatched input lengths"));
    }
    if xs.len() < 2 {
        return Err(Error::domain("fit_loglog: need at least 2 points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::domain(
            "fit_loglog: coordinates must be finite and positive",
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit_loglog: degenerate abscissa"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn exact_power_law() {
        let xs: Vec<f64> = (1..=6).map(|k| 0.5f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|h| 3.0 * h.powf(0.9)).collect();
        let fit = fit_loglog(&xs, &ys).unwrap();
        assert_relative_eq!(fit.slope, 0.9, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, 3.0f64.ln(), max_relative = 1e-12);
        assert_abs_diff_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn scaling_shifts_intercept_only() {
        let xs: Vec<f64> = (1..=5).map(|k| 0.5f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|h| 2.0 * h.powf(0.7) * (1.0 + 0.01 * h)).collect();
        let ys10: Vec<f64> = ys.iter().map(|y| 10.0 * y).collect();
        let a = fit_loglog(&xs, &ys).unwrap();
        let b = fit_loglog(&xs, &ys10).unwrap();
        assert_relative_eq!(a.slope, b.slope, max_relative = 1e-12);
        assert_relative_eq!(b.intercept - a.intercept, 10.0f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(fit_loglog(&[1.0], &[1.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[1.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[0.0, 1.0]).is_err());
        assert!(fit_loglog(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
