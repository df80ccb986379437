//! File formats: CSV for paths and error curves, JSON for reports and run
//! manifests.
//!
//! Floats in data rows carry 17 significant digits (`{:.16e}`), enough to
//! round-trip `f64` exactly; header metadata uses the shortest round-trip
//! representation. All CSV output is byte-stable for a fixed seed; manifests
//! carry wall-clock timings and are the documented exception.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::RateFit;
use crate::harness::ErrorCurve;
use crate::rng::RngStream;
use crate::sampler::{FbmPath, Method};
use crate::sde::SolutionPath;

/// 17-significant-digit decimal representation (exact round trip).
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV serialization of an fBm path: one comment header line
/// `# fbm H=<h> T=<T> n=<n> seed=<s> method=<m>` followed by `t,value` rows.
pub fn fbm_path_csv(path: &FbmPath) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# fbm H={} T={} n={} seed={} method={}\n",
        path.hurst,
        path.horizon,
        path.n,
        path.seed.master_seed(),
        path.method
    ));
    for (k, &v) in path.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_g17(path.time(k)), fmt_g17(v)));
    }
    out
}

/// Parse a CSV produced by [`fbm_path_csv`]. The stream index of the
/// reconstructed seed is 0 (the only stream the `sample` command emits).
pub fn parse_fbm_path_csv(text: &str) -> Result<FbmPath> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty path file".into()))?;
    let rest = header
        .strip_prefix("# fbm ")
        .ok_or_else(|| Error::Parse("missing `# fbm` header".into()))?;
    let mut hurst = None;
    let mut horizon = None;
    let mut n = None;
    let mut seed = None;
    let mut method = None;
    for token in rest.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed header token `{token}`")))?;
        match key {
            "H" => hurst = Some(parse_f64(value)?),
            "T" => horizon = Some(parse_f64(value)?),
            "n" => {
                n = Some(value.parse::<usize>().map_err(|e| {
                    Error::Parse(format!("bad n `{value}`: {e}"))
                })?)
            }
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|e| {
                    Error::Parse(format!("bad seed `{value}`: {e}"))
                })?)
            }
            "method" => method = Some(value.parse::<Method>()?),
            _ => {} // solution headers carry extra keys; ignore
        }
    }
    let (hurst, horizon, n, seed, method) = match (hurst, horizon, n, seed, method) {
        (Some(h), Some(t), Some(n), Some(s), Some(m)) => (h, t, n, s, m),
        _ => return Err(Error::Parse("header is missing required keys".into())),
    };
    let mut values = Vec::with_capacity(n + 1);
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (_, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("malformed data row `{line}`")))?;
        values.push(parse_f64(v)?);
    }
    if values.len() != n + 1 {
        return Err(Error::Parse(format!(
            "expected {} rows, found {}",
            n + 1,
            values.len()
        )));
    }
    if values[0] != 0.0 {
        return Err(Error::Parse("path does not start at zero".into()));
    }
    Ok(FbmPath {
        hurst,
        horizon,
        n,
        values,
        seed: RngStream::new(seed, 0),
        method,
    })
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad float `{s}`: {e}")))
}

/// CSV serialization of a solution path; shares the fBm format with the
/// additional header keys `kind=solution drift=<name>` (plus the problem's
/// sigma and x0 so a run can be reconstructed).
pub fn solution_path_csv(sol: &SolutionPath) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# fbm H={} T={} n={} seed={} method={} kind=solution drift={} sigma={} x0={}\n",
        sol.hurst,
        sol.horizon,
        sol.n,
        sol.seed.master_seed(),
        sol.method,
        sol.drift_name,
        sol.sigma,
        sol.x0
    ));
    for (k, &v) in sol.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", fmt_g17(sol.time(k)), fmt_g17(v)));
    }
    out
}

/// CSV serialization of an error curve: header `level,h,error,stderr`.
pub fn error_curve_csv(curve: &ErrorCurve) -> String {
    let mut out = String::from("level,h,error,stderr\n");
    for row in &curve.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.level,
            fmt_g17(row.h),
            fmt_g17(row.error),
            fmt_g17(row.stderr)
        ));
    }
    out
}

/// Run manifest: the fully resolved configuration plus timings and outcome.
/// Timing fields make manifests non-byte-stable across reruns by design.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: serde_json::Value,
    pub wall_time_s: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_level_wall_s: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theory_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

pub fn write_json_pretty<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_text(text: &str, path: &Path) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}
