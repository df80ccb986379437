//! Numerical toolkit for scalar SDEs driven by additive fractional Brownian
//! motion with Hurst parameter `H < 1/2` ("rough" noise).
//!
//! The crate provides:
//!
//! - [`kernel`]: closed-form covariance analytics of the fBm, its rectangular
//!   increments, and a quadrature oracle for the increment covariance.
//! - [`sampler`]: exact-in-distribution fBm path generation on uniform grids
//!   (Cholesky and circulant-embedding methods) with statistical self-tests.
//! - [`sde`]: drift specifications, the Euler scheme, and a closed-form
//!   reference solution for linear drift.
//! - [`variation`]: discrete p-variation (1D and 2D), 2D Young integration
//!   against the fBm covariance, and integral-scaling diagnostics.
//! - [`harness`]: coupled multi-level Monte Carlo strong-error experiments
//!   with log-log rate fitting.
//! - [`io`]: CSV/JSON file formats for paths, error curves, and reports.
//!
//! All randomness flows through counter-addressable [`rng::RngStream`]s, so
//! every result is bit-reproducible for a fixed master seed regardless of
//! worker count or scheduling.

pub mod error;
pub mod fit;
pub mod harness;
pub mod io;
pub mod kernel;
pub mod rng;
pub mod sampler;
pub mod sde;
pub mod variation;

pub use error::{Error, Result};
pub use kernel::{CovKernel, Rect};
pub use rng::RngStream;
pub use sampler::{FbmPath, Method};
pub use sde::{Drift, SdeProblem, SolutionPath};
