//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on parameters or inputs was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cholesky factorization of the covariance Gram matrix failed even
    /// after diagonal jitter; the grid is numerically rank-deficient.
    #[error(
        "covariance factorization failed for n={n}{}; try fewer grid points or a larger H",
        if *.jittered { " (after diagonal jitter retry)" } else { "" }
    )]
    Factorization { n: usize, jittered: bool },

    /// The circulant embedding is not positive semidefinite beyond the
    /// clamping tolerance.
    #[error(
        "circulant embedding of length {len} has eigenvalue {min_eigenvalue:.6e} \
         below -{tolerance:.3e}; refusing to clamp"
    )]
    EmbeddingNotPsd {
        len: usize,
        min_eigenvalue: f64,
        tolerance: f64,
    },

    /// The Euler state left the finite range (user-supplied drift blew up).
    #[error("non-finite or overflowing state {value:e} at step {step}")]
    NonFiniteState { step: usize, value: f64 },

    /// The Young-integral convergence driver hit its refinement cap. The
    /// trace carries the successive Cauchy differences |I_{2r} - I_r|.
    #[error("young integral did not converge within {cap} refinement doublings; cauchy trace {trace:?}")]
    YoungNonConvergence { cap: usize, trace: Vec<f64> },

    /// An error from a Monte Carlo worker, tagged with its path index and,
    /// when applicable, the level exponent being computed.
    #[error("path {path}{}: {source}", .level.map(|k| format!(" level 2^{k}")).unwrap_or_default())]
    InPath {
        path: usize,
        level: Option<u32>,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Attach Monte Carlo path context to an error.
    pub fn in_path(self, path: usize, level: Option<u32>) -> Self {
        Error::InPath {
            path,
            level,
            source: Box::new(self),
        }
    }
}
