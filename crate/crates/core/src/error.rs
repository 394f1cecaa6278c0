use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {x} outside sampled range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("quadrature did not converge: estimate {estimate}, error {error} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("eigensolver failed: {message} (residual {residual:e})")]
    Solver { message: String, residual: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error(
        "bound-state count changes inside [{alpha_lo}, {alpha_hi}] ({count_lo} -> {count_hi}); \
         eigenvalue branch not differentiable there"
    )]
    BranchCrossing {
        alpha_lo: f64,
        alpha_hi: f64,
        count_lo: usize,
        count_hi: usize,
    },

    #[error("spectral cutoff {cutoff} too low: tail bound {tail_bound:e} exceeds {tolerance:e}; try cutoff >= {suggested}")]
    CutoffTooLow {
        cutoff: f64,
        tail_bound: f64,
        tolerance: f64,
        suggested: f64,
    },

    #[error("alpha = {alpha} is a breakpoint of the piecewise closed form; use a one-sided derivative")]
    Breakpoint { alpha: f64 },

    #[error("at alpha = {alpha}: {source}")]
    AtAlpha {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at_alpha(self, alpha: f64) -> Self {
        Error::AtAlpha {
            alpha,
            source: Box::new(self),
        }
    }

    /// Strips any `AtAlpha` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtAlpha { source, .. } => source.root(),
            other => other,
        }
    }
}
