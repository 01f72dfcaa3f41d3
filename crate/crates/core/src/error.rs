use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root bracketing failed for J_{order} zero #{index}: {reason}")]
    Bracketing {
        order: u32,
        index: u32,
        reason: String,
    },

    #[error("grid too coarse: {interior} interior points (need at least {required})")]
    GridTooCoarse { interior: usize, required: usize },

    #[error("eigensolver did not converge in window [{lo:.6}, {hi:.6}): found {found} of {expected} eigenvalues")]
    EigenNonConvergence {
        lo: f64,
        hi: f64,
        found: usize,
        expected: usize,
    },

    #[error("factorization breakdown at shift {shift}: {reason}")]
    Factorization { shift: f64, reason: String },

    #[error(
        "captured norm {captured:.6} below threshold {threshold} (k window [{k_lo:.3}, {k_hi:.3}])"
    )]
    InsufficientNorm {
        captured: f64,
        threshold: f64,
        k_lo: f64,
        k_hi: f64,
    },

    #[error("point ({x}, {y}) is not inside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
