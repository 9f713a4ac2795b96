use thiserror::Error;

/// Errors raised by the numerical kernel and the analysis routines built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular to working precision (condition estimate {cond:.3e})")]
    Singular { cond: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state matrix is not Hurwitz (largest eigenvalue real part {max_real:.6e})")]
    NotHurwitz { max_real: f64 },

    #[error("s = {re}{im:+}j is a pole of the system")]
    Pole { re: f64, im: f64 },

    #[error("steady state not reached after {periods} periods (relative period-to-period change {change:.3e})")]
    NotConverged { periods: usize, change: f64 },

    #[error("harmonic order {order} aliases with {samples} samples per period")]
    Aliasing { order: usize, samples: usize },

    #[error("scaling denominator vanishes")]
    ZeroDenominator,

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
