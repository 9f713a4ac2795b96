//! Numerical tolerances shared by the kernel, the analysis modules and the tests.

/// Condition-number estimate above which a linear solve is reported as singular.
pub const SINGULAR_COND: f64 = 1e14;

/// Relative accuracy requested from the matrix exponential.
pub const EXPM_RTOL: f64 = 1e-12;

/// Accuracy of eigenvalues from the small-matrix eigensolver.
pub const EIG_TOL: f64 = 1e-10;

/// Relative threshold on the pivoted-QR diagonal used to decide numerical rank,
/// scaled by `max(rows, cols) * f64::EPSILON` at the call site.
pub const RANK_EPS_FACTOR: f64 = 10.0;

/// Maximum spectral radius for the convergence gate to pass (`rho < 1 - margin`).
pub const CONVERGENCE_MARGIN: f64 = 1e-12;

/// Default relative sup-norm change between consecutive periods that counts as steady.
pub const STEADY_STATE_TOL: f64 = 1e-10;

/// Reset instants are analytic; they must match `k*pi/omega` to this fraction of a period.
pub const EVENT_TIME_TOL: f64 = 1e-12;

/// Bisection tolerance for zero crossings of a general input signal.
pub const ZERO_CROSSING_TOL: f64 = 1e-12;
