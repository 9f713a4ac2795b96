//! Minimal dense linear algebra for the handful-of-states matrices used here.
//!
//! Everything is a pure function of its arguments.

#![allow(clippy::needless_range_loop)]

mod eig;
mod expm;
mod lstsq;
mod mat;
mod solve;
pub mod tol;

pub use eig::{eigenvalues, spectral_abscissa, spectral_radius};
pub use expm::mat_exp;
pub use lstsq::{lstsq, LeastSquares};
pub use mat::{CMat, Mat};
pub use solve::{inverse, solve, solve_c};
