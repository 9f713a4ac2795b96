//! Steady-state analysis of open-loop reset elements driven by a sinusoid.
//!
//! A reset element is a linear state-space system whose state is mapped through
//! a reset matrix whenever its input crosses zero. Its periodic steady state is
//! computed here two independent ways:
//!
//! * [`decomposition`]: closed form. The state is the base-linear response plus a
//!   square wave (the reset integrator's nonlinearity) shaped by a linear filter
//!   and scaled by a matrix `Q`. [`hosidf`] turns this into closed-form harmonics
//!   and higher-order sinusoidal-input describing functions.
//! * [`sim`]: exact event-driven simulation with analytic reset instants and
//!   closed-form flows between them, followed by quadrature of the Fourier
//!   coefficients.
//!
//! [`hosidf::validate`] compares the two.

pub mod decomposition;
pub mod error;
pub mod hosidf;
pub mod lti;
pub mod matkit;
pub mod reset;
pub mod sim;

pub use error::{Error, Result};
pub use matkit::{CMat, Mat};
