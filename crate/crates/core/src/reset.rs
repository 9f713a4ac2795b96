//! Reset elements: a base linear system whose state is mapped through `A_rho`
//! whenever the input crosses zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::matkit::tol::CONVERGENCE_MARGIN;
use crate::matkit::{eigenvalues, mat_exp, spectral_radius, Mat};

/// Minimum time between resets used by the presets.
pub const DEFAULT_MIN_RESET_INTERVAL: f64 = 1e-6;

/// Grid size of the convergence scan when none is given.
pub const DEFAULT_CONVERGENCE_GRID: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct ResetElement {
    base: StateSpace,
    reset_matrix: Mat,
    min_reset_interval: f64,
}

/// Which construction of the nonlinearity applies to an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementClass {
    /// `A_r = 0`: parallel reset integrators.
    Integrator,
    /// All eigenvalues of `A_r` in the open left half plane.
    Hurwitz,
}

impl ResetElement {
    pub fn new(base: StateSpace, reset_matrix: Mat, min_reset_interval: f64) -> Result<Self> {
        let m = base.order();
        if reset_matrix.shape() != (m, m) {
            return Err(Error::Dimension(format!(
                "reset matrix must be {m}x{m}, got {}x{}",
                reset_matrix.rows(),
                reset_matrix.cols()
            )));
        }
        if !reset_matrix.is_finite() {
            return Err(Error::NonFinite("reset matrix"));
        }
        if !(min_reset_interval >= 0.0 && min_reset_interval.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "minimum reset interval must be non-negative, got {min_reset_interval}"
            )));
        }
        Ok(Self {
            base,
            reset_matrix,
            min_reset_interval,
        })
    }

    pub fn base(&self) -> &StateSpace {
        &self.base
    }

    pub fn reset_matrix(&self) -> &Mat {
        &self.reset_matrix
    }

    pub fn min_reset_interval(&self) -> f64 {
        self.min_reset_interval
    }

    pub fn order(&self) -> usize {
        self.base.order()
    }

    pub fn with_reset_matrix(&self, reset_matrix: Mat) -> Result<Self> {
        Self::new(self.base.clone(), reset_matrix, self.min_reset_interval)
    }

    pub fn with_min_reset_interval(&self, min_reset_interval: f64) -> Result<Self> {
        Self::new(self.base.clone(), self.reset_matrix.clone(), min_reset_interval)
    }

    /// Same base system with resets turned into no-ops (`A_rho = I`).
    pub fn without_reset(&self) -> Self {
        Self {
            reset_matrix: Mat::identity(self.order()),
            ..self.clone()
        }
    }

    pub fn apply_reset(&self, x: &Mat) -> Result<Mat> {
        if x.shape() != (self.order(), 1) {
            return Err(Error::Dimension(format!(
                "state must be {}x1, got {}x{}",
                self.order(),
                x.rows(),
                x.cols()
            )));
        }
        Ok(&self.reset_matrix * x)
    }

    pub fn classify(&self) -> Result<ElementClass> {
        if self.base.a().is_zero() {
            return Ok(ElementClass::Integrator);
        }
        self.base.require_hurwitz()?;
        Ok(ElementClass::Hurwitz)
    }

    /// Horizon for the convergence scan: ten times the slowest time constant of `A_r`,
    /// or ten input periods when `A_r` has a mode that does not decay.
    pub fn default_scan_horizon(&self, omega: Option<f64>) -> Result<f64> {
        let slowest_decay = eigenvalues(self.base.a())?
            .iter()
            .map(|l| -l.re)
            .fold(f64::INFINITY, f64::min);
        if slowest_decay > 0.0 && slowest_decay.is_finite() {
            Ok(10.0 / slowest_decay)
        } else {
            Ok(omega.map_or(10.0, |w| 10.0 * 2.0 * PI / w))
        }
    }

    /// Samples `rho(A_rho e^{A_r delta})` on a log grid over `(delta_max 1e-6, delta_max]`.
    ///
    /// A finite grid cannot certify the condition for every `delta > 0`; this is a
    /// screening test.
    pub fn check_convergence(&self, delta_max: f64, n_grid: usize) -> Result<ConvergenceReport> {
        if !(delta_max > 0.0 && delta_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "scan horizon must be positive, got {delta_max}"
            )));
        }
        if n_grid < 2 {
            return Err(Error::InvalidParameter(format!(
                "convergence grid needs at least 2 points, got {n_grid}"
            )));
        }
        let grid: Vec<f64> = (1..=n_grid)
            .map(|i| delta_max * 10f64.powf(-6.0 * (1.0 - i as f64 / n_grid as f64)))
            .collect();
        let mut max_radius = 0.0;
        let mut worst_delta = grid[0];
        for &delta in &grid {
            let jump_flow = &self.reset_matrix * &mat_exp(&self.base.a().scale(delta))?;
            let r = spectral_radius(&jump_flow)?;
            if r > max_radius {
                max_radius = r;
                worst_delta = delta;
            }
        }
        Ok(ConvergenceReport {
            max_radius,
            worst_delta,
            pass: max_radius < 1.0 - CONVERGENCE_MARGIN,
            grid,
        })
    }

    /// Scan with the default horizon and grid.
    pub fn check_convergence_default(&self, omega: Option<f64>) -> Result<ConvergenceReport> {
        self.check_convergence(self.default_scan_horizon(omega)?, DEFAULT_CONVERGENCE_GRID)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub max_radius: f64,
    /// Grid point where the maximum was attained.
    pub worst_delta: f64,
    pub pass: bool,
    pub grid: Vec<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// First-order reset element `w_r / (s + w_r)`.
pub fn make_fore(omega_r: f64, reset_matrix: Mat) -> Result<ResetElement> {
    positive("omega_r", omega_r)?;
    let base = StateSpace::new(
        Mat::scalar(-omega_r),
        Mat::scalar(omega_r),
        Mat::scalar(1.0),
        Mat::scalar(0.0),
    )?;
    ResetElement::new(base, reset_matrix, DEFAULT_MIN_RESET_INTERVAL)
}

/// Second-order reset element `w_r^2 / (s^2 + 2 beta_r w_r s + w_r^2)` in companion form.
pub fn make_sore(omega_r: f64, beta_r: f64, reset_matrix: Mat) -> Result<ResetElement> {
    positive("omega_r", omega_r)?;
    if !(beta_r >= 0.0 && beta_r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta_r must be non-negative, got {beta_r}"
        )));
    }
    let w2 = omega_r * omega_r;
    let base = StateSpace::new(
        Mat::from_rows(&[vec![0.0, 1.0], vec![-w2, -2.0 * beta_r * omega_r]])?,
        Mat::column(&[0.0, w2]),
        Mat::from_rows(&[vec![1.0, 0.0]])?,
        Mat::scalar(0.0),
    )?;
    ResetElement::new(base, reset_matrix, DEFAULT_MIN_RESET_INTERVAL)
}

/// `m` reset integrators of the same input; the output is the first state.
pub fn make_integrator(m: usize, reset_matrix: Mat) -> Result<ResetElement> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "integrator needs at least one state".into(),
        ));
    }
    let mut c = Mat::zeros(1, m);
    c[(0, 0)] = 1.0;
    let base = StateSpace::new(Mat::zeros(m, m), Mat::ones(m, 1), c, Mat::scalar(0.0))?;
    ResetElement::new(base, reset_matrix, DEFAULT_MIN_RESET_INTERVAL)
}
