//! Steady state of a reset element as base-linear response plus a shaped square wave.
//!
//! A reset integrator's deviation from its base-linear response is a square wave
//! `q_i` that switches at the input's zeros. For a general element the deviation is
//! `q = Q q*`, where `q*` is `q_i` filtered by `T_q(s) = (sI - A_r)^-1 s` and `Q` is a
//! constant scaling matrix.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lti::{integrator_bls, sss_state, x_bls_at_reset, Parity, SinusoidInput};
use crate::matkit::{lstsq, mat_exp, solve, Mat};
use crate::reset::{ElementClass, ResetElement};

/// Default samples per half period for the least-squares scaling fit.
pub const DEFAULT_SCALING_SAMPLES: usize = 64;

/// Relative tolerance for placing a time on a switching instant.
const INSTANT_TOL: f64 = 1e-9;

/// Square wave with value `mean + peak` where the input is positive and
/// `mean - peak` where it is negative.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareWave {
    pub mean: Mat,
    pub peak: Mat,
    pub omega: f64,
}

impl SquareWave {
    pub fn high(&self) -> Mat {
        &self.mean + &self.peak
    }

    pub fn low(&self) -> Mat {
        &self.mean - &self.peak
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: f64) -> Mat {
        self.value_on(PhasePoint::at(t, self.omega).parity())
    }

    fn value_on(&self, parity: Parity) -> Mat {
        match parity {
            Parity::Even => self.high(),
            Parity::Odd => self.low(),
        }
    }
}

/// Square wave left by resets in integrators driven by `a sin(wt)` from zero state.
pub fn square_wave(reset_matrix: &Mat, a: &Mat, omega: f64) -> Result<SquareWave> {
    let m = reset_matrix.require_square()?;
    if a.shape() != (m, 1) {
        return Err(Error::Dimension(format!("input direction must be {m}x1")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "angular frequency must be positive, got {omega}"
        )));
    }
    let eye = Mat::identity(m);
    let a_w = a.scale(1.0 / omega);
    // (I - A_rho)(I + A_rho)^-1 = (I + A_rho)^-1 (I - A_rho): the two commute
    let peak = solve(&(&eye + reset_matrix), &(&(&eye - reset_matrix) * &a_w))?;
    Ok(SquareWave {
        mean: a_w.scale(-1.0),
        peak,
        omega,
    })
}

/// Position within the steady-state period: the half period `[t_k, t_{k+1}]` and the
/// offset into it. An offset equal to the half period denotes the left limit at `t_{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub half: u64,
    pub offset: f64,
}

impl PhasePoint {
    /// Right-continuous placement: at a switching instant the new half period is used.
    pub fn at(t: f64, omega: f64) -> Self {
        let hp = PI / omega;
        let r = (t / hp).max(0.0);
        let mut k = r.floor();
        if r - k > 1.0 - INSTANT_TOL {
            k += 1.0;
        }
        let offset = (t - k * hp).max(0.0);
        Self {
            t,
            half: k as u64,
            offset,
        }
    }

    /// Left limit at the switching instant nearest `t`.
    pub fn left_limit(t: f64, omega: f64) -> Self {
        let hp = PI / omega;
        let k = (t / hp).round().max(1.0);
        Self {
            t,
            half: k as u64 - 1,
            offset: hp,
        }
    }

    pub fn parity(&self) -> Parity {
        Parity::of(self.half)
    }

    /// Placement of every sample of a simulator trace: a sample on a switching instant
    /// is a left limit unless it follows a sample with the same time stamp.
    pub fn for_samples(times: &[f64], omega: f64) -> Vec<Self> {
        let hp = PI / omega;
        times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let r = t / hp;
                let on_instant = (r - r.round()).abs() < INSTANT_TOL && r.round() >= 1.0;
                let after_duplicate = i > 0 && times[i - 1] == t;
                if on_instant && !after_duplicate {
                    Self::left_limit(t, omega)
                } else {
                    Self::at(t, omega)
                }
            })
            .collect()
    }
}

/// Values of `q*` around the reset at an odd instant `t_{2n+1}`, plus the filtered part `x_q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QstarBoundary {
    pub x_q: Mat,
    /// Left limit `q*(t_{2n+1})`.
    pub before: Mat,
    /// Right limit `q*(t_{2n+1}^+)`.
    pub after: Mat,
}

pub fn qstar_boundary(el: &ResetElement, peak: &Mat, omega: f64) -> Result<QstarBoundary> {
    let m = el.order();
    if peak.shape() != (m, 1) {
        return Err(Error::Dimension(format!("square-wave peak must be {m}x1")));
    }
    let eye = Mat::identity(m);
    let e = mat_exp(&el.base().a().scale(PI / omega))?;
    let x_q = solve(&(&e + &eye), &(&(&e - &eye) * peak))?;
    Ok(QstarBoundary {
        before: &x_q + peak,
        after: &x_q - peak,
        x_q,
    })
}

fn qstar_on(
    class: ElementClass,
    el: &ResetElement,
    sw: &SquareWave,
    boundary: &QstarBoundary,
    p: &PhasePoint,
) -> Result<Mat> {
    match class {
        // the shaping filter is the identity for integrators
        ElementClass::Integrator => Ok(sw.value_on(p.parity())),
        ElementClass::Hurwitz => {
            let flow = &mat_exp(&el.base().a().scale(p.offset))? * &boundary.after;
            Ok(match p.parity() {
                Parity::Odd => flow,
                Parity::Even => flow.scale(-1.0),
            })
        }
    }
}

/// Steady-state `q*(t)`, right-continuous at the switching instants.
pub fn qstar_at(el: &ResetElement, sw: &SquareWave, t: f64) -> Result<Mat> {
    let class = el.classify()?;
    let boundary = qstar_boundary(el, &sw.peak, sw.omega)?;
    qstar_on(class, el, sw, &boundary, &PhasePoint::at(t, sw.omega))
}

/// Input direction `b J` of the equivalent reset integrator.
fn integrator_input(el: &ResetElement, input: &SinusoidInput) -> Mat {
    Mat::ones(el.order(), 1).scale(input.amplitude())
}

/// Square wave of the equivalent reset integrator for this element and input.
pub fn element_square_wave(el: &ResetElement, input: &SinusoidInput) -> Result<SquareWave> {
    square_wave(
        el.reset_matrix(),
        &integrator_input(el, input),
        input.omega(),
    )
}

fn base_linear_at(el: &ResetElement, class: ElementClass, input: &SinusoidInput, t: f64) -> Result<Mat> {
    match class {
        ElementClass::Integrator => Ok(integrator_bls(input, t, el.order())),
        ElementClass::Hurwitz => sss_state(el.base(), input, t),
    }
}

/// `Q` for first-order elements from the jump at one reset instant.
pub fn scaling_closed_form(el: &ResetElement, input: &SinusoidInput) -> Result<f64> {
    if el.order() != 1 {
        return Err(Error::Unsupported(format!(
            "closed-form scaling needs a first-order element, got order {}",
            el.order()
        )));
    }
    if el.classify()? == ElementClass::Integrator {
        return Ok(1.0);
    }
    let sw = element_square_wave(el, input)?;
    let bd = qstar_boundary(el, &sw.peak, input.omega())?;
    let rho = el.reset_matrix()[(0, 0)];
    let v = x_bls_at_reset(el.base(), input, Parity::Odd)?[(0, 0)];
    let den = bd.after[(0, 0)] - rho * bd.before[(0, 0)];
    if den == 0.0 || !den.is_finite() {
        return Err(Error::ZeroDenominator);
    }
    Ok((rho - 1.0) * v / den)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub q: Mat,
    /// Norm of the stacked least-squares residual; zero for closed forms.
    pub residual: f64,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// `Q` minimizing the mismatch between `Q q*(t)` and the flow of the post-reset
/// deviation, over `n_samples` points inside each half period of both parities.
pub fn scaling_lstsq(el: &ResetElement, input: &SinusoidInput, n_samples: usize) -> Result<ScalingFit> {
    let m = el.order();
    if n_samples < m * m + 1 {
        return Err(Error::InvalidParameter(format!(
            "need at least {} samples per half period, got {n_samples}",
            m * m + 1
        )));
    }
    el.base().require_hurwitz()?;
    let sw = element_square_wave(el, input)?;
    let bd = qstar_boundary(el, &sw.peak, input.omega())?;
    let rho = el.reset_matrix();
    let eye = Mat::identity(m);
    let hp = input.half_period();
    let mut design = Mat::zeros(2 * n_samples * m, m * m);
    let mut rhs = Mat::zeros(2 * n_samples * m, 1);
    let mut row = 0;
    for parity in [Parity::Odd, Parity::Even] {
        let sign = -parity.sign();
        let v = x_bls_at_reset(el.base(), input, parity)?;
        let before = bd.before.scale(sign);
        let after = bd.after.scale(sign);
        let forced = &(&eye - rho) * &v;
        for i in 1..=n_samples {
            let tau = hp * i as f64 / (n_samples + 1) as f64;
            let e = mat_exp(&el.base().a().scale(tau))?;
            let now = &e * &after;
            let jump = &e * rho;
            let target = (&e * &forced).scale(-1.0);
            for r in 0..m {
                for c in 0..m {
                    design[(row + r, c * m + r)] += now[(c, 0)];
                    for s in 0..m {
                        design[(row + r, c * m + s)] -= jump[(r, s)] * before[(c, 0)];
                    }
                }
                rhs[(row + r, 0)] = target[(r, 0)];
            }
            row += m;
        }
    }
    let sol = lstsq(&design, &rhs)?;
    let mut q = Mat::zeros(m, m);
    for c in 0..m {
        for r in 0..m {
            q[(r, c)] = sol.x[(c * m + r, 0)];
        }
    }
    Ok(ScalingFit {
        q,
        residual: sol.residual,
        rank: sol.rank,
        rank_deficient: sol.rank_deficient,
    })
}

/// `Q` by the cheapest applicable route: identity for integrators and for elements
/// that never reset, closed form for first order, least squares otherwise.
pub fn scaling(el: &ResetElement, input: &SinusoidInput) -> Result<ScalingFit> {
    let m = el.order();
    let exact = |q: Mat| ScalingFit {
        q,
        residual: 0.0,
        rank: m * m,
        rank_deficient: false,
    };
    if el.classify()? == ElementClass::Integrator || *el.reset_matrix() == Mat::identity(m) {
        return Ok(exact(Mat::identity(m)));
    }
    if m == 1 {
        return Ok(exact(Mat::scalar(scaling_closed_form(el, input)?)));
    }
    scaling_lstsq(el, input, DEFAULT_SCALING_SAMPLES)
}

/// Steady state rebuilt as `x_bls + Q q*` on a set of phase points.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub class: ElementClass,
    pub scaling: ScalingFit,
    pub square_wave: SquareWave,
    pub boundary: QstarBoundary,
    /// Largest violation of the reset law `q+ = A_rho q + (A_rho - I) x_bls` over both parities.
    pub jump_residual: f64,
    pub points: Vec<PhasePoint>,
    pub x_bls: Vec<Mat>,
    pub qstar: Vec<Mat>,
    /// `Q q*`.
    pub q: Vec<Mat>,
    pub x: Vec<Mat>,
}

impl Decomposition {
    pub fn output(&self, el: &ResetElement, input: &SinusoidInput) -> Vec<f64> {
        self.points
            .iter()
            .zip(&self.x)
            .map(|(p, x)| {
                let u = if p.offset == 0.0 || p.offset >= input.half_period() {
                    0.0
                } else {
                    input.value(p.t)
                };
                el.base().output(x, u)
            })
            .collect()
    }
}

fn jump_residual(
    el: &ResetElement,
    class: ElementClass,
    input: &SinusoidInput,
    sw: &SquareWave,
    boundary: &QstarBoundary,
    q: &Mat,
) -> Result<f64> {
    let hp = input.half_period();
    let eye = Mat::identity(el.order());
    let rho = el.reset_matrix();
    let mut worst = 0.0f64;
    for k in [1u64, 2] {
        let t = k as f64 * hp;
        let before = qstar_on(class, el, sw, boundary, &PhasePoint::left_limit(t, input.omega()))?;
        let after = qstar_on(class, el, sw, boundary, &PhasePoint::at(t, input.omega()))?;
        let v = base_linear_at(el, class, input, t)?;
        let lhs = &(q * &after) - &(rho * &(q * &before));
        let r = &lhs - &(&(rho - &eye) * &v);
        worst = worst.max(r.max_abs());
    }
    Ok(worst)
}

pub fn reconstruct(el: &ResetElement, input: &SinusoidInput, points: &[PhasePoint]) -> Result<Decomposition> {
    let class = el.classify()?;
    let sw = element_square_wave(el, input)?;
    let boundary = qstar_boundary(el, &sw.peak, input.omega())?;
    let fit = scaling(el, input)?;
    let mut x_bls = Vec::with_capacity(points.len());
    let mut qstar = Vec::with_capacity(points.len());
    let mut q = Vec::with_capacity(points.len());
    let mut x = Vec::with_capacity(points.len());
    for p in points {
        let xb = base_linear_at(el, class, input, p.t)?;
        let qs = qstar_on(class, el, &sw, &boundary, p)?;
        let qq = &fit.q * &qs;
        x.push(&xb + &qq);
        x_bls.push(xb);
        qstar.push(qs);
        q.push(qq);
    }
    let jump_residual = jump_residual(el, class, input, &sw, &boundary, &fit.q)?;
    Ok(Decomposition {
        class,
        scaling: fit,
        square_wave: sw,
        boundary,
        jump_residual,
        points: points.to_vec(),
        x_bls,
        qstar,
        q,
        x,
    })
}
