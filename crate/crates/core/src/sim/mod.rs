//! Event-driven simulation of a reset element under `u = b sin(wt)`.
//!
//! Resets fall on the zeros of the input, `t_k = k pi / w`, so the event times are
//! known exactly. Between them the state follows the closed-form flow of the base
//! system; the only rounding comes from matrix products.

mod general;
mod harmonics;

pub use general::{simulate_general, GeneralOptions, GeneralTrace};
pub use harmonics::{fourier_coefficients, measure_harmonics, HarmonicSet};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lti::{HalfPeriodFlow, SinusoidInput};
use crate::matkit::tol::{EVENT_TIME_TOL, STEADY_STATE_TOL};
use crate::matkit::{spectral_radius, Mat};
use crate::reset::ResetElement;

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    pub n_periods: usize,
    /// Uniform sub-intervals per period; must be a multiple of 8.
    pub samples_per_period: usize,
    /// State just before the first reset instant; zero when `None`.
    pub x0: Option<Mat>,
    pub reset_enabled: bool,
    /// Index of the first simulated period; the trace starts at `2 pi start_period / w`.
    pub start_period: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            n_periods: 20,
            samples_per_period: 2048,
            x0: None,
            reset_enabled: true,
            start_period: 0,
        }
    }
}

/// Sampled trajectory.
///
/// Each half period `[t_k, t_{k+1})` contributes a sample just before the reset at
/// `t_k`, one just after it, and the interior points of a uniform grid. A final
/// pre-reset sample closes the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SimTrace {
    pub omega: f64,
    pub amplitude: f64,
    pub samples_per_period: usize,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub x: Vec<Mat>,
    /// Set on the sample taken right after an applied reset.
    pub post_reset: Vec<bool>,
    /// Instants at which a reset was applied.
    pub resets: Vec<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn order(&self) -> usize {
        self.x.first().map_or(0, Mat::rows)
    }

    /// Samples in one period, not counting the closing one.
    pub fn period_stride(&self) -> usize {
        self.samples_per_period + 2
    }

    pub fn periods(&self) -> usize {
        (self.len().saturating_sub(1)) / self.period_stride()
    }

    /// Time series of state component `i`.
    pub fn state(&self, i: usize) -> Vec<f64> {
        self.x.iter().map(|x| x[(i, 0)]).collect()
    }

    /// Samples `[start, end]` inclusive.
    fn slice(&self, start: usize, end: usize) -> SimTrace {
        let (t0, t1) = (self.t[start], self.t[end]);
        SimTrace {
            omega: self.omega,
            amplitude: self.amplitude,
            samples_per_period: self.samples_per_period,
            t: self.t[start..=end].to_vec(),
            u: self.u[start..=end].to_vec(),
            y: self.y[start..=end].to_vec(),
            x: self.x[start..=end].to_vec(),
            post_reset: self.post_reset[start..=end].to_vec(),
            resets: self
                .resets
                .iter()
                .copied()
                .filter(|&r| r >= t0 && r < t1)
                .collect(),
        }
    }
}

/// Steps the hybrid system one half period at a time.
struct Stepper<'a> {
    el: &'a ResetElement,
    input: SinusoidInput,
    reset_enabled: bool,
    last_reset: Option<u64>,
}

impl Stepper<'_> {
    /// Applies the reset at `t_k` if enabled and allowed by the minimum interval.
    fn reset(&mut self, k: u64, x: &Mat) -> (Mat, bool) {
        if !self.reset_enabled {
            return (x.clone(), false);
        }
        let hp = self.input.half_period();
        let allowed = match self.last_reset {
            None => true,
            Some(last) => {
                (k - last) as f64 * hp
                    >= self.el.min_reset_interval() - EVENT_TIME_TOL * self.input.period()
            }
        };
        if allowed {
            self.last_reset = Some(k);
            (self.el.reset_matrix() * x, true)
        } else {
            (x.clone(), false)
        }
    }
}

fn check_samples(samples_per_period: usize) -> Result<()> {
    if samples_per_period < 16 || !samples_per_period.is_multiple_of(8) {
        return Err(Error::InvalidParameter(format!(
            "samples per period must be a multiple of 8 and at least 16, got {samples_per_period}"
        )));
    }
    Ok(())
}

fn half_offsets(input: &SinusoidInput, half: usize) -> Vec<f64> {
    let hp = input.half_period();
    (1..=half).map(|i| hp * i as f64 / half as f64).collect()
}

pub fn simulate(el: &ResetElement, input: &SinusoidInput, opts: &SimOptions) -> Result<SimTrace> {
    if opts.n_periods < 1 {
        return Err(Error::InvalidParameter("need at least one period".into()));
    }
    check_samples(opts.samples_per_period)?;
    let m = el.order();
    let mut x = match &opts.x0 {
        Some(x0) if x0.shape() == (m, 1) => x0.clone(),
        Some(_) => return Err(Error::Dimension(format!("initial state must be {m}x1"))),
        None => Mat::zeros(m, 1),
    };
    let half = opts.samples_per_period / 2;
    let hp = input.half_period();
    let flow = HalfPeriodFlow::new(el.base(), input, &half_offsets(input, half))?;
    let mut stepper = Stepper {
        el,
        input: *input,
        reset_enabled: opts.reset_enabled,
        last_reset: None,
    };
    let capacity = opts.n_periods * (opts.samples_per_period + 2) + 1;
    let mut tr = SimTrace {
        omega: input.omega(),
        amplitude: input.amplitude(),
        samples_per_period: opts.samples_per_period,
        t: Vec::with_capacity(capacity),
        u: Vec::with_capacity(capacity),
        y: Vec::with_capacity(capacity),
        x: Vec::with_capacity(capacity),
        post_reset: Vec::with_capacity(capacity),
        resets: Vec::new(),
    };
    let base = el.base();
    let push = |tr: &mut SimTrace, t: f64, u: f64, x: Mat, post: bool| {
        tr.y.push(base.output(&x, u));
        tr.t.push(t);
        tr.u.push(u);
        tr.x.push(x);
        tr.post_reset.push(post);
    };

    let first = 2 * opts.start_period;
    let last = first + 2 * opts.n_periods as u64;
    for k in first..last {
        let tk = k as f64 * hp;
        push(&mut tr, tk, 0.0, x.clone(), false);
        let (post, applied) = stepper.reset(k, &x);
        if applied {
            tr.resets.push(tk);
        }
        push(&mut tr, tk, 0.0, post.clone(), applied);
        for (i, &tau) in flow.offsets()[..half - 1].iter().enumerate() {
            let t = tk + tau;
            push(&mut tr, t, input.value(t), flow.state(i, &post, k), false);
        }
        x = flow.state(half - 1, &post, k);
        if !x.is_finite() {
            return Err(Error::NonFinite("simulated state"));
        }
    }
    push(&mut tr, last as f64 * hp, 0.0, x, false);
    Ok(tr)
}

/// One steady-state period cut from a longer trace.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyWindow {
    pub trace: SimTrace,
    /// Periods simulated before the response repeated to within tolerance.
    pub periods_to_converge: usize,
    /// Sup-norm change between the last two periods.
    pub change: f64,
}

fn sup_state(tr: &SimTrace, range: std::ops::RangeInclusive<usize>) -> f64 {
    range.map(|i| tr.x[i].max_abs()).fold(0.0, f64::max)
}

/// Returns the last period once consecutive periods agree to `tol` relative to the
/// sup norm of the state over that period.
pub fn steady_state_window(tr: &SimTrace, tol: f64) -> Result<SteadyWindow> {
    let stride = tr.period_stride();
    let periods = tr.periods();
    if periods < 2 {
        return Err(Error::InvalidParameter(
            "steady-state detection needs at least two periods".into(),
        ));
    }
    let changes: Vec<f64> = (1..periods)
        .map(|p| {
            let (a, b) = ((p - 1) * stride, p * stride);
            let scale = sup_state(tr, b..=b + stride).max(f64::MIN_POSITIVE);
            (0..=stride)
                .map(|j| (&tr.x[b + j] - &tr.x[a + j]).max_abs())
                .fold(0.0, f64::max)
                / scale
        })
        .collect();
    let change = changes[changes.len() - 1];
    if change.is_nan() || change >= tol {
        return Err(Error::NotConverged { periods, change });
    }
    let settled = changes.iter().rposition(|&c| c.is_nan() || c >= tol).map_or(1, |i| i + 2);
    let start = (periods - 1) * stride;
    Ok(SteadyWindow {
        trace: tr.slice(start, start + stride),
        periods_to_converge: settled,
        change,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SettleOptions {
    pub samples_per_period: usize,
    pub tol: f64,
    pub max_periods: usize,
    pub reset_enabled: bool,
}

impl Default for SettleOptions {
    fn default() -> Self {
        Self {
            samples_per_period: 2048,
            tol: STEADY_STATE_TOL,
            max_periods: 100_000,
            reset_enabled: true,
        }
    }
}

/// Smallest multiple of 8 (at least 2048) giving `h rho(A) <= 0.05` for the grid step `h`.
pub fn recommended_samples_per_period(el: &ResetElement, omega: f64) -> Result<usize> {
    let rho = spectral_radius(el.base().a())?;
    let needed = (2.0 * PI / omega * rho / 0.05).ceil() as usize;
    Ok(needed.max(2048).div_ceil(8) * 8)
}

/// Iterates the reset-to-reset map until the state at period boundaries repeats,
/// then samples two periods densely and extracts the steady-state window.
pub fn settle(el: &ResetElement, input: &SinusoidInput, opts: &SettleOptions) -> Result<SteadyWindow> {
    check_samples(opts.samples_per_period)?;
    let m = el.order();
    let hp = input.half_period();
    let flow = HalfPeriodFlow::new(el.base(), input, &[hp])?;
    let mut stepper = Stepper {
        el,
        input: *input,
        reset_enabled: opts.reset_enabled,
        last_reset: None,
    };
    let mut x = Mat::zeros(m, 1);
    let mut period = 0u64;
    loop {
        if period as usize >= opts.max_periods {
            return Err(Error::NotConverged {
                periods: period as usize,
                change: f64::NAN,
            });
        }
        let start = x.clone();
        for k in 2 * period..2 * period + 2 {
            let (post, _) = stepper.reset(k, &x);
            x = flow.state(0, &post, k);
        }
        period += 1;
        if !x.is_finite() {
            return Err(Error::NonFinite("simulated state"));
        }
        let scale = x.max_abs().max(start.max_abs()).max(f64::MIN_POSITIVE);
        if (&x - &start).max_abs() <= 1e-2 * opts.tol * scale {
            break;
        }
    }
    let tr = simulate(
        el,
        input,
        &SimOptions {
            n_periods: 2,
            samples_per_period: opts.samples_per_period,
            x0: Some(x),
            reset_enabled: opts.reset_enabled,
            start_period: period,
        },
    )?;
    let mut win = steady_state_window(&tr, opts.tol)?;
    win.periods_to_converge += period as usize;
    Ok(win)
}
