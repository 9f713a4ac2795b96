//! Higher-order sinusoidal-input describing functions from the decomposition.
//!
//! The square wave has odd harmonics `4 q_hat / (k pi)` in phase with the input.
//! Passing them through `Q (jkwI - A_r)^-1 jkw` and the output map gives the
//! harmonics of the nonlinear part in closed form.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::decomposition::{element_square_wave, scaling};
use crate::error::{Error, Result};
use crate::lti::{freq_response, SinusoidInput};
use crate::matkit::{solve_c, CMat, Mat};
use crate::reset::{ElementClass, ResetElement};
use crate::sim::{measure_harmonics, recommended_samples_per_period, settle, SettleOptions};

/// Phase in degrees, in `(-180, 180]`.
pub fn phase_deg(z: Complex64) -> f64 {
    let d = z.im.atan2(z.re).to_degrees();
    if d <= -180.0 {
        d + 360.0
    } else {
        d
    }
}

/// `Q (jkwI - A_r)^-1 jkw (4 / (k pi)) q_hat`, the state-space harmonic of `q`; zero for even `k`.
fn q_state_harmonic(el: &ResetElement, q: &Mat, peak: &Mat, k: usize, omega: f64) -> Result<CMat> {
    let m = el.order();
    if k == 0 {
        return Err(Error::InvalidParameter("harmonic order must be at least 1".into()));
    }
    if k.is_multiple_of(2) {
        return Ok(CMat::zeros(m, 1));
    }
    let s = Complex64::new(0.0, k as f64 * omega);
    let resolvent = &CMat::identity(m).scale(s) - &el.base().a().to_complex();
    let shaped = solve_c(&resolvent, &peak.to_complex().scale(s)).map_err(|e| match e {
        Error::Singular { .. } => Error::Pole { re: 0.0, im: s.im },
        other => other,
    })?;
    let gain = Complex64::new(4.0 / (k as f64 * PI), 0.0);
    Ok((&q.to_complex() * &shaped).scale(gain))
}

/// Output harmonic `k` of the nonlinear contribution for square-wave peak `peak`.
pub fn q_harmonic(el: &ResetElement, q: &Mat, peak: &Mat, k: usize, omega: f64) -> Result<Complex64> {
    let x = q_state_harmonic(el, q, peak, k, omega)?;
    Ok((&el.base().c().to_complex() * &x)[(0, 0)])
}

/// Closed-form harmonics at one frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct HosidfPoint {
    pub omega: f64,
    /// Base-linear frequency response `G(jw)`.
    pub bls: Complex64,
    pub q: Mat,
    /// Square-wave peak at unit input amplitude.
    pub peak: Mat,
    /// `h[k - 1] = H_k` for `k = 1..=K`.
    pub h: Vec<Complex64>,
    /// `q_harm[k - 1] = q_k`.
    pub q_harm: Vec<Complex64>,
}

impl HosidfPoint {
    pub fn get(&self, k: usize) -> Complex64 {
        self.h[k - 1]
    }
}

/// `H_1..=H_K` at `omega`, evaluated with input amplitude `amplitude` and normalized by it.
pub fn hosidf_point_with_amplitude(
    el: &ResetElement,
    omega: f64,
    max_order: usize,
    amplitude: f64,
) -> Result<HosidfPoint> {
    hosidf_point_scaled(el, omega, max_order, amplitude, 1.0)
}

fn hosidf_point_scaled(
    el: &ResetElement,
    omega: f64,
    max_order: usize,
    amplitude: f64,
    q_scale: f64,
) -> Result<HosidfPoint> {
    if max_order < 1 {
        return Err(Error::InvalidParameter("need at least the first harmonic".into()));
    }
    let input = SinusoidInput::new(amplitude, omega)?;
    let q = scaling(el, &input)?.q.scale(q_scale);
    let peak = element_square_wave(el, &input)?.peak;
    let bls = freq_response(el.base(), Complex64::new(0.0, omega))?;
    let mut h = Vec::with_capacity(max_order);
    let mut q_harm = Vec::with_capacity(max_order);
    for k in 1..=max_order {
        let qk = q_harmonic(el, &q, &peak, k, omega)? / amplitude;
        q_harm.push(qk);
        h.push(if k == 1 { bls + qk } else { qk });
    }
    Ok(HosidfPoint {
        omega,
        bls,
        q,
        peak: peak.scale(1.0 / amplitude),
        h,
        q_harm,
    })
}

pub fn hosidf_point(el: &ResetElement, omega: f64, max_order: usize) -> Result<HosidfPoint> {
    hosidf_point_with_amplitude(el, omega, max_order, 1.0)
}

/// `H_k(w)` at unit input amplitude.
pub fn hosidf(el: &ResetElement, k: usize, omega: f64) -> Result<Complex64> {
    if k < 1 {
        return Err(Error::InvalidParameter("harmonic order must be at least 1".into()));
    }
    Ok(hosidf_point(el, omega, k)?.get(k))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HosidfTable {
    pub omegas: Vec<f64>,
    pub max_order: usize,
    /// One entry per frequency, in grid order.
    pub points: Vec<Result<HosidfPoint>>,
}

impl HosidfTable {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.is_err()).count()
    }
}

/// `count` frequencies evenly spaced in log scale over `[start, stop]`.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "invalid frequency grid {start}..{stop} with {count} points"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect())
}

/// Evaluates every frequency independently on up to `jobs` threads. Failures are
/// recorded per point; the table keeps grid order.
pub fn sweep(el: &ResetElement, omegas: &[f64], max_order: usize, jobs: usize) -> Result<HosidfTable> {
    if omegas.is_empty() {
        return Err(Error::InvalidParameter("empty frequency grid".into()));
    }
    if max_order < 1 {
        return Err(Error::InvalidParameter("need at least the first harmonic".into()));
    }
    let jobs = jobs.clamp(1, omegas.len());
    let chunk = omegas.len().div_ceil(jobs);
    let points = std::thread::scope(|scope| {
        let handles: Vec<_> = omegas
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|&w| hosidf_point(el, w, max_order))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    Ok(HosidfTable {
        omegas: omegas.to_vec(),
        max_order,
        points,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidateOptions {
    pub amplitude: f64,
    /// Samples per period of the simulation; chosen from the dynamics when `None`.
    pub samples_per_period: Option<usize>,
    /// Relative period-to-period tolerance for steady state.
    pub steady_tol: f64,
    pub max_periods: usize,
    /// Multiplies `Q` before comparing; `1.0` except to check that a wrong `Q` is caught.
    pub q_scale: f64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        let s = SettleOptions::default();
        Self {
            amplitude: 1.0,
            samples_per_period: None,
            steady_tol: s.tol,
            max_periods: s.max_periods,
            q_scale: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicComparison {
    pub k: usize,
    pub closed_form: Complex64,
    /// Measured `c_k / b`.
    pub simulated: Complex64,
    /// `|closed - simulated| / |simulated|` for odd `k`; `|c_k| / |c_1|` for even `k`.
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Validation {
    pub omega: f64,
    pub rows: Vec<HarmonicComparison>,
    /// Largest relative error over odd orders.
    pub max_odd_error: f64,
    /// Largest `|c_k| / |c_1|` over even orders, zero when `K < 2`.
    pub max_even_ratio: f64,
    pub periods_to_converge: usize,
}

/// Compares closed-form `H_k` with harmonics of the simulated steady state.
pub fn validate(el: &ResetElement, omega: f64, max_order: usize, opts: &ValidateOptions) -> Result<Validation> {
    let input = SinusoidInput::new(opts.amplitude, omega)?;
    let closed = hosidf_point_scaled(el, omega, max_order, opts.amplitude, opts.q_scale)?;
    let spp = match opts.samples_per_period {
        Some(n) => n,
        None => recommended_samples_per_period(el, omega)?,
    };
    let win = settle(
        el,
        &input,
        &SettleOptions {
            samples_per_period: spp,
            tol: opts.steady_tol,
            max_periods: opts.max_periods,
            reset_enabled: true,
        },
    )?;
    let measured = measure_harmonics(&win.trace, max_order)?;
    let c1 = measured.get(1).norm();
    let mut rows = Vec::with_capacity(max_order);
    let (mut max_odd_error, mut max_even_ratio) = (0.0f64, 0.0f64);
    for k in 1..=max_order {
        let sim = measured.get(k) / opts.amplitude;
        let cf = closed.get(k);
        let rel_error = if k % 2 == 1 {
            let e = (cf - sim).norm() / sim.norm();
            max_odd_error = max_odd_error.max(e);
            e
        } else {
            let r = measured.get(k).norm() / c1;
            max_even_ratio = max_even_ratio.max(r);
            r
        };
        rows.push(HarmonicComparison {
            k,
            closed_form: cf,
            simulated: sim,
            rel_error,
        });
    }
    Ok(Validation {
        omega,
        rows,
        max_odd_error,
        max_even_ratio,
        periods_to_converge: win.periods_to_converge,
    })
}

/// `q(t)` rebuilt from its odd harmonics up to `k_max`, plus the constant part
/// (the square-wave mean for integrators, zero otherwise).
pub fn partial_fourier_q(
    el: &ResetElement,
    input: &SinusoidInput,
    k_max: usize,
    times: &[f64],
) -> Result<Vec<Mat>> {
    if k_max.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "highest harmonic must be odd, got {k_max}"
        )));
    }
    let m = el.order();
    let omega = input.omega();
    let q = scaling(el, input)?.q;
    let sw = element_square_wave(el, input)?;
    let dc = match el.classify()? {
        ElementClass::Integrator => &q * &sw.mean,
        ElementClass::Hurwitz => Mat::zeros(m, 1),
    };
    let harmonics: Vec<(f64, CMat)> = (1..=k_max)
        .step_by(2)
        .map(|k| Ok((k as f64, q_state_harmonic(el, &q, &sw.peak, k, omega)?)))
        .collect::<Result<_>>()?;
    Ok(times
        .iter()
        .map(|&t| {
            let mut x = dc.clone();
            for (k, c) in &harmonics {
                let phase = (k * omega * t).rem_euclid(2.0 * PI);
                x = &x + &c.scale(Complex64::from_polar(1.0, phase)).im();
            }
            x
        })
        .collect())
}
