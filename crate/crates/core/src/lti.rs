//! Single-input single-output state-space systems under sinusoidal forcing.
//!
//! All responses are closed form: the forced part comes from the steady-state
//! phasor `(jwI - A)^-1 B b` and the transient from `e^{A t}`, so no time
//! stepping error enters anything built on top of this module.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matkit::{mat_exp, solve, solve_c, spectral_abscissa, CMat, Mat};

/// Base linear system `x' = A x + B u`, `y = C x + D u` with scalar `u` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace {
    a: Mat,
    b: Mat,
    c: Mat,
    d: Mat,
}

impl StateSpace {
    pub fn new(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let m = a.require_square()?;
        if m == 0 {
            return Err(Error::Dimension("state dimension must be at least 1".into()));
        }
        if b.shape() != (m, 1) {
            return Err(Error::Dimension(format!(
                "B must be {m}x1, got {}x{}",
                b.rows(),
                b.cols()
            )));
        }
        if c.shape() != (1, m) {
            return Err(Error::Dimension(format!(
                "C must be 1x{m}, got {}x{}",
                c.rows(),
                c.cols()
            )));
        }
        if d.shape() != (1, 1) {
            return Err(Error::Dimension(format!(
                "D must be 1x1, got {}x{}",
                d.rows(),
                d.cols()
            )));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return Err(Error::NonFinite("state-space matrices"));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &Mat {
        &self.b
    }

    pub fn c(&self) -> &Mat {
        &self.c
    }

    pub fn d(&self) -> &Mat {
        &self.d
    }

    pub fn output(&self, x: &Mat, u: f64) -> f64 {
        (&self.c * x)[(0, 0)] + self.d[(0, 0)] * u
    }

    pub fn is_hurwitz(&self) -> Result<bool> {
        Ok(spectral_abscissa(&self.a)? < 0.0)
    }

    pub fn require_hurwitz(&self) -> Result<()> {
        let max_real = spectral_abscissa(&self.a)?;
        if max_real < 0.0 {
            Ok(())
        } else {
            Err(Error::NotHurwitz { max_real })
        }
    }
}

/// `u(t) = b sin(w t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinusoidInput {
    amplitude: f64,
    omega: f64,
}

impl SinusoidInput {
    pub fn new(amplitude: f64, omega: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "input amplitude must be positive, got {amplitude}"
            )));
        }
        Self::unforced(omega).map(|s| Self { amplitude, ..s })
    }

    /// Zero-amplitude input at frequency `omega`; only free motion remains.
    pub fn unforced(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "angular frequency must be positive, got {omega}"
            )));
        }
        Ok(Self {
            amplitude: 0.0,
            omega,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t).sin()
    }

    /// Time between consecutive zeros of the input, `pi / w`.
    pub fn half_period(&self) -> f64 {
        PI / self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.omega)
    }
}

/// Parity of the reset index `k` in `t_k = k pi / w`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(k: u64) -> Self {
        if k % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        }
    }
}

/// `C (sI - A)^-1 B + D`.
pub fn freq_response(ss: &StateSpace, s: Complex64) -> Result<Complex64> {
    let m = ss.order();
    let resolvent = &CMat::identity(m).scale(s) - &ss.a.to_complex();
    let x = solve_c(&resolvent, &ss.b.to_complex()).map_err(|e| match e {
        Error::Singular { .. } => Error::Pole { re: s.re, im: s.im },
        other => other,
    })?;
    Ok((&ss.c.to_complex() * &x)[(0, 0)] + ss.d[(0, 0)])
}

/// Steady-state phasor `g = (jwI - A)^-1 B b`, so that `Im(g e^{jwt})` solves the ODE.
pub fn steady_phasor(ss: &StateSpace, input: &SinusoidInput) -> Result<CMat> {
    let m = ss.order();
    let jw = Complex64::new(0.0, input.omega);
    let resolvent = &CMat::identity(m).scale(jw) - &ss.a.to_complex();
    let g = solve_c(&resolvent, &ss.b.to_complex())?;
    Ok(g.scale(Complex64::new(input.amplitude, 0.0)))
}

fn phasor_at(g: &CMat, phase: f64) -> Mat {
    g.scale(Complex64::from_polar(1.0, phase)).im()
}

/// Phase `w t` reduced to one period.
fn reduced_phase(omega: f64, t: f64) -> f64 {
    (omega * t).rem_euclid(2.0 * PI)
}

/// Unique sinusoidal steady state of a Hurwitz system at time `t`.
pub fn sss_state(ss: &StateSpace, input: &SinusoidInput, t: f64) -> Result<Mat> {
    ss.require_hurwitz()?;
    let g = steady_phasor(ss, input)?;
    Ok(phasor_at(&g, reduced_phase(input.omega, t)))
}

/// Steady state at the reset instants: `+-(A^2 + w^2 I)^-1 B b w`, plus for odd `k`.
pub fn x_bls_at_reset(ss: &StateSpace, input: &SinusoidInput, parity: Parity) -> Result<Mat> {
    ss.require_hurwitz()?;
    let m = ss.order();
    let w = input.omega;
    let lhs = &(&ss.a * &ss.a) + &Mat::identity(m).scale(w * w);
    let v = solve(&lhs, &ss.b)?.scale(input.amplitude * w);
    Ok(match parity {
        Parity::Odd => v,
        Parity::Even => v.scale(-1.0),
    })
}

/// Base-linear response of `m` parallel integrators of one input, started at zero at `t = 0`:
/// `(b / w)(1 - cos w t)` in every state.
pub fn integrator_bls(input: &SinusoidInput, t: f64, m: usize) -> Mat {
    let v = input.amplitude / input.omega * (1.0 - reduced_phase(input.omega, t).cos());
    Mat::column(&vec![v; m])
}

/// Transition over `dt` for the system augmented with the sinusoid generator
/// `s = b sin(wt)`, `c = b cos(wt)`: returns `(Phi, G_s, G_c)` with
/// `x(t0 + dt) = Phi x(t0) + G_s b sin(w t0) + G_c b cos(w t0)`.
pub fn augmented_flow(ss: &StateSpace, omega: f64, dt: f64) -> Result<(Mat, Mat, Mat)> {
    let m = ss.order();
    let mut big = Mat::zeros(m + 2, m + 2);
    for i in 0..m {
        for j in 0..m {
            big[(i, j)] = ss.a[(i, j)] * dt;
        }
        big[(i, m)] = ss.b[(i, 0)] * dt;
    }
    big[(m, m + 1)] = omega * dt;
    big[(m + 1, m)] = -omega * dt;
    let e = mat_exp(&big)?;
    let mut phi = Mat::zeros(m, m);
    let mut gs = Mat::zeros(m, 1);
    let mut gc = Mat::zeros(m, 1);
    for i in 0..m {
        for j in 0..m {
            phi[(i, j)] = e[(i, j)];
        }
        gs[(i, 0)] = e[(i, m)];
        gc[(i, 0)] = e[(i, m + 1)];
    }
    Ok((phi, gs, gc))
}

/// Exact state at `t0 + dt` from `x0` at `t0`.
pub fn propagate_interval(
    ss: &StateSpace,
    x0: &Mat,
    input: &SinusoidInput,
    t0: f64,
    dt: f64,
) -> Result<Mat> {
    let m = ss.order();
    if x0.shape() != (m, 1) {
        return Err(Error::Dimension(format!("initial state must be {m}x1")));
    }
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "interval length must be non-negative, got {dt}"
        )));
    }
    if dt == 0.0 {
        return Ok(x0.clone());
    }
    let (w, b) = (input.omega, input.amplitude);
    if ss.a.is_zero() {
        let gain = b / w * ((w * t0).cos() - (w * (t0 + dt)).cos());
        return Ok(x0 + &ss.b.scale(gain));
    }
    let transition = mat_exp(&ss.a.scale(dt))?;
    match steady_phasor(ss, input) {
        Ok(g) => {
            let start = phasor_at(&g, reduced_phase(w, t0));
            let end = phasor_at(&g, reduced_phase(w, t0 + dt));
            Ok(&end + &(&transition * &(x0 - &start)))
        }
        // resonance: jw is an eigenvalue of A, no sinusoidal particular solution
        Err(Error::Singular { .. }) => {
            let (phi, gs, gc) = augmented_flow(ss, w, dt)?;
            let (s, c) = (w * t0).sin_cos();
            Ok(&(&(&phi * x0) + &gs.scale(b * s)) + &gc.scale(b * c))
        }
        Err(e) => Err(e),
    }
}

/// Precomputed flow from a zero of the input over fixed offsets `tau` in `[0, pi/w]`.
///
/// Starting at `t_k = k pi / w` with state `x`, the state at `t_k + tau_i` is
/// `Phi_i x + (-1)^k f_i`, where `f_i` is the response to `b sin(w tau)` from rest.
#[derive(Clone, Debug)]
pub struct HalfPeriodFlow {
    offsets: Vec<f64>,
    transition: Vec<Mat>,
    forced: Vec<Mat>,
}

impl HalfPeriodFlow {
    pub fn new(ss: &StateSpace, input: &SinusoidInput, offsets: &[f64]) -> Result<Self> {
        let (w, b) = (input.omega, input.amplitude);
        let phasor = if ss.a.is_zero() {
            None
        } else {
            match steady_phasor(ss, input) {
                Ok(g) => Some(g),
                Err(Error::Singular { .. }) => None,
                Err(e) => return Err(e),
            }
        };
        let mut transition = Vec::with_capacity(offsets.len());
        let mut forced = Vec::with_capacity(offsets.len());
        for &tau in offsets {
            if !(tau >= 0.0 && tau.is_finite()) {
                return Err(Error::InvalidParameter(format!("negative offset {tau}")));
            }
            let phi = mat_exp(&ss.a.scale(tau))?;
            let f = if ss.a.is_zero() {
                ss.b.scale(b / w * (1.0 - (w * tau).cos()))
            } else if let Some(g) = &phasor {
                let start = phasor_at(g, 0.0);
                &phasor_at(g, w * tau) - &(&phi * &start)
            } else {
                // from rest at phase zero the generator state is (0, b)
                let (_, _, gc) = augmented_flow(ss, w, tau)?;
                gc.scale(b)
            };
            transition.push(phi);
            forced.push(f);
        }
        Ok(Self {
            offsets: offsets.to_vec(),
            transition,
            forced,
        })
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// State at offset `i` after the zero crossing with index `k`, from `x` at `t_k^+`.
    pub fn state(&self, i: usize, x: &Mat, k: u64) -> Mat {
        let f = if k % 2 == 1 {
            self.forced[i].scale(-1.0)
        } else {
            self.forced[i].clone()
        };
        &(&self.transition[i] * x) + &f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fore(wr: f64) -> StateSpace {
        StateSpace::new(
            Mat::scalar(-wr),
            Mat::scalar(wr),
            Mat::scalar(1.0),
            Mat::scalar(0.0),
        )
        .unwrap()
    }

    fn sore(wr: f64, beta: f64) -> StateSpace {
        StateSpace::new(
            Mat::from_rows(&[vec![0.0, 1.0], vec![-wr * wr, -2.0 * beta * wr]]).unwrap(),
            Mat::column(&[0.0, wr * wr]),
            Mat::from_rows(&[vec![1.0, 0.0]]).unwrap(),
            Mat::scalar(0.0),
        )
        .unwrap()
    }

    fn integrator() -> StateSpace {
        StateSpace::new(
            Mat::scalar(0.0),
            Mat::scalar(1.0),
            Mat::scalar(1.0),
            Mat::scalar(0.0),
        )
        .unwrap()
    }

    #[test]
    fn dimension_checks() {
        assert!(StateSpace::new(
            Mat::zeros(2, 2),
            Mat::zeros(1, 1),
            Mat::zeros(1, 2),
            Mat::zeros(1, 1)
        )
        .is_err());
        assert!(SinusoidInput::new(0.0, 1.0).is_err());
        assert!(SinusoidInput::new(1.0, -1.0).is_err());
    }

    #[test]
    fn frequency_response_examples() {
        let w = 3.0;
        let g = freq_response(&integrator(), Complex64::new(0.0, w)).unwrap();
        assert!((g - Complex64::new(0.0, -1.0 / w)).norm() < 1e-15);

        let g = freq_response(&fore(100.0), Complex64::new(0.0, 100.0)).unwrap();
        assert!((g - Complex64::new(0.5, -0.5)).norm() < 1e-15);

        let feedthrough = StateSpace::new(
            Mat::scalar(0.0),
            Mat::scalar(0.0),
            Mat::scalar(0.0),
            Mat::scalar(2.5),
        )
        .unwrap();
        assert_eq!(
            freq_response(&feedthrough, Complex64::new(0.0, 7.0)).unwrap(),
            Complex64::new(2.5, 0.0)
        );
        assert!(matches!(
            freq_response(&integrator(), Complex64::new(0.0, 0.0)),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn dc_gain_matches_inverse_formula() {
        let ss = sore(100.0, 0.1);
        let g0 = freq_response(&ss, Complex64::new(0.0, 0.0)).unwrap();
        let ainv_b = solve(ss.a(), ss.b()).unwrap();
        let expect = -(ss.c() * &ainv_b)[(0, 0)] + ss.d()[(0, 0)];
        assert!((g0.re - expect).abs() < 1e-10 && g0.im.abs() < 1e-10);
    }

    #[test]
    fn steady_state_at_reset_instants() {
        let ss = fore(100.0);
        let input = SinusoidInput::new(1.0, 100.0).unwrap();
        let x1 = sss_state(&ss, &input, PI / 100.0).unwrap();
        let x2 = sss_state(&ss, &input, 2.0 * PI / 100.0).unwrap();
        assert!((x1[(0, 0)] - 0.5).abs() < 1e-14);
        assert!((x2[(0, 0)] + 0.5).abs() < 1e-14);
        let odd = x_bls_at_reset(&ss, &input, Parity::Odd).unwrap();
        let even = x_bls_at_reset(&ss, &input, Parity::Even).unwrap();
        assert!((odd[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(odd, even.scale(-1.0));

        let ss = sore(100.0, 0.1);
        let odd = x_bls_at_reset(&ss, &input, Parity::Odd).unwrap();
        let direct = sss_state(&ss, &input, PI / 100.0).unwrap();
        assert!((&odd - &direct).max_abs() < 1e-10);
    }

    #[test]
    fn steady_state_is_periodic_and_solves_the_ode() {
        let ss = sore(100.0, 0.1);
        let input = SinusoidInput::new(1.3, 37.0).unwrap();
        let t = 0.123;
        let x = sss_state(&ss, &input, t).unwrap();
        let xp = sss_state(&ss, &input, t + input.period()).unwrap();
        assert!((&x - &xp).max_abs() < 1e-12);

        let h = 1e-6 * input.period();
        let fwd = sss_state(&ss, &input, t + h).unwrap();
        let back = sss_state(&ss, &input, t - h).unwrap();
        let deriv = (&fwd - &back).scale(0.5 / h);
        let rhs = &(ss.a() * &x) + &ss.b().scale(input.value(t));
        assert!((&deriv - &rhs).max_abs() < 1e-5 * rhs.max_abs());
    }

    #[test]
    fn hurwitz_requirement() {
        let input = SinusoidInput::new(1.0, 1.0).unwrap();
        assert!(matches!(
            sss_state(&integrator(), &input, 0.0),
            Err(Error::NotHurwitz { .. })
        ));
    }

    #[test]
    fn integrator_zero_initial_condition_response() {
        let input = SinusoidInput::new(2.0, 4.0).unwrap();
        assert_eq!(integrator_bls(&input, 0.0, 1)[(0, 0)], 0.0);
        let half = integrator_bls(&input, PI / 4.0, 2);
        assert!((half[(0, 0)] - 1.0).abs() < 1e-15 && (half[(1, 0)] - 1.0).abs() < 1e-15);
        assert!(integrator_bls(&input, 2.0 * PI / 4.0, 1)[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn propagation_edge_cases() {
        let ss = sore(100.0, 0.1);
        let input = SinusoidInput::new(1.0, 50.0).unwrap();
        let x0 = Mat::column(&[0.3, -2.0]);
        assert_eq!(propagate_interval(&ss, &x0, &input, 0.4, 0.0).unwrap(), x0);
        assert!(propagate_interval(&ss, &x0, &input, 0.4, -1.0).is_err());

        let silent = SinusoidInput::unforced(50.0).unwrap();
        let free = propagate_interval(&ss, &x0, &silent, 0.4, 0.01).unwrap();
        let expect = &mat_exp(&ss.a().scale(0.01)).unwrap() * &x0;
        assert!((&free - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn propagation_converges_to_steady_state() {
        let ss = sore(100.0, 0.1);
        let input = SinusoidInput::new(1.0, 70.0).unwrap();
        let x0 = Mat::column(&[5.0, -300.0]);
        // 100 time constants of the slowest mode (1/10 s)
        let x = propagate_interval(&ss, &x0, &input, 0.2, 10.0).unwrap();
        let xs = sss_state(&ss, &input, 10.2).unwrap();
        assert!((&x - &xs).max_abs() < 1e-9);
    }

    #[test]
    fn propagation_matches_augmented_exponential_oracle() {
        let ss = sore(100.0, 0.1);
        let input = SinusoidInput::new(0.7, 130.0).unwrap();
        let x0 = Mat::column(&[0.01, 2.0]);
        let (t0, dt) = (0.37, 0.021);
        let x = propagate_interval(&ss, &x0, &input, t0, dt).unwrap();
        let (phi, gs, gc) = augmented_flow(&ss, input.omega(), dt).unwrap();
        let (s, c) = (input.omega() * t0).sin_cos();
        let oracle = &(&(&phi * &x0) + &gs.scale(0.7 * s)) + &gc.scale(0.7 * c);
        assert!((&x - &oracle).max_abs() < 1e-10 * oracle.max_abs());
    }

    #[test]
    fn resonant_system_falls_back_to_augmented_flow() {
        // undamped oscillator driven at its natural frequency
        let ss = sore(10.0, 0.0);
        let input = SinusoidInput::new(1.0, 10.0).unwrap();
        let x0 = Mat::column(&[0.0, 0.0]);
        let dt = 0.5;
        let x = propagate_interval(&ss, &x0, &input, 0.0, dt).unwrap();
        // x1'' + 100 x1 = 100 sin(10 t) from rest: x1 = (sin 10t - 10 t cos 10t) / 2
        let w = 10.0;
        let expect = ((w * dt).sin() - w * dt * (w * dt).cos()) / 2.0;
        assert!((x[(0, 0)] - expect).abs() < 1e-10);
    }

    #[test]
    fn integrator_propagation_is_analytic() {
        let ss = integrator();
        let input = SinusoidInput::new(1.0, 100.0).unwrap();
        let x = propagate_interval(&ss, &Mat::scalar(0.0), &input, 0.0, PI / 100.0).unwrap();
        assert!((x[(0, 0)] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn half_period_flow_matches_propagation() {
        let ss = sore(100.0, 0.1);
        let input = SinusoidInput::new(1.0, 80.0).unwrap();
        let hp = input.half_period();
        let offsets: Vec<f64> = (0..=8).map(|i| hp * i as f64 / 8.0).collect();
        let flow = HalfPeriodFlow::new(&ss, &input, &offsets).unwrap();
        let x = Mat::column(&[0.2, -1.0]);
        for k in [0u64, 1, 2, 7] {
            let tk = k as f64 * hp;
            for (i, &tau) in offsets.iter().enumerate() {
                let a = flow.state(i, &x, k);
                let b = propagate_interval(&ss, &x, &input, tk, tau).unwrap();
                assert!((&a - &b).max_abs() < 1e-10 * b.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn propagation_semigroup() {
        let ss = fore(100.0);
        let input = SinusoidInput::new(1.0, 20.0).unwrap();
        let x0 = Mat::scalar(0.7);
        let (d1, d2) = (0.013, 0.029);
        let once = propagate_interval(&ss, &x0, &input, 0.1, d1 + d2).unwrap();
        let mid = propagate_interval(&ss, &x0, &input, 0.1, d1).unwrap();
        let twice = propagate_interval(&ss, &mid, &input, 0.1 + d1, d2).unwrap();
        assert!((&once - &twice).max_abs() < 1e-10);
    }
}
