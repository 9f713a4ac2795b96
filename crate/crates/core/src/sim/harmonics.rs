//! Fourier coefficients of one sampled period.
//!
//! The period is split at repeated timestamps (the two sides of a jump) and each
//! smooth piece is integrated with the composite Boole rule.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::SimTrace;
use crate::error::{Error, Result};

/// Harmonics of a periodic signal under the convention
/// `y(t) = Im(c_0) + sum_k [Re(c_k) sin(k w t) + Im(c_k) cos(k w t)]`.
///
/// With this convention an LTI system driven by `b sin(wt)` has `c_1 = G(jw) b`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicSet {
    pub omega: f64,
    /// `coeffs[k]` for `k = 0..=K`.
    pub coeffs: Vec<Complex64>,
}

impl HarmonicSet {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].im
    }

    /// `y(t)` from the stored harmonics.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| {
                let (s, co) = (k as f64 * self.omega * t).sin_cos();
                c.re * s + c.im * co
            })
            .sum::<f64>()
            + self.mean()
    }
}

/// Composite Boole rule on `n` equal sub-intervals, `n` a multiple of 4.
fn boole(h: f64, f: &[f64]) -> f64 {
    let n = f.len() - 1;
    let mut s = 7.0 * (f[0] + f[n]);
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        s += match i % 4 {
            0 => 14.0 * v,
            2 => 12.0 * v,
            _ => 32.0 * v,
        };
    }
    2.0 * h / 45.0 * s
}

/// Maximal runs of strictly increasing time stamps.
fn pieces(t: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..t.len() {
        if t[i] == t[i - 1] {
            if i - 1 > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    if t.len() - 1 > start {
        out.push(start..t.len());
    }
    out
}

/// Coefficients `c_0..=c_K` of one period of `values` sampled at `times`.
///
/// The samples must span exactly one period `2 pi / w`, uniformly spaced within each
/// piece, with each piece holding a multiple of 4 sub-intervals.
pub fn fourier_coefficients(
    times: &[f64],
    values: &[f64],
    omega: f64,
    max_order: usize,
) -> Result<HarmonicSet> {
    if times.len() != values.len() || times.len() < 5 {
        return Err(Error::Dimension(
            "need matching time and value samples, at least 5".into(),
        ));
    }
    let period = 2.0 * PI / omega;
    let span = times[times.len() - 1] - times[0];
    if (span - period).abs() > 1e-9 * period {
        return Err(Error::InvalidParameter(format!(
            "samples span {span}, expected one period {period}"
        )));
    }
    let pieces = pieces(times);
    let intervals: usize = pieces.iter().map(|r| r.len() - 1).sum();
    if 2 * max_order >= intervals {
        return Err(Error::Aliasing {
            order: max_order,
            samples: intervals,
        });
    }
    let t0 = times[0];
    let mut coeffs = vec![Complex64::new(0.0, 0.0); max_order + 1];
    let mut buf_s = Vec::new();
    let mut buf_c = Vec::new();
    for r in &pieces {
        let n = r.len() - 1;
        if n % 4 != 0 {
            return Err(Error::InvalidParameter(format!(
                "piece with {n} sub-intervals; Boole quadrature needs a multiple of 4"
            )));
        }
        let (ts, ys) = (&times[r.clone()], &values[r.clone()]);
        let h = (ts[n] - ts[0]) / n as f64;
        let max_dev = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| (t - ts[0] - i as f64 * h).abs())
            .fold(0.0, f64::max);
        if max_dev > 1e-9 * h {
            return Err(Error::InvalidParameter("non-uniform sampling within a piece".into()));
        }
        for (k, c) in coeffs.iter_mut().enumerate() {
            let kw = k as f64 * omega;
            let phase0 = (kw * t0).rem_euclid(2.0 * PI);
            buf_s.clear();
            buf_c.clear();
            for (&t, &y) in ts.iter().zip(ys) {
                let (s, co) = (kw * (t - t0) + phase0).sin_cos();
                buf_s.push(y * s);
                buf_c.push(y * co);
            }
            *c += Complex64::new(boole(h, &buf_s), boole(h, &buf_c));
        }
    }
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c *= if k == 0 { 1.0 / period } else { 2.0 / period };
    }
    // the mean lives in the imaginary part of c_0
    coeffs[0] = Complex64::new(0.0, coeffs[0].im);
    Ok(HarmonicSet { omega, coeffs })
}

/// Output harmonics of a one-period steady-state window.
pub fn measure_harmonics(window: &SimTrace, max_order: usize) -> Result<HarmonicSet> {
    if 2 * max_order >= window.samples_per_period {
        return Err(Error::Aliasing {
            order: max_order,
            samples: window.samples_per_period,
        });
    }
    fourier_coefficients(&window.t, &window.y, window.omega, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One period on the simulator layout: pre/post pairs at `0` and `pi/w`.
    fn layout(omega: f64, spp: usize) -> Vec<f64> {
        let hp = PI / omega;
        let half = spp / 2;
        let mut t = Vec::new();
        for k in 0..2 {
            let tk = k as f64 * hp;
            t.push(tk);
            t.push(tk);
            for i in 1..half {
                t.push(tk + hp * i as f64 / half as f64);
            }
        }
        t.push(2.0 * hp);
        t
    }

    #[test]
    fn boole_is_exact_for_quintics() {
        let n = 8;
        let h = 1.0 / n as f64;
        let f: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(5)).collect();
        assert!((boole(h, &f) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn pure_sine() {
        let w = 100.0;
        let t = layout(w, 256);
        let y: Vec<f64> = t.iter().map(|&t| 2.0 * (w * t).sin()).collect();
        let h = fourier_coefficients(&t, &y, w, 9).unwrap();
        assert!((h.get(1) - Complex64::new(2.0, 0.0)).norm() < 1e-12 * 2.0);
        for k in [0, 2, 3, 4, 5, 9] {
            assert!(h.get(k).norm() < 1e-12 * 2.0, "k={k}");
        }
    }

    #[test]
    fn cosine_and_mean() {
        let w = 3.0;
        let t = layout(w, 64);
        let y: Vec<f64> = t.iter().map(|&t| 0.5 + (2.0 * w * t).cos()).collect();
        let h = fourier_coefficients(&t, &y, w, 4).unwrap();
        assert!((h.mean() - 0.5).abs() < 1e-12);
        assert!((h.get(2) - Complex64::new(0.0, 1.0)).norm() < 1e-10);
        assert!((h.eval(0.3) - (0.5 + (2.0 * w * 0.3).cos())).abs() < 1e-9);
    }

    #[test]
    fn square_wave_series() {
        let (w, height) = (10.0, 0.7);
        let t = layout(w, 2048);
        let hp = PI / w;
        let mut y: Vec<f64> = t
            .iter()
            .map(|&t| if t < hp { height } else { -height })
            .collect();
        // pre-reset sample at pi/w still belongs to the positive half
        y[1 + 1024] = height;
        let h = fourier_coefficients(&t, &y, w, 19).unwrap();
        for k in 1..=19 {
            let c = h.get(k);
            if k % 2 == 1 {
                let expect = 4.0 * height / (k as f64 * PI);
                assert!((c.re - expect).abs() < 1e-10 && c.im.abs() < 1e-12, "k={k} {c}");
            } else {
                assert!(c.norm() < 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn shifted_window() {
        let w = 7.0;
        let period = 2.0 * PI / w;
        let t: Vec<f64> = layout(w, 64).iter().map(|t| t + 40.0 * period).collect();
        let y: Vec<f64> = t.iter().map(|&t| (w * t).sin() + 0.3 * (3.0 * w * t).cos()).collect();
        let h = fourier_coefficients(&t, &y, w, 5).unwrap();
        assert!((h.get(1) - Complex64::new(1.0, 0.0)).norm() < 1e-11);
        assert!((h.get(3) - Complex64::new(0.0, 0.3)).norm() < 1e-11);
    }

    #[test]
    fn guards() {
        let w = 1.0;
        let t = layout(w, 16);
        let y = vec![0.0; t.len()];
        assert!(matches!(
            fourier_coefficients(&t, &y, w, 8),
            Err(Error::Aliasing { .. })
        ));
        assert!(fourier_coefficients(&t, &y, 2.0, 1).is_err());
        assert!(fourier_coefficients(&t[..3], &y[..3], w, 1).is_err());
    }
}
