//! Fixed-step simulation for arbitrary inputs, with zero crossings located by
//! bisection. Slower and less exact than the sinusoid path; kept for inputs whose
//! zeros are not known in closed form.

use crate::error::{Error, Result};
use crate::matkit::tol::ZERO_CROSSING_TOL;
use crate::matkit::Mat;
use crate::reset::ResetElement;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralOptions {
    pub t_end: f64,
    pub step: f64,
    pub x0: Option<Mat>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneralTrace {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub x: Vec<Mat>,
    pub resets: Vec<f64>,
}

fn rk4(el: &ResetElement, u: &dyn Fn(f64) -> f64, t: f64, x: &Mat, h: f64) -> Mat {
    let (a, b) = (el.base().a(), el.base().b());
    let f = |t: f64, x: &Mat| &(a * x) + &b.scale(u(t));
    let k1 = f(t, x);
    let k2 = f(t + h / 2.0, &(x + &k1.scale(h / 2.0)));
    let k3 = f(t + h / 2.0, &(x + &k2.scale(h / 2.0)));
    let k4 = f(t + h, &(x + &k3.scale(h)));
    let incr = &(&(&k1 + &k2.scale(2.0)) + &k3.scale(2.0)) + &k4;
    x + &incr.scale(h / 6.0)
}

/// Simulates from `t = 0`; resets fire where `u` changes sign or touches zero,
/// subject to the element's minimum reset interval.
pub fn simulate_general(
    el: &ResetElement,
    u: &dyn Fn(f64) -> f64,
    opts: &GeneralOptions,
) -> Result<GeneralTrace> {
    if !(opts.step > 0.0 && opts.t_end > 0.0) {
        return Err(Error::InvalidParameter(
            "step and end time must be positive".into(),
        ));
    }
    let m = el.order();
    let mut x = opts.x0.clone().unwrap_or_else(|| Mat::zeros(m, 1));
    if x.shape() != (m, 1) {
        return Err(Error::Dimension(format!("initial state must be {m}x1")));
    }
    let base = el.base();
    let mut tr = GeneralTrace {
        t: Vec::new(),
        y: Vec::new(),
        x: Vec::new(),
        resets: Vec::new(),
    };
    let mut last_reset: Option<f64> = None;
    let mut try_reset = |t: f64, x: &Mat, resets: &mut Vec<f64>| -> Mat {
        let allowed = last_reset.is_none_or(|l| t - l >= el.min_reset_interval());
        if allowed {
            last_reset = Some(t);
            resets.push(t);
            el.reset_matrix() * x
        } else {
            x.clone()
        }
    };

    let mut t = 0.0;
    if u(0.0) == 0.0 {
        x = try_reset(0.0, &x, &mut tr.resets);
    }
    tr.t.push(t);
    tr.y.push(base.output(&x, u(t)));
    tr.x.push(x.clone());
    while t < opts.t_end {
        let h = opts.step.min(opts.t_end - t);
        let (u0, u1) = (u(t), u(t + h));
        let crossing = u0 != 0.0 && (u1 == 0.0 || u0.signum() != u1.signum());
        if crossing {
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > ZERO_CROSSING_TOL {
                let mid = 0.5 * (lo + hi);
                let um = u(t + mid);
                if um == 0.0 {
                    lo = mid;
                    hi = mid;
                } else if um.signum() == u0.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let dt = hi;
            let pre = rk4(el, u, t, &x, dt);
            t += dt;
            x = try_reset(t, &pre, &mut tr.resets);
            // step past the zero so it is not detected again
            if u(t) == 0.0 && t < opts.t_end {
                let h2 = ZERO_CROSSING_TOL.min(opts.t_end - t);
                x = rk4(el, u, t, &x, h2);
                t += h2;
            }
        } else {
            x = rk4(el, u, t, &x, h);
            t += h;
        }
        if !x.is_finite() {
            return Err(Error::NonFinite("simulated state"));
        }
        tr.t.push(t);
        tr.y.push(base.output(&x, u(t)));
        tr.x.push(x.clone());
    }
    Ok(tr)
}
