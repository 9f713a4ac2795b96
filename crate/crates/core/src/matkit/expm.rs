//! Matrix exponential by scaling and squaring with Padé approximants.
//!
//! Orders 3, 5, 7 and 9 are used when the 1-norm is below their backward-error
//! thresholds; otherwise the matrix is scaled so that `|M|_1 <= 5.37` and the
//! degree-13 approximant is squared back up.

use super::mat::Mat;
use super::solve::solve;
use crate::error::{Error, Result};

const THETA: [(f64, usize); 4] = [
    (1.495585217958292e-2, 3),
    (2.53939833006323e-1, 5),
    (9.504178996162932e-1, 7),
    (2.097847961257068e0, 9),
];
const THETA_13: f64 = 5.371920351148152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `sum_i coeffs[i] * powers[i]` where `powers[0]` is the identity.
fn combine(coeffs: &[f64], powers: &[&Mat]) -> Mat {
    let mut acc = Mat::zeros(powers[0].rows(), powers[0].cols());
    for (c, p) in coeffs.iter().zip(powers) {
        if *c != 0.0 {
            acc = &acc + &p.scale(*c);
        }
    }
    acc
}

/// Odd (`u`) and even (`v`) parts of a low-order Padé numerator.
fn pade_low(a: &Mat, b: &[f64]) -> (Mat, Mat) {
    let n = a.rows();
    let eye = Mat::identity(n);
    let a2 = a * a;
    let mut powers = vec![eye];
    for _ in 1..b.len() / 2 {
        let next = &powers[powers.len() - 1] * &a2;
        powers.push(next);
    }
    let refs: Vec<&Mat> = powers.iter().collect();
    let odd: Vec<f64> = b.iter().skip(1).step_by(2).copied().collect();
    let even: Vec<f64> = b.iter().step_by(2).copied().collect();
    let u = a * &combine(&odd, &refs);
    let v = combine(&even, &refs);
    (u, v)
}

fn pade13(a: &Mat) -> (Mat, Mat) {
    let b = &B13;
    let eye = Mat::identity(a.rows());
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let zero = Mat::zeros(a.rows(), a.cols());
    let inner_u = &a6 * &combine(&[0.0, b[9], b[11], b[13]], &[&zero, &a2, &a4, &a6]);
    let u = a * &(&inner_u + &combine(&[b[1], b[3], b[5], b[7]], &[&eye, &a2, &a4, &a6]));
    let inner_v = &a6 * &combine(&[0.0, b[8], b[10], b[12]], &[&zero, &a2, &a4, &a6]);
    let v = &inner_v + &combine(&[b[0], b[2], b[4], b[6]], &[&eye, &a2, &a4, &a6]);
    (u, v)
}

/// `e^M` for a square, finite `M`.
pub fn mat_exp(m: &Mat) -> Result<Mat> {
    let n = m.require_square()?;
    if !m.is_finite() {
        return Err(Error::NonFinite("matrix exponential argument"));
    }
    if n == 0 || m.is_zero() {
        return Ok(Mat::identity(n));
    }
    let norm = m.norm_1();
    let (squarings, (u, v)) = match THETA.iter().find(|(theta, _)| norm <= *theta) {
        Some(&(_, order)) => {
            let b: &[f64] = match order {
                3 => &B3,
                5 => &B5,
                7 => &B7,
                _ => &B9,
            };
            (0, pade_low(m, b))
        }
        None => {
            let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
            (s as u32, pade13(&m.scale(2f64.powi(-s))))
        }
    };
    let mut r = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    Ok(r)
}
