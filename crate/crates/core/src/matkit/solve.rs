//! LU factorization with partial pivoting for real and complex systems.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use super::mat::{CMat, Mat};
use super::tol::SINGULAR_COND;
use crate::error::{Error, Result};

pub(crate) trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Row-major LU factors `P A = L U` of an n x n matrix.
struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    fn factor(n: usize, mut a: Vec<T>) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[i * n + k].modulus()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let l = a[i * n + k] / pivot;
                a[i * n + k] = l;
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] = a[i * n + j] - l * u;
                }
            }
        }
        Some(Self { n, lu: a, perm })
    }

    /// Solves for a row-major n x p right-hand side.
    fn solve(&self, b: &[T], p: usize) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = Vec::with_capacity(n * p);
        for i in 0..n {
            x.extend_from_slice(&b[self.perm[i] * p..(self.perm[i] + 1) * p]);
        }
        for c in 0..p {
            for i in 0..n {
                let mut s = x[i * p + c];
                for k in 0..i {
                    s = s - self.lu[i * n + k] * x[k * p + c];
                }
                x[i * p + c] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[i * p + c];
                for k in i + 1..n {
                    s = s - self.lu[i * n + k] * x[k * p + c];
                }
                x[i * p + c] = s / self.lu[i * n + i];
            }
        }
        x
    }

    fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut eye = vec![T::zero(); n * n];
        for i in 0..n {
            eye[i * n + i] = T::one();
        }
        self.solve(&eye, n)
    }
}

fn norm_1<T: Scalar>(n: usize, a: &[T]) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| a[i * n + j].modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factors `a`, estimates `cond_1(a)` from the explicit inverse and solves `a x = b`.
fn solve_generic<T: Scalar>(n: usize, a: Vec<T>, b: &[T], p: usize) -> Result<Vec<T>> {
    let a_norm = norm_1(n, &a);
    let lu = Lu::factor(n, a).ok_or(Error::Singular {
        cond: f64::INFINITY,
    })?;
    let cond = a_norm * norm_1(n, &lu.inverse());
    if !cond.is_finite() || cond > SINGULAR_COND {
        return Err(Error::Singular { cond });
    }
    Ok(lu.solve(b, p))
}

fn check_system(a_shape: (usize, usize), b_rows: usize) -> Result<usize> {
    let (rows, cols) = a_shape;
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if b_rows != rows {
        return Err(Error::Dimension(format!(
            "right-hand side has {b_rows} rows, system has {rows}"
        )));
    }
    Ok(rows)
}

/// Solves the real system `a x = b`.
pub fn solve(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = check_system(a.shape(), b.rows())?;
    let x = solve_generic(n, a.as_slice().to_vec(), b.as_slice(), b.cols())?;
    Mat::from_vec(n, b.cols(), x)
}

/// Solves the complex system `a x = b`; residual is at the level of `cond(a) * eps`.
pub fn solve_c(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = check_system(a.shape(), b.rows())?;
    let x = solve_generic(n, a.as_slice().to_vec(), b.as_slice(), b.cols())?;
    CMat::from_vec(n, b.cols(), x)
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    let n = a.require_square()?;
    solve(a, &Mat::identity(n))
}
