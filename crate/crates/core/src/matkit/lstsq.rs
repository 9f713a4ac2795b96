//! Linear least squares via Householder QR with column pivoting.
//!
//! Rank-deficient problems return the minimum-norm solution by a second QR
//! factorization of the leading block rows (complete orthogonal decomposition).

use super::mat::Mat;
use super::tol::RANK_EPS_FACTOR;
use crate::error::{Error, Result};

/// Least-squares solution and its diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub x: Mat,
    /// Numerical rank of the design matrix.
    pub rank: usize,
    pub rank_deficient: bool,
    /// `|A x - b|_F`.
    pub residual: f64,
}

/// Householder reflector `I - beta v v^T` annihilating `x[1..]`; returns `(v, beta, alpha)`
/// where `alpha` is the resulting leading entry.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (vec![0.0; x.len()], 0.0, 0.0);
    }
    let alpha = if x[0] > 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    let vtv = v.iter().map(|e| e * e).sum::<f64>();
    let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
    (v, beta, alpha)
}

/// Applies the reflector to rows `k..` of every column in `cols` of `a`.
fn reflect(a: &mut Mat, k: usize, v: &[f64], beta: f64, cols: std::ops::Range<usize>) {
    if beta == 0.0 {
        return;
    }
    for j in cols {
        let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * a[(k + i, j)]).sum();
        let f = beta * dot;
        for (i, vi) in v.iter().enumerate() {
            a[(k + i, j)] -= f * vi;
        }
    }
}

/// Minimizes `|A x - b|_2` column by column of `b`.
pub fn lstsq(a: &Mat, b: &Mat) -> Result<LeastSquares> {
    let (m, n) = a.shape();
    if b.rows() != m {
        return Err(Error::Dimension(format!(
            "right-hand side has {} rows, design matrix has {m}",
            b.rows()
        )));
    }
    if m < n {
        return Err(Error::InvalidParameter(format!(
            "least squares needs at least as many rows as columns ({m} < {n})"
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("least-squares data"));
    }
    let p = b.cols();
    let mut r = a.clone();
    let mut qtb = b.clone();
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        // pivot on the largest remaining column norm
        let col_norm = |r: &Mat, j: usize| (k..m).map(|i| r[(i, j)] * r[(i, j)]).sum::<f64>();
        let pivot = (k..n)
            .max_by(|&i, &j| col_norm(&r, i).total_cmp(&col_norm(&r, j)))
            .unwrap_or(k);
        if pivot != k {
            for i in 0..m {
                let t = r[(i, k)];
                r[(i, k)] = r[(i, pivot)];
                r[(i, pivot)] = t;
            }
            perm.swap(k, pivot);
        }
        let x: Vec<f64> = (k..m).map(|i| r[(i, k)]).collect();
        let (v, beta, alpha) = householder(&x);
        reflect(&mut r, k, &v, beta, k + 1..n);
        reflect(&mut qtb, k, &v, beta, 0..p);
        r[(k, k)] = if beta == 0.0 { x[0] } else { alpha };
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
    }

    let r00 = r[(0, 0)].abs();
    let threshold = RANK_EPS_FACTOR * (m.max(n) as f64) * f64::EPSILON * r00;
    let rank = (0..n).take_while(|&k| r[(k, k)].abs() > threshold).count();

    // solution in pivoted coordinates, y = P^T x
    let mut y = Mat::zeros(n, p);
    if rank == n {
        for c in 0..p {
            for i in (0..n).rev() {
                let mut s = qtb[(i, c)];
                for j in i + 1..n {
                    s -= r[(i, j)] * y[(j, c)];
                }
                y[(i, c)] = s / r[(i, i)];
            }
        }
    } else if rank > 0 {
        // R1 = R[0..rank, 0..n]; factor R1^T = Z T and solve T^T w = c
        let mut z = Mat::zeros(n, rank);
        for i in 0..rank {
            for j in i..n {
                z[(j, i)] = r[(i, j)];
            }
        }
        let mut reflectors = Vec::with_capacity(rank);
        for k in 0..rank {
            let x: Vec<f64> = (k..n).map(|i| z[(i, k)]).collect();
            let (v, beta, alpha) = householder(&x);
            reflect(&mut z, k, &v, beta, k + 1..rank);
            z[(k, k)] = if beta == 0.0 { x[0] } else { alpha };
            for i in k + 1..n {
                z[(i, k)] = 0.0;
            }
            reflectors.push((v, beta));
        }
        for c in 0..p {
            let mut w = vec![0.0; n];
            for i in 0..rank {
                let mut s = qtb[(i, c)];
                for (j, wj) in w.iter().enumerate().take(i) {
                    s -= z[(j, i)] * wj;
                }
                w[i] = s / z[(i, i)];
            }
            // y = H_0 H_1 ... H_{rank-1} [w; 0]
            for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
                let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * w[k + i]).sum();
                for (i, vi) in v.iter().enumerate() {
                    w[k + i] -= beta * dot * vi;
                }
            }
            for (i, wi) in w.into_iter().enumerate() {
                y[(i, c)] = wi;
            }
        }
    }

    let mut x = Mat::zeros(n, p);
    for (k, &orig) in perm.iter().enumerate() {
        for c in 0..p {
            x[(orig, c)] = y[(k, c)];
        }
    }
    let residual = (&(a * &x) - b).norm_fro();
    Ok(LeastSquares {
        x,
        rank,
        rank_deficient: rank < n,
        residual,
    })
}
