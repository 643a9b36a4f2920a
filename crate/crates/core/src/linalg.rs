//! Small dense linear algebra for the regression engines.
//!
//! Least squares goes through a Householder QR factorization rather than
//! explicit normal equations: forward-premium regressors live on a ~1e-3
//! scale next to a unit intercept, and squaring that conditioning away is
//! exactly what we want to avoid. Symmetric eigenvalue work (PSD repair of
//! truncated-kernel covariance estimates) uses a cyclic Jacobi sweep, which
//! is plenty for the (p+1)x(p+1) matrices that show up here.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// Output of [`qr_lstsq`]: coefficients, residuals, and the inverse Gram
/// matrix (X'X)^{-1} recovered from the R factor.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coef: Array1<f64>,
    pub residuals: Array1<f64>,
    pub xtx_inv: Array2<f64>,
}

/// Solve min ||y - X b||_2 by Householder QR.
///
/// `x` is n x m with n >= m. Returns an error if the factorization exposes
/// a numerically rank-deficient column.
pub fn qr_lstsq(x: &Array2<f64>, y: ArrayView1<f64>) -> Result<LeastSquares> {
    let (n, m) = x.dim();
    assert_eq!(n, y.len(), "design/response length mismatch");
    assert!(n >= m, "underdetermined system");

    let mut a = x.clone();
    let mut qty = y.to_owned();

    // Column norms of the original matrix set the rank-detection scale.
    let col_scale = (0..m)
        .map(|j| a.column(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);

    for k in 0..m {
        let norm = {
            let mut s = 0.0;
            for i in k..n {
                s += a[[i, k]] * a[[i, k]];
            }
            s.sqrt()
        };
        if norm <= col_scale * 1e-13 {
            return Err(Error::RankDeficient { pivot: k, cols: m });
        }
        let beta = if a[[k, k]] >= 0.0 { -norm } else { norm };
        let mut v = Array1::<f64>::zeros(n - k);
        v[0] = a[[k, k]] - beta;
        for i in (k + 1)..n {
            v[i - k] = a[[i, k]];
        }
        let vtv: f64 = v.iter().map(|e| e * e).sum();
        if vtv > 0.0 {
            for j in k..m {
                let mut dot = 0.0;
                for i in k..n {
                    dot += v[i - k] * a[[i, j]];
                }
                let w = 2.0 * dot / vtv;
                for i in k..n {
                    a[[i, j]] -= w * v[i - k];
                }
            }
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * qty[i];
            }
            let w = 2.0 * dot / vtv;
            for i in k..n {
                qty[i] -= w * v[i - k];
            }
        }
        a[[k, k]] = beta;
        if beta.abs() <= col_scale * 1e-13 {
            return Err(Error::RankDeficient { pivot: k, cols: m });
        }
    }

    // Back-substitute R b = (Q'y)[..m].
    let mut coef = Array1::<f64>::zeros(m);
    for k in (0..m).rev() {
        let mut s = qty[k];
        for j in (k + 1)..m {
            s -= a[[k, j]] * coef[j];
        }
        coef[k] = s / a[[k, k]];
    }

    let fitted = x.dot(&coef);
    let residuals = &y.to_owned() - &fitted;

    // (X'X)^{-1} = R^{-1} R^{-T}.
    let rinv = invert_upper_triangular(&a, m);
    let mut xtx_inv = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for l in j..m {
                s += rinv[[i, l]] * rinv[[j, l]];
            }
            xtx_inv[[i, j]] = s;
            xtx_inv[[j, i]] = s;
        }
    }

    Ok(LeastSquares {
        coef,
        residuals,
        xtx_inv,
    })
}

fn invert_upper_triangular(r: &Array2<f64>, m: usize) -> Array2<f64> {
    let mut inv = Array2::<f64>::zeros((m, m));
    for j in (0..m).rev() {
        inv[[j, j]] = 1.0 / r[[j, j]];
        for i in (0..j).rev() {
            let mut s = 0.0;
            for l in (i + 1)..=j {
                s += r[[i, l]] * inv[[l, j]];
            }
            inv[[i, j]] = -s / r[[i, i]];
        }
    }
    inv
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with columns of the second matrix
/// holding the eigenvectors, so `a = V diag(l) V'`.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let mut m = a.clone();
    let mut v = Array2::<f64>::eye(n);

    let off = |m: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[[i, j]] * m[[i, j]];
                }
            }
        }
        s
    };
    let scale: f64 = (0..n).map(|i| a[[i, i]].abs()).sum::<f64>().max(1e-300);

    for _sweep in 0..64 {
        if off(&m) <= 1e-28 * scale * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[[i, p]];
                    let miq = m[[i, q]];
                    m[[i, p]] = c * mip - s * miq;
                    m[[i, q]] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[[p, j]];
                    let mqj = m[[q, j]];
                    m[[p, j]] = c * mpj - s * mqj;
                    m[[q, j]] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[[i, p]];
                    let viq = v[[i, q]];
                    v[[i, p]] = c * vip - s * viq;
                    v[[i, q]] = s * vip + c * viq;
                }
            }
        }
    }

    let eigs = Array1::from_iter((0..n).map(|i| m[[i, i]]));
    (eigs, v)
}

/// Floor negative eigenvalues of a symmetric matrix at zero.
///
/// Returns the repaired matrix and whether a repair was actually needed
/// (minimum eigenvalue below `-1e-12 * trace`).
pub fn psd_floor(a: &Array2<f64>) -> (Array2<f64>, bool) {
    let (eigs, v) = jacobi_eigen(a);
    let trace: f64 = eigs.iter().sum::<f64>().abs().max(1e-300);
    let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    if min >= -1e-12 * trace {
        return (a.clone(), false);
    }
    let n = a.nrows();
    let mut out = Array2::<f64>::zeros((n, n));
    for l in 0..n {
        let lam = eigs[l].max(0.0);
        if lam == 0.0 {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] += lam * v[[i, l]] * v[[j, l]];
            }
        }
    }
    // Keep exact symmetry.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (out[[i, j]] + out[[j, i]]);
            out[[i, j]] = m;
            out[[j, i]] = m;
        }
    }
    (out, true)
}
