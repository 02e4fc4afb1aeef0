//! Dense symmetric positive-definite solves for the tiny (d <= 3) Gram matrices.

use crate::error::{Error, Result};

/// Row-major square matrix stored in a fixed 3x3 block; only the leading `n x n` part is used.
pub type Mat3 = [[f64; 3]; 3];

/// Cholesky factorisation `G = L L^T` of the leading `n x n` block.
///
/// Fails when a pivot drops below `1e-12 * trace(G)`.
pub fn cholesky(g: &Mat3, n: usize) -> Result<Mat3> {
    let trace: f64 = (0..n).map(|i| g[i][i]).sum();
    if !(trace > 0.0) || !trace.is_finite() {
        return Err(Error::Numerical(format!("gram trace {trace} is not positive")));
    }
    let floor = 1e-12 * trace;
    let mut l = [[0.0; 3]; 3];
    for i in 0..n {
        for j in 0..=i {
            let mut s = g[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s < floor {
                    return Err(Error::Numerical(format!(
                        "gram not positive definite: pivot {s:e} < {floor:e}"
                    )));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &Mat3, n: usize, b: &[f64; 3]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; 3];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

pub fn spd_solve(g: &Mat3, n: usize, b: &[f64; 3]) -> Result<[f64; 3]> {
    let l = cholesky(g, n)?;
    Ok(cholesky_solve(&l, n, b))
}

pub fn determinant(g: &Mat3, n: usize) -> f64 {
    match n {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
        _ => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
        }
    }
}

pub fn dot(a: &[f64; 3], b: &[f64; 3], n: usize) -> f64 {
    (0..n).map(|i| a[i] * b[i]).sum()
}
