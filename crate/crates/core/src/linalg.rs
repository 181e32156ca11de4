//! Small dense helpers.

use crate::error::{Error, Result};

/// Solve a tridiagonal system with partial pivoting.
///
/// `sub[i]` is entry (i+1, i), `sup[i]` is entry (i, i+1).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // band storage: row i holds columns i, i+1, i+2 after elimination
    let mut d = diag.to_vec();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { sup[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0; n];
    let mut l: Vec<f64> = (0..n).map(|i| if i + 1 < n { sub[i] } else { 0.0 }).collect();
    let mut b = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        if l[i].abs() > d[i].abs() {
            // swap rows i and i+1
            let (di, u1i, u2i, bi) = (d[i], u1[i], u2[i], b[i]);
            d[i] = l[i];
            u1[i] = d[i + 1];
            u2[i] = u1[i + 1];
            b[i] = b[i + 1];
            l[i] = di;
            d[i + 1] = u1i;
            u1[i + 1] = u2i;
            b[i + 1] = bi;
        }
        if d[i] == 0.0 {
            return Err(Error::Domain("singular tridiagonal system".into()));
        }
        let f = l[i] / d[i];
        d[i + 1] -= f * u1[i];
        if i + 2 < n {
            u1[i + 1] -= f * u2[i];
        }
        b[i + 1] -= f * b[i];
    }
    if d[n - 1] == 0.0 {
        return Err(Error::Domain("singular tridiagonal system".into()));
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Ok(x)
}
