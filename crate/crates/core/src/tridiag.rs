//! Symmetric tridiagonal solves (Thomas algorithm).

use crate::error::{Error, Result};

/// Solves `H x = rhs` for symmetric tridiagonal `H` with diagonal `diag` and
/// off-diagonal `off` (`off[i] = H[i][i+1]`).
///
/// Fails when a pivot is not strictly positive, which for the posterior
/// precision matrices built in this crate means the system is singular.
pub fn solve_symmetric(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if rhs.len() != n || off.len() + 1 != n.max(1) {
        return Err(Error::Numeric(format!(
            "tridiagonal shape mismatch: diag {n}, off {}, rhs {}",
            off.len(),
            rhs.len()
        )));
    }
    let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let sub = if i > 0 { off[i - 1] } else { 0.0 };
        let piv = diag[i] - if i > 0 { sub * c[i - 1] } else { 0.0 };
        if !(piv > scale * 1e-13) {
            return Err(Error::Degenerate(format!(
                "tridiagonal system is singular at row {i} (pivot {piv:e})"
            )));
        }
        c[i] = if i + 1 < n { off[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - if i > 0 { sub * d[i - 1] } else { 0.0 }) / piv;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn solves_known_system() {
        // [[2,-1,0],[-1,2,-1],[0,-1,2]] x = [1,0,1] -> x = [1,1,1]
        let x = solve_symmetric(&[2.0, 2.0, 2.0], &[-1.0, -1.0], &[1.0, 0.0, 1.0]).unwrap();
        for v in x {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn singular_is_reported() {
        let r = solve_symmetric(&[1.0, 1.0], &[-1.0], &[0.0, 0.0]);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }
}
