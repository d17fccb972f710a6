//! Most probable hidden path given the whole observed series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{HiddenPath, LogSeries, ModelParams};
use crate::tridiag::solve_symmetric;

#[derive(Debug, Clone, Serialize)]
pub struct SmootherResult {
    pub path: HiddenPath,
    /// Boundary coefficient multiplying `e^{λ(t-T)}`; only the continuum
    /// smoother has one.
    pub b_prime: Option<f64>,
    /// Source term the continuum kernel is applied to.
    pub g: Vec<f64>,
}

/// Exact posterior mode of the discrete model, flat prior on `X0(0)`.
///
/// The negative log-posterior is quadratic with a tridiagonal Hessian, so
/// the mode comes from one O(T) solve.
pub fn smooth_path(series: &LogSeries, params: &ModelParams) -> Result<SmootherResult> {
    params.validate()?;
    if params.k == 0.0 {
        return Err(Error::Degenerate(
            "with k = 0 the market price carries no information about the hidden price".into(),
        ));
    }
    let x = series.values();
    let n = x.len();
    let dt = series.dt();
    let kap = params.k * dt;
    let (s, sp, rho) = (params.sigma, params.sigma_prime, params.rho);
    let det = (1.0 - rho * rho) * dt;
    let q00 = 1.0 / (s * s * det);
    let q11 = 1.0 / (sp * sp * det);
    let q01 = -rho / (s * sp * det);
    let m0 = params.hidden_drift() * dt;
    let ito = 0.5 * sp * sp * dt;

    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    let mut rhs = vec![0.0; n];
    for t in 0..n - 1 {
        let d = x[t + 1] - x[t] + kap * x[t] + ito;
        // Residual pair is A·(h_t, h_{t+1}) + (-m0, d) with
        // A = [[-1, 1], [-κ, 0]].
        diag[t] += q00 + 2.0 * kap * q01 + kap * kap * q11;
        off[t] += -q00 - kap * q01;
        diag[t + 1] += q00;
        let qr0 = -q00 * m0 + q01 * d;
        let qr1 = -q01 * m0 + q11 * d;
        rhs[t] -= -qr0 - kap * qr1;
        rhs[t + 1] -= qr0;
    }
    let h = solve_symmetric(&diag, &off, &rhs)?;
    Ok(SmootherResult {
        path: HiddenPath { values: h },
        b_prime: None,
        g: source_term(x, dt, params),
    })
}

/// `g(t)` from the continuum equation of motion, with backward differences
/// and the price held at `X(0)` before the first point.
fn source_term(x: &[f64], dt: f64, params: &ModelParams) -> Vec<f64> {
    let (s, sp, k, rho) = (params.sigma, params.sigma_prime, params.k, params.rho);
    let c1 = (1.0 - rho * sp / s) / k;
    let c2 = rho * sp / (k * k * s);
    let c0 = source_constant(params);
    let mut prev_xd = 0.0;
    (0..x.len())
        .map(|t| {
            let xd = if t == 0 { 0.0 } else { (x[t] - x[t - 1]) / dt };
            let xdd = (xd - prev_xd) / dt;
            prev_xd = xd;
            x[t] + c1 * xd - c2 * xdd + c0
        })
        .collect()
}

fn source_constant(params: &ModelParams) -> f64 {
    let (s, sp, k, rho) = (params.sigma, params.sigma_prime, params.k, params.rho);
    sp * sp / (2.0 * k) + rho * sp / (k * s) * params.hidden_drift()
}

/// Continuum smoother: the source term mirrored about the end and smoothed
/// with the two-sided kernel `c r^|j|`, plus a boundary mode `b' r^(T-t)`
/// fixed by the end condition.
///
/// On the grid `r = 1/(1 + λ dt)` with `λ = kσ/σ'`, the implicit-Euler
/// decay of `X̄0 + X̄0'/λ = g`, and `c` normalizes the kernel to unit mass.
/// The mirror is half-sample, so at the last point the smoothed source is
/// exactly the one-sided moving average of `g`. With backward differences
/// in `g` this makes `X0(T)` independent of `ρ` to round-off.
pub fn smooth_path_continuum(series: &LogSeries, params: &ModelParams) -> Result<SmootherResult> {
    params.validate()?;
    if params.k == 0.0 {
        return Err(Error::Degenerate("continuum smoother needs k > 0".into()));
    }
    let (s, sp, k, rho) = (params.sigma, params.sigma_prime, params.k, params.rho);
    if (1.0 + rho) < 1e-12 {
        return Err(Error::Degenerate("boundary term undefined at rho = -1".into()));
    }
    let x = series.values();
    let n = x.len();
    let dt = series.dt();
    let lam = k * s / sp;
    let r = 1.0 / (1.0 + lam * dt);
    let w = 1.0 - r;

    let g = source_term(x, dt, params);
    // Before the first point the price is held flat, so the source is too.
    let g_past = x[0] + source_constant(params);
    let mut fwd = vec![0.0; n];
    let mut acc = g_past / w;
    for t in 0..n {
        acc = r * acc + g[t];
        fwd[t] = acc;
    }
    // The mirror image of the forward sums, continued into the mirrored past.
    let mut bwd = vec![0.0; n];
    let mut acc = fwd[n - 1];
    for t in (0..n).rev() {
        acc = r * acc + g[t];
        bwd[t] = acc;
    }
    let c = w / (2.0 - w);
    let conv: Vec<f64> = (0..n).map(|t| c * (fwd[t] + bwd[t] - g[t])).collect();

    let x_bar0 = conv[n - 1];
    let xd_end = if n > 1 { (x[n - 1] - x[n - 2]) / dt } else { 0.0 };
    let b_prime = sp / (k * s * (1.0 + rho))
        * (params.hidden_drift() + rho * s / sp * (xd_end + k * (x[n - 1] - x_bar0) + 0.5 * sp * sp));
    let path = (0..n).map(|t| conv[t] + b_prime * r.powi((n - 1 - t) as i32)).collect();
    Ok(SmootherResult {
        path: HiddenPath { values: path },
        b_prime: Some(b_prime),
        g,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;
    use crate::oracle::dense_posterior;
    use approx::assert_abs_diff_eq;

    #[test]
    fn discrete_matches_dense_mode() {
        for rho in [0.0, 0.5, -0.4] {
            let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, rho).unwrap();
            let sim = simulate(&p, 40, 12, 0.0, 0.0).unwrap();
            let fast = smooth_path(&sim.observed, &p).unwrap();
            let dense = dense_posterior(&sim.observed, &p).unwrap();
            for (a, b) in fast.path.values.iter().zip(&dense.mode) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn k_zero_is_degenerate() {
        let p = ModelParams::new(0.05, 0.1, 0.0, 0.002, 0.0).unwrap();
        let sim = simulate(&p, 20, 1, 0.0, 0.0).unwrap();
        assert!(matches!(smooth_path(&sim.observed, &p), Err(Error::Degenerate(_))));
        assert!(matches!(
            smooth_path_continuum(&sim.observed, &p),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn constant_source_passes_through() {
        // Flat X with zero drift: g is constant and so is the interior solution.
        let p = ModelParams::new(0.05, 0.1, 0.1, 0.00125, 0.0).unwrap();
        let s = LogSeries::new(vec![1.0; 1200], 1.0).unwrap();
        let r = smooth_path_continuum(&s, &p).unwrap();
        let c = r.g[0];
        assert!(r.g.iter().all(|&v| (v - c).abs() < 1e-15));
        assert_abs_diff_eq!(r.b_prime.unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.path.values[600], c, epsilon = 1e-12);
        assert_abs_diff_eq!(r.path.values[1199], c, epsilon = 1e-12);
    }

    #[test]
    fn continuum_tracks_discrete_for_slow_reversion() {
        let p = ModelParams::new(0.05, 0.1, 0.02, 0.001, 0.0).unwrap();
        let sim = simulate(&p, 3000, 5, 0.0, 0.0).unwrap();
        let a = smooth_path(&sim.observed, &p).unwrap();
        let b = smooth_path_continuum(&sim.observed, &p).unwrap();
        let rms = (500..2500)
            .map(|t| (a.path.values[t] - b.path.values[t]).powi(2))
            .sum::<f64>()
            / 2000.0;
        let err = (500..2500)
            .map(|t| (a.path.values[t] - sim.hidden.values[t]).powi(2))
            .sum::<f64>()
            / 2000.0;
        assert!(
            rms.sqrt() < 0.3 * err.sqrt(),
            "gap {} vs posterior sd {}",
            rms.sqrt(),
            err.sqrt()
        );
    }

    #[test]
    fn continuum_endpoint_ignores_rho() {
        let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.0).unwrap();
        let sim = simulate(&p, 1500, 8, 0.0, 0.0).unwrap();
        let ends: Vec<f64> = [-0.9, -0.3, 0.0, 0.4, 0.9]
            .iter()
            .map(|&rho| {
                let q = p.with_rho(rho).unwrap();
                *smooth_path_continuum(&sim.observed, &q)
                    .unwrap()
                    .path
                    .values
                    .last()
                    .unwrap()
            })
            .collect();
        for e in &ends {
            assert_abs_diff_eq!(*e, ends[0], epsilon = 1e-10);
        }
    }
}
