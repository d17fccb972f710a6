//! Geometric Brownian motion baseline, fitted in closed form.

use crate::error::{Error, Result};
use crate::estimation::fit::{FitResult, ModelKind, ParamErrors};
use crate::model::{LogSeries, ModelParams, Scheme};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Maximum-likelihood GBM fit: i.i.d. normal log increments.
///
/// Reported as the `σ = σ'`, `k = 0` corner of the hidden model, with
/// `a` the drift of the price itself (`mean increment / dt + σ²/2`).
pub fn fit_gbm(series: &LogSeries) -> Result<FitResult> {
    series.require_len(3)?;
    let inc = series.increments();
    let n = inc.len() as f64;
    let dt = series.dt();
    let mean = inc.iter().sum::<f64>() / n;
    let var = inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::Degenerate("log increments have zero variance".into()));
    }
    let sigma = (var / dt).sqrt();
    let a = mean / dt + 0.5 * sigma * sigma;
    let loglik = -0.5 * n * (LN_2PI + var.ln() + 1.0);
    let params = ModelParams::new(sigma, sigma, 0.0, a, 0.0)?.with_dt(dt)?;
    Ok(FitResult {
        kind: ModelKind::Gbm,
        params,
        loglik,
        objective: loglik,
        std_errors: ParamErrors {
            sigma: Some(sigma / (2.0 * n).sqrt()),
            sigma_prime: None,
            k: None,
            a: Some(sigma / (n * dt).sqrt()),
            rho: None,
        },
        n_evals: 0,
        converged: true,
        n_free: 2,
        aic: 2.0 * 2.0 - 2.0 * loglik,
        n_obs: series.len(),
        fingerprint: series.fingerprint(),
        include_zero_mode: false,
        scheme: Scheme::Discrete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_point_increments() {
        let s = LogSeries::new(vec![0.0, 0.01, 0.0, 0.02], 1.0).unwrap();
        let g = fit_gbm(&s).unwrap();
        let mean: f64 = 0.02 / 3.0;
        let var = ((0.01 - mean).powi(2) + (-0.01 - mean).powi(2) + (0.02 - mean).powi(2)) / 3.0;
        assert_abs_diff_eq!(g.params.sigma, var.sqrt(), epsilon = 1e-15);
        assert_eq!(g.n_free, 2);
    }

    #[test]
    fn loglik_is_normal_density_sum() {
        let s = LogSeries::new(vec![0.0, 0.013, -0.004, 0.021, 0.017, 0.03], 1.0).unwrap();
        let g = fit_gbm(&s).unwrap();
        let inc = s.increments();
        let m = inc.iter().sum::<f64>() / 5.0;
        let sd = g.params.sigma;
        let direct: f64 = inc
            .iter()
            .map(|d| -0.5 * LN_2PI - sd.ln() - 0.5 * ((d - m) / sd).powi(2))
            .sum();
        assert_abs_diff_eq!(g.loglik, direct, epsilon = 1e-12);
    }

    #[test]
    fn flat_series_is_degenerate() {
        let s = LogSeries::new(vec![1.0; 10], 1.0).unwrap();
        assert!(matches!(fit_gbm(&s), Err(Error::Degenerate(_))));
    }
}
