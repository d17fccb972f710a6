//! Exact discrete-time likelihood by Kalman filtering the hidden price.
//!
//! The state is `X0[t]`. Observing `X[t+1]` given `X[t]` is a linear function
//! of `X0[t]` plus noise correlated with the state shock, so the predict and
//! update steps carry the cross covariance `ρσσ'dt` explicitly.
//!
//! Two priors on `X0[0]` are supported. `Flat` is improper (unit Lebesgue);
//! the first observation absorbs it exactly and contributes `-log(k dt)`.
//! `Stationary` draws the gap `X0 - X` from its stationary law, which makes
//! the result a proper density of `X[1..]` given `X[0]`, directly comparable
//! with the i.i.d. increments likelihood of geometric Brownian motion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LogSeries, ModelParams};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Clone, Serialize)]
pub struct KalmanResult {
    pub loglik: f64,
    /// `E[X0[t] | X[0..=t]]`; `NaN` where the state is still diffuse.
    pub filtered_mean: Vec<f64>,
    /// Matching variances; infinite where diffuse.
    pub filtered_var: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Prior {
    #[default]
    Flat,
    Stationary,
}

/// Kalman filter with the flat prior.
pub fn kalman_filter(series: &LogSeries, params: &ModelParams) -> Result<KalmanResult> {
    kalman_filter_with(series, params, Prior::Flat)
}

pub fn kalman_filter_with(series: &LogSeries, params: &ModelParams, prior: Prior) -> Result<KalmanResult> {
    params.validate()?;
    let x = series.values();
    let n = x.len();
    let dt = series.dt();
    let (s, sp, rho) = (params.sigma, params.sigma_prime, params.rho);
    let kap = params.k * dt;
    let m0 = params.hidden_drift() * dt;
    let q = s * s * dt;
    let r = sp * sp * dt;
    let c_ = rho * s * sp * dt;
    let ito = 0.5 * r;

    let mut mean = vec![f64::NAN; n];
    let mut var = vec![f64::INFINITY; n];

    if kap == 0.0 {
        // X0 never enters the observations; increments are i.i.d.
        let ll = x
            .windows(2)
            .map(|w| {
                let e = w[1] - w[0] + ito;
                -0.5 * (LN_2PI + r.ln() + e * e / r)
            })
            .sum();
        return Ok(KalmanResult {
            loglik: ll,
            filtered_mean: mean,
            filtered_var: var,
        });
    }

    let (mut m, mut p, mut ll, first) = match prior {
        Prior::Flat => {
            // X[1] pins X0[0] exactly, then X0[1] follows with the conditional
            // variance of the state shock given the observation shock.
            let m = m0 + (x[1] - (1.0 - kap) * x[0] + ito) / kap;
            let p = q - 2.0 * c_ / kap + r / (kap * kap);
            mean[1] = m;
            var[1] = p;
            (m, p, -kap.ln(), 1)
        }
        Prior::Stationary => {
            // Gap Y = X0 - X follows Y' = (1-κ)Y + m0 + ito + noise.
            let gap_mean = (m0 + ito) / kap;
            let gap_var = (q - 2.0 * c_ + r) / (1.0 - (1.0 - kap).powi(2));
            mean[0] = x[0] + gap_mean;
            var[0] = gap_var;
            (mean[0], gap_var, 0.0, 0)
        }
    };

    for t in first..n - 1 {
        let y_pred = (1.0 - kap) * x[t] + kap * m - ito;
        let f = kap * kap * p + r;
        let cov = kap * p + c_;
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Numeric(format!("innovation variance {f} at step {t}")));
        }
        let e = x[t + 1] - y_pred;
        ll -= 0.5 * (LN_2PI + f.ln() + e * e / f);
        m += m0 + cov / f * e;
        p += q - cov * cov / f;
        if !(p > 0.0) {
            return Err(Error::Numeric(format!("state variance {p} at step {t}")));
        }
        mean[t + 1] = m;
        var[t + 1] = p;
    }
    if !ll.is_finite() {
        return Err(Error::Numeric("non-finite Kalman log-likelihood".into()));
    }
    Ok(KalmanResult {
        loglik: ll,
        filtered_mean: mean,
        filtered_var: var,
    })
}

pub fn kalman_log_likelihood(series: &LogSeries, params: &ModelParams) -> Result<f64> {
    Ok(kalman_filter(series, params)?.loglik)
}

/// Proper log density of `X[1..]` given `X[0]` (stationary prior).
pub fn exact_log_likelihood(series: &LogSeries, params: &ModelParams) -> Result<f64> {
    Ok(kalman_filter_with(series, params, Prior::Stationary)?.loglik)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn k_zero_is_iid_increments() {
        let p = ModelParams::new(0.05, 0.1, 0.0, 0.0, 0.3).unwrap();
        let s = LogSeries::new(vec![0.0, 0.1, -0.05, 0.02], 1.0).unwrap();
        let ll = kalman_log_likelihood(&s, &p).unwrap();
        let r: f64 = 0.01;
        let expect: f64 = [0.1f64, -0.15, 0.07]
            .iter()
            .map(|d| -0.5 * (LN_2PI + r.ln() + (d + 0.005).powi(2) / r))
            .sum();
        assert_abs_diff_eq!(ll, expect, epsilon = 1e-12);
    }

    #[test]
    fn tracks_the_hidden_path() {
        let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.0).unwrap();
        let sim = simulate(&p, 2000, 3, 0.0, 0.0).unwrap();
        let kf = kalman_filter(&sim.observed, &p).unwrap();
        let err: f64 = (100..2000)
            .map(|t| (kf.filtered_mean[t] - sim.hidden.values[t]).powi(2) / kf.filtered_var[t])
            .sum::<f64>()
            / 1900.0;
        // Standardized errors should have unit variance.
        assert!((err - 1.0).abs() < 0.15, "standardized mse {err}");
    }

    #[test]
    fn stationary_prior_nests_random_walk() {
        // σ = σ', tiny k: increments are i.i.d. N((a - σ²/2)dt, σ²dt).
        let s = LogSeries::new(vec![0.0, 0.012, -0.003, 0.02, 0.011, 0.03], 1.0).unwrap();
        let (sig, a) = (0.01, 0.002);
        let p = ModelParams::new(sig, sig, 1e-7, a, 0.0).unwrap();
        let ll = exact_log_likelihood(&s, &p).unwrap();
        let mu = a - 0.5 * sig * sig;
        let expect: f64 = s
            .increments()
            .iter()
            .map(|d| -0.5 * (LN_2PI + (sig * sig).ln() + (d - mu).powi(2) / (sig * sig)))
            .sum();
        assert_abs_diff_eq!(ll, expect, epsilon = 1e-4);
    }

    #[test]
    fn stationary_prior_is_a_density() {
        // Integrate the one-increment density numerically.
        let p = ModelParams::new(0.05, 0.1, 0.3, 0.002, 0.4).unwrap();
        let h = 1e-3;
        let total: f64 = (-2000..2000)
            .map(|i| {
                let s = LogSeries::new(vec![0.0, i as f64 * h], 1.0).unwrap();
                exact_log_likelihood(&s, &p).unwrap().exp() * h
            })
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn variance_converges() {
        let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.5).unwrap();
        let sim = simulate(&p, 300, 4, 0.0, 0.0).unwrap();
        let kf = kalman_filter(&sim.observed, &p).unwrap();
        let v = &kf.filtered_var;
        assert!((v[299] - v[298]).abs() < 1e-12 * v[299]);
    }
}
