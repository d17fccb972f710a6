//! Risk premium: the expected drift of the market price given its past.
//!
//! `μ_X(t) = k(1-q)(EMA(t) - X(t)) + (a - σ²/2)/q`, where `q` is the ratio of
//! the averaging weight to `k dt`. With `σ > σ'` (`q > 1`) the premium follows
//! the trend; with `σ < σ'` it bets on reversion to the average.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inference::filter::{burn_in, FilterState};
use crate::model::{LogSeries, ModelParams, Scheme};

#[derive(Debug, Clone, Serialize)]
pub struct PremiumSeries {
    /// Premium per unit time at each index.
    pub mu: Vec<f64>,
    /// Lagged moving average of prices used by `mu`.
    pub ema_x: Vec<f64>,
    /// Filtered hidden-price estimate at each index.
    pub endpoint: Vec<f64>,
    /// Leading points still dominated by initialization.
    pub burn_in: usize,
    pub scheme: Scheme,
}

impl PremiumSeries {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    /// Restricts to indices `[start, end)`; burn-in is recounted from `start`.
    pub fn slice(&self, start: usize, end: usize) -> PremiumSeries {
        PremiumSeries {
            mu: self.mu[start..end].to_vec(),
            ema_x: self.ema_x[start..end].to_vec(),
            endpoint: self.endpoint[start..end].to_vec(),
            burn_in: self.burn_in.saturating_sub(start),
            scheme: self.scheme,
        }
    }
}

pub fn risk_premium(series: &LogSeries, params: &ModelParams) -> Result<PremiumSeries> {
    risk_premium_with(series, params, Scheme::Discrete)
}

/// Computes the premium in its moving-average form and checks it against
/// the endpoint form `k(X0 - X) - σ'²/2` at every step.
pub fn risk_premium_with(series: &LogSeries, params: &ModelParams, scheme: Scheme) -> Result<PremiumSeries> {
    let params = params.with_dt(series.dt())?;
    let x = series.values();
    let mut st = FilterState::new(&params, scheme, x[0])?;
    let mut mu = Vec::with_capacity(x.len());
    let mut ema_x = Vec::with_capacity(x.len());
    let mut endpoint = Vec::with_capacity(x.len());
    for (t, &price) in x.iter().enumerate() {
        if t > 0 {
            st.update(price);
        }
        let (m, alt) = (st.premium(), st.premium_from_endpoint());
        let tol = 1e-9 * (1.0 + params.k * price.abs());
        if (m - alt).abs() > tol {
            return Err(Error::Numeric(format!(
                "premium forms disagree at index {t}: {m} vs {alt}"
            )));
        }
        mu.push(m);
        ema_x.push(st.ema_price);
        endpoint.push(st.x0_endpoint);
    }
    Ok(PremiumSeries {
        mu,
        ema_x,
        endpoint,
        burn_in: burn_in(&params).min(x.len()),
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;
    use approx::assert_abs_diff_eq;

    #[test]
    fn regimes_have_opposite_signs() {
        let x = LogSeries::new(vec![0.0, 0.0, 0.0, 0.0, 0.1], 1.0).unwrap();
        // EMA below the latest price.
        let trend = ModelParams::new(0.1, 0.05, 0.2, 0.005, 0.0).unwrap();
        let revert = ModelParams::new(0.05, 0.1, 0.2, 0.00125, 0.0).unwrap();
        let pt = risk_premium_with(&x, &trend, Scheme::Continuum).unwrap();
        let pr = risk_premium_with(&x, &revert, Scheme::Continuum).unwrap();
        assert!(pt.mu[4] > trend.hidden_drift() / 2.0);
        assert!(pr.mu[4] < 0.0);
    }

    #[test]
    fn equal_sigmas_give_constant_premium() {
        let p = ModelParams::new(0.08, 0.08, 0.1, 0.004, 0.0).unwrap();
        let sim = simulate(&p, 100, 3, 0.0, 0.0).unwrap();
        let pr = risk_premium_with(&sim.observed, &p, Scheme::Continuum).unwrap();
        for m in pr.mu {
            assert_abs_diff_eq!(m, p.hidden_drift(), epsilon = 1e-15);
        }
    }

    #[test]
    fn burn_in_length() {
        let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.0).unwrap();
        let sim = simulate(&p, 200, 3, 0.0, 0.0).unwrap();
        assert_eq!(risk_premium(&sim.observed, &p).unwrap().burn_in, 30);
    }
}
