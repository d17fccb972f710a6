//! Causal estimate of the hidden price at the latest observation.
//!
//! The estimate is an exponential moving average of
//! `h(t) = X + Ẋ/k + σ'²/2k + const`, which needs only past data and does
//! not depend on `ρ`. Each new price completes the forward difference for
//! the previous step, so `h` enters the average one step late.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{LogSeries, ModelParams, Scheme};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FilterState {
    /// Current estimate of `X0` at the latest observation.
    pub x0_endpoint: f64,
    /// Moving average of past prices, lagged one step, same weight.
    pub ema_price: f64,
    /// Last completed `h` value.
    pub h_last: f64,
    pub last_price: f64,
    /// Per-step averaging weight.
    pub weight: f64,
    pub n_obs: usize,
    pub scheme: Scheme,
    params: ModelParams,
    constant: f64,
}

/// Per-step weight of the moving average.
///
/// `Continuum` uses `kσdt/σ'`; `Discrete` uses `kdt` times the steady-state
/// Kalman gain of the sampled model at `ρ = 0`.
pub fn ema_weight(params: &ModelParams, scheme: Scheme) -> Result<f64> {
    params.validate()?;
    if params.k == 0.0 {
        return Err(Error::Degenerate("the filter needs k > 0".into()));
    }
    let kap = params.k * params.dt;
    let w = match scheme {
        Scheme::Continuum => kap * params.sigma / params.sigma_prime,
        Scheme::Discrete => {
            let q = params.sigma.powi(2) * params.dt;
            let r = params.sigma_prime.powi(2) * params.dt;
            let k2 = kap * kap;
            let p = (q * k2 + (q * q * k2 * k2 + 4.0 * k2 * q * r).sqrt()) / (2.0 * k2);
            k2 * p / (k2 * p + r)
        }
    };
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::ParameterDomain(format!(
            "moving-average weight {w} outside (0, 1); reduce k*dt*sigma/sigma_prime"
        )));
    }
    Ok(w)
}

impl FilterState {
    pub fn new(params: &ModelParams, scheme: Scheme, first_price: f64) -> Result<Self> {
        let w = ema_weight(params, scheme)?;
        let constant = params.ito_offset() + params.hidden_drift() * params.dt / w;
        Ok(FilterState {
            x0_endpoint: first_price + constant,
            ema_price: first_price,
            h_last: f64::NAN,
            last_price: first_price,
            weight: w,
            n_obs: 1,
            scheme,
            params: *params,
            constant,
        })
    }

    pub fn update(&mut self, price: f64) {
        let kap = self.params.k * self.params.dt;
        let h = self.last_price + (price - self.last_price) / kap + self.constant;
        let w = self.weight;
        self.x0_endpoint = (1.0 - w) * self.x0_endpoint + w * h;
        self.ema_price = (1.0 - w) * self.ema_price + w * self.last_price;
        self.h_last = h;
        self.last_price = price;
        self.n_obs += 1;
    }

    /// Ratio of the averaging weight to `k dt`; equals `σ/σ'` in the
    /// continuum scheme.
    pub fn weight_ratio(&self) -> f64 {
        self.weight / (self.params.k * self.params.dt)
    }

    /// Expected drift of `X` per unit time at the latest observation.
    pub fn premium(&self) -> f64 {
        let q = self.weight_ratio();
        self.params.k * (1.0 - q) * (self.ema_price - self.last_price) + self.params.hidden_drift() / q
    }

    /// Same quantity from the endpoint estimate, `k(X0 - X) - σ'²/2`.
    pub fn premium_from_endpoint(&self) -> f64 {
        self.params.k * (self.x0_endpoint - self.last_price) - 0.5 * self.params.sigma_prime.powi(2)
    }
}

pub fn filter_endpoint(series: &LogSeries, params: &ModelParams) -> Result<FilterState> {
    filter_endpoint_with(series, params, Scheme::Discrete)
}

pub fn filter_endpoint_with(series: &LogSeries, params: &ModelParams, scheme: Scheme) -> Result<FilterState> {
    let x = series.values();
    let mut st = FilterState::new(&params.with_dt(series.dt())?, scheme, x[0])?;
    for &p in &x[1..] {
        st.update(p);
    }
    Ok(st)
}

/// Endpoint estimate after each observation.
pub fn filter_track(series: &LogSeries, params: &ModelParams, scheme: Scheme) -> Result<Vec<f64>> {
    let x = series.values();
    let mut st = FilterState::new(&params.with_dt(series.dt())?, scheme, x[0])?;
    let mut out = Vec::with_capacity(x.len());
    out.push(st.x0_endpoint);
    for &p in &x[1..] {
        st.update(p);
        out.push(st.x0_endpoint);
    }
    Ok(out)
}

/// Number of leading points still dominated by the initialization,
/// `ceil(3σ'/(kσ dt))`.
pub fn burn_in(params: &ModelParams) -> usize {
    (3.0 * params.sigma_prime / (params.k * params.sigma * params.dt)).ceil() as usize
}
