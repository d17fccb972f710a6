//! Maximum-likelihood fit of the hidden model on the spectral likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::gbm::fit_gbm;
use crate::estimation::optimizer::{nelder_mead, Minimum, NelderMeadOptions};
use crate::likelihood::kalman::exact_log_likelihood;
use crate::likelihood::spectral::{LikelihoodOptions, SpectralLikelihood};
use crate::model::{LogSeries, ModelParams, Scheme};

/// Shortest series a fit is attempted on.
pub const MIN_FIT_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum RhoMode {
    Fixed(f64),
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub include_zero_mode: bool,
    pub rho: RhoMode,
    pub scheme: Scheme,
    /// Replaces the two default starting points when set.
    pub initial: Option<ModelParams>,
    /// Evaluation budget of a single simplex run.
    pub max_evals: usize,
    /// Convergence tolerance on the log-likelihood.
    pub tolerance: f64,
    /// Simplex restarts from the incumbent after the first run.
    pub restarts: usize,
    pub std_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions::new(false)
    }
}

impl FitOptions {
    /// Zero-mode on frees `ρ` (it only enters through that term);
    /// zero-mode off fixes it at 0.
    pub fn new(include_zero_mode: bool) -> Self {
        FitOptions {
            include_zero_mode,
            rho: if include_zero_mode {
                RhoMode::Free
            } else {
                RhoMode::Fixed(0.0)
            },
            scheme: Scheme::Discrete,
            initial: None,
            max_evals: 4000,
            tolerance: 1e-8,
            restarts: 3,
            std_errors: true,
        }
    }

    pub fn with_rho(mut self, rho: RhoMode) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn without_std_errors(mut self) -> Self {
        self.std_errors = false;
        self
    }

    fn likelihood(&self) -> LikelihoodOptions {
        LikelihoodOptions {
            include_zero_mode: self.include_zero_mode,
            scheme: self.scheme,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Hidden,
    Gbm,
}

/// Half-widths of the interval where the log-likelihood stays within 1/2
/// of its maximum; absent when the likelihood never drops that far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    pub sigma: Option<f64>,
    pub sigma_prime: Option<f64>,
    pub k: Option<f64>,
    pub a: Option<f64>,
    pub rho: Option<f64>,
}

impl ParamErrors {
    pub fn as_array(&self) -> [Option<f64>; 5] {
        [self.sigma, self.sigma_prime, self.k, self.a, self.rho]
    }

    fn set(&mut self, i: usize, v: Option<f64>) {
        match i {
            0 => self.sigma = v,
            1 => self.sigma_prime = v,
            2 => self.k = v,
            3 => self.a = v,
            _ => self.rho = v,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// Exact log density of the increments at `params`; used for AIC.
    pub loglik: f64,
    /// Maximized value of the fitting objective (the spectral likelihood
    /// for the hidden model). Standard errors are read off this surface.
    pub objective: f64,
    pub std_errors: ParamErrors,
    pub n_evals: usize,
    pub converged: bool,
    /// Parameters counted in the AIC.
    pub n_free: usize,
    pub aic: f64,
    pub n_obs: usize,
    /// Fingerprint of the series the fit was run on.
    pub fingerprint: u64,
    pub include_zero_mode: bool,
    pub scheme: Scheme,
}

/// `aic(model) - aic(baseline)`; negative favors `model`. Both `loglik`
/// values are densities of the same increments, so the difference is
/// meaningful across model kinds.
pub fn aic_compare(model: &FitResult, baseline: &FitResult) -> Result<f64> {
    if model.fingerprint != baseline.fingerprint || model.n_obs != baseline.n_obs {
        return Err(Error::Usage("AIC comparison needs both fits on the same series".into()));
    }
    Ok(model.aic - baseline.aic)
}

/// Unconstrained coordinates: `ln σ, ln σ', ln k, a` and `atanh ρ` when free.
struct Coords {
    rho: RhoMode,
    dt: f64,
}

impl Coords {
    fn to_params(&self, th: &[f64]) -> Option<ModelParams> {
        let rho = match self.rho {
            RhoMode::Fixed(r) => r,
            RhoMode::Free => th[4].tanh(),
        };
        ModelParams::new(th[0].exp(), th[1].exp(), th[2].exp(), th[3], rho)
            .and_then(|p| p.with_dt(self.dt))
            .ok()
    }

    fn to_coords(&self, p: &ModelParams) -> Vec<f64> {
        let mut th = vec![p.sigma.ln(), p.sigma_prime.ln(), p.k.max(1e-12).ln(), p.a];
        if self.rho == RhoMode::Free {
            th.push(p.rho.clamp(-0.99, 0.99).atanh());
        }
        th
    }
}

pub fn fit(series: &LogSeries, options: &FitOptions) -> Result<FitResult> {
    series.require_len(MIN_FIT_POINTS)?;
    if let RhoMode::Fixed(r) = options.rho {
        if !(r.abs() < 1.0) {
            return Err(Error::ParameterDomain(format!(
                "fixed rho must satisfy |rho| < 1, got {r}"
            )));
        }
    }
    let sl = SpectralLikelihood::new(series)?;
    let lopts = options.likelihood();
    let dt = series.dt();
    let span = (series.len() - 1) as f64 * dt;
    // Without the zero mode the objective does not depend on ρ, so a freed
    // ρ stays where it starts instead of drifting along a flat direction.
    let searched_rho = match (options.rho, options.include_zero_mode) {
        (RhoMode::Free, false) => RhoMode::Fixed(options.initial.map_or(0.0, |p| p.rho)),
        (r, _) => r,
    };
    let coords = Coords { rho: searched_rho, dt };
    let objective = |th: &[f64]| match coords.to_params(th) {
        Some(p) => sl.log_likelihood(&p, lopts).map(|v| -v).unwrap_or(f64::INFINITY),
        None => f64::INFINITY,
    };

    let gbm = fit_gbm(series)?;
    let s_hat = gbm.params.sigma;
    let starts: Vec<ModelParams> = match options.initial {
        Some(p) => vec![p.with_dt(dt)?],
        None => {
            let k0 = (10.0 / span).min(0.5 / dt);
            let rho0 = match searched_rho {
                RhoMode::Fixed(r) => r,
                RhoMode::Free => 0.0,
            };
            [0.7, 1.4]
                .iter()
                .map(|f| ModelParams::new(f * s_hat, s_hat, k0, gbm.params.a, rho0)?.with_dt(dt))
                .collect::<Result<_>>()?
        }
    };
    let mut steps = vec![0.3, 0.1, 0.5, s_hat / span.sqrt()];
    if searched_rho == RhoMode::Free {
        steps.push(0.3);
    }
    let nm = NelderMeadOptions {
        max_evals: options.max_evals,
        f_tol: options.tolerance,
        x_tol: 1e-7,
    };

    let mut best: Option<Minimum> = None;
    let mut total_evals = 0;
    for start in &starts {
        let mut m = nelder_mead(objective, &coords.to_coords(start), &steps, nm);
        total_evals += m.evals;
        for _ in 0..options.restarts {
            let again = nelder_mead(objective, &m.x, &steps, nm);
            total_evals += again.evals;
            let gain = m.f - again.f;
            if again.f <= m.f {
                m = again;
            }
            if gain.abs() < options.tolerance {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    if !best.f.is_finite() {
        return Err(Error::Numeric("no finite likelihood found from any start".into()));
    }
    let params = coords
        .to_params(&best.x)
        .ok_or_else(|| Error::Numeric("optimizer left the parameter domain".into()))?;
    let objective = -best.f;
    let loglik = exact_log_likelihood(series, &params)?;

    let std_errors = if options.std_errors {
        slice_errors(&sl, lopts, &params, objective, searched_rho == RhoMode::Free, span)
    } else {
        ParamErrors::default()
    };
    let n_free = if options.rho == RhoMode::Free { 5 } else { 4 };
    Ok(FitResult {
        kind: ModelKind::Hidden,
        params,
        loglik,
        objective,
        std_errors,
        n_evals: total_evals,
        converged: best.converged,
        n_free,
        aic: 2.0 * n_free as f64 - 2.0 * loglik,
        n_obs: series.len(),
        fingerprint: series.fingerprint(),
        include_zero_mode: options.include_zero_mode,
        scheme: options.scheme,
    })
}

/// For each free parameter, moves along its own axis from the optimum until
/// the log-likelihood has fallen by 1/2 on each side, and reports the mean
/// of the two distances.
fn slice_errors(
    sl: &SpectralLikelihood,
    lopts: LikelihoodOptions,
    best: &ModelParams,
    loglik: f64,
    rho_free: bool,
    span: f64,
) -> ParamErrors {
    let mut out = ParamErrors::default();
    let base = best.as_array();
    let scales = [
        best.sigma,
        best.sigma_prime,
        best.k.max(1e-6),
        best.a.abs().max(best.sigma / span.sqrt()),
        0.1,
    ];
    let n = if rho_free { 5 } else { 4 };
    for i in 0..n {
        let drop_at = |delta: f64| -> Option<f64> {
            let mut v = base;
            v[i] += delta;
            let p = ModelParams::new(v[0], v[1], v[2], v[3], v[4])
                .and_then(|p| p.with_dt(best.dt))
                .ok()?;
            let ll = sl.log_likelihood(&p, lopts).ok()?;
            Some(loglik - ll)
        };
        let sides: Vec<f64> = [1.0, -1.0]
            .iter()
            .filter_map(|&dir| half_width(|d| drop_at(dir * d), scales[i]))
            .collect();
        if !sides.is_empty() {
            out.set(i, Some(sides.iter().sum::<f64>() / sides.len() as f64));
        }
    }
    out
}

fn half_width(drop: impl Fn(f64) -> Option<f64>, scale: f64) -> Option<f64> {
    let mut lo = 0.0;
    let mut hi = 1e-3 * scale;
    let mut found = false;
    for _ in 0..80 {
        match drop(hi) {
            Some(d) if d >= 0.5 => {
                found = true;
                break;
            }
            Some(_) => {
                lo = hi;
                hi *= 2.0;
            }
            None => return None,
        }
    }
    if !found {
        return None;
    }
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        match drop(mid) {
            Some(d) if d >= 0.5 => hi = mid,
            Some(_) => lo = mid,
            None => return None,
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::simulate;

    fn reference_params() -> ModelParams {
        ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.5).unwrap()
    }

    #[test]
    fn recovers_parameters_on_long_series() {
        let sim = simulate(&reference_params(), 5000, 77, 0.0, 0.0).unwrap();
        let r = fit(&sim.observed, &FitOptions::default()).unwrap();
        assert!(r.converged);
        assert!((r.params.sigma_prime - 0.1).abs() < 0.01, "{:?}", r.params);
        assert!((r.params.k - 0.2).abs() < 0.08, "{:?}", r.params);
        assert!((r.params.sigma - 0.05).abs() < 0.015, "{:?}", r.params);
        assert_eq!(r.params.rho, 0.0);
        let se = r.std_errors;
        assert!(se.sigma.is_some() && se.sigma_prime.is_some() && se.k.is_some() && se.a.is_some());
        assert!(se.rho.is_none());
    }

    #[test]
    fn zero_mode_fit_frees_rho() {
        let sim = simulate(&reference_params(), 500, 3, 0.0, 0.0).unwrap();
        let r = fit(&sim.observed, &FitOptions::new(true)).unwrap();
        assert_eq!(r.n_free, 5);
        assert!(r.params.rho.abs() < 1.0);
    }

    #[test]
    fn beats_gbm_on_model_data() {
        let sim = simulate(&reference_params(), 1000, 5, 0.0, 0.0).unwrap();
        let r = fit(&sim.observed, &FitOptions::default()).unwrap();
        let g = fit_gbm(&sim.observed).unwrap();
        assert!(aic_compare(&r, &g).unwrap() < -5.0);
    }

    #[test]
    fn aic_compare_checks_series() {
        let a = simulate(&reference_params(), 100, 1, 0.0, 0.0).unwrap();
        let b = simulate(&reference_params(), 100, 2, 0.0, 0.0).unwrap();
        let ga = fit_gbm(&a.observed).unwrap();
        let gb = fit_gbm(&b.observed).unwrap();
        assert!(matches!(aic_compare(&ga, &gb), Err(Error::Usage(_))));
    }

    #[test]
    fn short_series_rejected() {
        let sim = simulate(&reference_params(), 15, 1, 0.0, 0.0).unwrap();
        assert!(matches!(
            fit(&sim.observed, &FitOptions::default()),
            Err(Error::Size { needed: 16, .. })
        ));
    }

    #[test]
    fn rho_free_without_zero_mode_is_flat() {
        let sim = simulate(&reference_params(), 300, 4, 0.0, 0.0).unwrap();
        let opts = FitOptions::new(false).with_rho(RhoMode::Free);
        let r = fit(&sim.observed, &opts).unwrap();
        assert!(r.std_errors.rho.is_none());
        assert_eq!(r.params.rho, 0.0);
        assert_eq!(r.n_free, 5);
    }
}
