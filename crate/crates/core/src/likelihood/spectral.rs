//! Fourier-domain likelihood of the market log price.
//!
//! The series is Ito-shifted (`X' = X + σ'²t/2`), its endpoint-to-endpoint
//! drift `v` is removed, and the residual over the `M = T-1` increments is
//! one period of a discrete Fourier series. Each positive frequency then
//! contributes independently, with the hidden price integrated out in closed
//! form. The residual does not depend on `σ'`, so the FFT runs once per
//! series and every likelihood evaluation is O(T) arithmetic.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LogSeries, ModelParams, Scheme};

/// Smallest series the spectral likelihood accepts.
pub const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodOptions {
    pub include_zero_mode: bool,
    pub scheme: Scheme,
}

impl Default for LikelihoodOptions {
    fn default() -> Self {
        LikelihoodOptions {
            include_zero_mode: false,
            scheme: Scheme::Discrete,
        }
    }
}

impl LikelihoodOptions {
    pub fn zero_mode(include_zero_mode: bool) -> Self {
        LikelihoodOptions {
            include_zero_mode,
            ..Default::default()
        }
    }
}

/// Log-likelihood with its parts.
#[derive(Debug, Clone, Serialize)]
pub struct LogLikelihood {
    pub value: f64,
    /// Contribution of modes `n = 1..=N`, `N = ⌊(M-1)/2⌋`.
    pub per_mode: Vec<f64>,
    /// Contribution of the Nyquist mode when `M` is even, else 0.
    pub nyquist: f64,
    pub drift_term: f64,
    pub zero_mode: f64,
}

/// Ito-shifted series split into drift plus Fourier coefficients.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Drift of the shifted series per unit time.
    pub v: f64,
    /// `X(0)`, equal to `X'(0)`.
    pub offset: f64,
    /// Coefficients `𝒳_n` for `n = 1..=N` with the `1/M` normalization.
    pub coeffs: Vec<Complex64>,
    /// Real coefficient at `n = M/2` when `M` is even.
    pub nyquist: Option<f64>,
    /// Mean of the residual, `𝒳_0`.
    pub mean: f64,
    pub sigma_prime: f64,
    pub n_increments: usize,
    pub dt: f64,
}

impl SpectralDecomposition {
    /// Angular frequencies `2πn/(M dt)` matching `coeffs`.
    pub fn omegas(&self) -> Vec<f64> {
        let span = self.n_increments as f64 * self.dt;
        (1..=self.coeffs.len()).map(|n| 2.0 * PI * n as f64 / span).collect()
    }

    /// Rebuilds the original log prices from the decomposition.
    pub fn reconstruct(&self) -> Vec<f64> {
        let m = self.n_increments;
        let mut out = Vec::with_capacity(m + 1);
        let slope = self.v - 0.5 * self.sigma_prime * self.sigma_prime;
        for t in 0..=m {
            let mut r = self.mean;
            for (j, c) in self.coeffs.iter().enumerate() {
                let ang = 2.0 * PI * ((j + 1) * t) as f64 / m as f64;
                r += 2.0 * (c.re * ang.cos() - c.im * ang.sin());
            }
            if let Some(c) = self.nyquist {
                r += if t % 2 == 0 { c } else { -c };
            }
            out.push(self.offset + slope * t as f64 * self.dt + r);
        }
        out
    }
}

pub fn spectral_decompose(series: &LogSeries, sigma_prime: f64) -> Result<SpectralDecomposition> {
    if !(sigma_prime > 0.0) {
        return Err(Error::ParameterDomain(format!(
            "sigma_prime must be > 0, got {sigma_prime}"
        )));
    }
    let sp = SpectralLikelihood::new(series)?;
    Ok(SpectralDecomposition {
        v: sp.v_raw + 0.5 * sigma_prime * sigma_prime,
        offset: series.values()[0],
        coeffs: sp.coeffs.clone(),
        nyquist: sp.nyquist,
        mean: sp.mean,
        sigma_prime,
        n_increments: sp.m,
        dt: sp.dt,
    })
}

/// Parameter values and frequencies the per-mode formulas are evaluated at.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    pub sigma: f64,
    pub sigma_prime: f64,
    pub k: f64,
    pub rho: f64,
    /// Frequencies for `n = 1..=N`.
    pub omegas: Vec<f64>,
    /// Nyquist frequency when `M` is even.
    pub omega_nyquist: Option<f64>,
}

/// Precomputed spectrum of one series; evaluate at any parameters.
#[derive(Debug, Clone)]
pub struct SpectralLikelihood {
    m: usize,
    dt: f64,
    v_raw: f64,
    mean: f64,
    coeffs: Vec<Complex64>,
    power: Vec<f64>,
    nyquist: Option<f64>,
    /// `sin(λ_n/2)` for `n = 1..=N`.
    half_sin: Vec<f64>,
    /// `log(M |e^{iλ_n} - 1|²)`.
    jacobian: Vec<f64>,
}

impl SpectralLikelihood {
    pub fn new(series: &LogSeries) -> Result<Self> {
        series.require_len(MIN_POINTS)?;
        let x = series.values();
        let dt = series.dt();
        let m = x.len() - 1;
        let v_raw = (x[m] - x[0]) / (m as f64 * dt);
        let mut buf: Vec<Complex64> = (0..m)
            .map(|t| Complex64::new(x[t] - x[0] - v_raw * t as f64 * dt, 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let norm = 1.0 / m as f64;
        let big_n = (m - 1) / 2;
        let coeffs: Vec<Complex64> = buf[1..=big_n].iter().map(|c| c * norm).collect();
        let nyquist = m.is_multiple_of(2).then(|| buf[m / 2].re * norm);
        let half_sin: Vec<f64> = (1..=big_n).map(|n| (PI * n as f64 / m as f64).sin()).collect();
        let jacobian = half_sin.iter().map(|s| (m as f64 * 4.0 * s * s).ln()).collect();
        Ok(SpectralLikelihood {
            m,
            dt,
            v_raw,
            mean: buf[0].re * norm,
            power: coeffs.iter().map(|c| c.norm_sqr()).collect(),
            coeffs,
            nyquist,
            half_sin,
            jacobian,
        })
    }

    pub fn n_increments(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Maps model parameters to the frequencies and parameter values used in
    /// the per-mode formulas.
    pub fn effective(&self, params: &ModelParams, scheme: Scheme) -> Result<EffectiveModel> {
        self.check(params)?;
        let span = self.m as f64 * self.dt;
        Ok(match scheme {
            Scheme::Discrete => {
                let root_phi = (1.0 - params.k * self.dt).sqrt();
                EffectiveModel {
                    sigma: params.sigma,
                    sigma_prime: params.sigma_prime / root_phi,
                    k: params.k / root_phi,
                    rho: params.rho,
                    omegas: self.half_sin.iter().map(|s| 2.0 * s / self.dt).collect(),
                    omega_nyquist: self.nyquist.map(|_| 2.0 / self.dt),
                }
            }
            Scheme::Continuum => EffectiveModel {
                sigma: params.sigma,
                sigma_prime: params.sigma_prime,
                k: params.k,
                rho: params.rho,
                omegas: (1..=self.coeffs.len()).map(|n| 2.0 * PI * n as f64 / span).collect(),
                omega_nyquist: self.nyquist.map(|_| PI / self.dt),
            },
        })
    }

    fn check(&self, params: &ModelParams) -> Result<()> {
        params.validate()?;
        if (params.dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::Usage(format!(
                "parameter dt {} does not match series dt {}",
                params.dt, self.dt
            )));
        }
        Ok(())
    }

    /// Full evaluation with per-mode breakdown.
    pub fn evaluate(&self, params: &ModelParams, opts: LikelihoodOptions) -> Result<LogLikelihood> {
        let eff = self.effective(params, opts.scheme)?;
        let span = self.m as f64 * self.dt;
        let (se2, sp2, k2) = (eff.sigma.powi(2), eff.sigma_prime.powi(2), eff.k.powi(2));
        let density = |w2: f64| (sp2 * w2 + se2 * k2) / (w2 + k2);

        let per_mode: Vec<f64> = eff
            .omegas
            .iter()
            .zip(&self.power)
            .zip(&self.jacobian)
            .map(|((&w, &pw), &jac)| {
                let w2 = w * w;
                let s = density(w2);
                (span * w2 / (2.0 * PI * s)).ln() - span * pw * w2 / s - jac
            })
            .collect();

        let nyquist = match (self.nyquist, eff.omega_nyquist) {
            (Some(c), Some(w)) => {
                let w2 = w * w;
                let s = density(w2);
                let jac = (self.m as f64 * 4.0).ln();
                0.5 * ((span * w2 / (2.0 * PI * s)).ln() - jac) - 0.5 * span * c * c * w2 / s
            }
            _ => 0.0,
        };

        let d = self.v_raw + 0.5 * params.sigma_prime.powi(2) - params.shifted_drift();
        let (drift_term, zero_mode) = if opts.include_zero_mode {
            let z = self.zero_mode_solve(&eff, d, span)?;
            (z.drift, z.value)
        } else {
            (-d * d * span / (2.0 * params.sigma * params.sigma), 0.0)
        };

        let value = per_mode.iter().sum::<f64>() + nyquist + drift_term + zero_mode;
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite spectral log-likelihood at {params:?}"
            )));
        }
        Ok(LogLikelihood {
            value,
            per_mode,
            nyquist,
            drift_term,
            zero_mode,
        })
    }

    pub fn log_likelihood(&self, params: &ModelParams, opts: LikelihoodOptions) -> Result<f64> {
        Ok(self.evaluate(params, opts)?.value)
    }

    /// Most probable Fourier coefficients `𝒳0_n` of the hidden price for
    /// `n = 1..=N`, given the observed coefficients.
    pub fn hidden_coefficients(&self, params: &ModelParams, opts: LikelihoodOptions) -> Result<Vec<Complex64>> {
        let eff = self.effective(params, opts.scheme)?;
        let mut y: Vec<Complex64> = self
            .coeffs
            .iter()
            .zip(&eff.omegas)
            .map(|(x, &w)| stationary_ratio(&eff, w) * x)
            .collect();
        if opts.include_zero_mode {
            let span = self.m as f64 * self.dt;
            let d = self.v_raw + 0.5 * params.sigma_prime.powi(2) - params.shifted_drift();
            let z = self.zero_mode_solve(&eff, d, span)?;
            for (yn, &w) in y.iter_mut().zip(&eff.omegas) {
                let g = coupling(&eff, w);
                *yn += z.shift * g.conj() / (span * mode_precision(&eff, w));
            }
        }
        Ok(y)
    }

    /// Profiles out the drift of the hidden price, its mean level and the
    /// gap between `v` and `b`, which couple to every finite mode through
    /// the linear trend in the residual.
    fn zero_mode_solve(&self, eff: &EffectiveModel, d: f64, span: f64) -> Result<ZeroMode> {
        let (s, sp, k, rho) = (eff.sigma, eff.sigma_prime, eff.k, eff.rho);
        let one_m = 1.0 - rho * rho;
        let mut l0 = 0.0;
        let mut gy = 0.0;
        let mut ssum = 0.0;
        for (x, &w) in self.coeffs.iter().zip(&eff.omegas) {
            let inv_d = Complex64::new(0.0, -1.0 / w);
            l0 += (x * (1.0 + k * inv_d)).re;
            let g = coupling(eff, w);
            gy += (g * stationary_ratio(eff, w) * x).re;
            ssum += 2.0 * g.norm_sqr() / (span * mode_precision(eff, w));
        }
        let l_star = 2.0 * s * l0 + 2.0 * gy;

        let c = 1.0 / (2.0 * one_m * s * s * sp * sp);
        let p = sp * sp * span * one_m;
        let q = s * s * k * k * span.powi(3) / 12.0;
        let kk = k * span * s;
        let drift = -c * p * q / (p + q) * d * d;
        let a = -2.0 * c * p * d * kk / (p + q);
        let b = c * kk * kk / (p + q);
        let denom = 1.0 - 2.0 * b * ssum;
        if !(denom > 0.0) {
            return Err(Error::Numeric(format!(
                "zero-mode coupling not negative definite (1 - 2BS = {denom:e})"
            )));
        }
        let l = (l_star + a * ssum) / denom;
        let shift = a + 2.0 * b * l;
        Ok(ZeroMode {
            drift,
            value: a * l + b * l * l - shift * shift * ssum / 2.0,
            shift,
        })
    }
}

struct ZeroMode {
    drift: f64,
    value: f64,
    shift: f64,
}

/// `𝒳0_n / 𝒳_n` at the per-mode optimum.
fn stationary_ratio(eff: &EffectiveModel, w: f64) -> Complex64 {
    let (s, sp, k, rho) = (eff.sigma, eff.sigma_prime, eff.k, eff.rho);
    let den = sp * sp * w * w + s * s * k * k;
    Complex64::new(s * s * k * k + rho * s * sp * w * w, w * k * (s * s - rho * s * sp)) / den
}

fn coupling(eff: &EffectiveModel, w: f64) -> Complex64 {
    Complex64::new(-eff.rho * eff.sigma_prime, eff.sigma * eff.k / w)
}

fn mode_precision(eff: &EffectiveModel, w: f64) -> f64 {
    let (s, sp, k, rho) = (eff.sigma, eff.sigma_prime, eff.k, eff.rho);
    (sp * sp * w * w + s * s * k * k) / ((1.0 - rho * rho) * s * s * sp * sp)
}

/// Convenience wrapper using the default discrete scheme.
pub fn spectral_log_likelihood(
    series: &LogSeries,
    params: &ModelParams,
    include_zero_mode: bool,
) -> Result<LogLikelihood> {
    SpectralLikelihood::new(series)?.evaluate(params, LikelihoodOptions::zero_mode(include_zero_mode))
}
