//! Model parameters, observed series and the exact Euler simulator.
//!
//! The reasonable log price `X0` is a Brownian motion with drift `a - σ²/2`;
//! the market log price `X` relaxes toward it at rate `k` with its own noise
//! `σ'`, the two shocks having correlation `ρ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies the random stream used by [`simulate`]. Bumped whenever the
/// mapping from seed to path changes.
pub const RNG_ALGORITHM: &str = "chacha8/v1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sigma: f64,
    pub sigma_prime: f64,
    pub k: f64,
    pub a: f64,
    pub rho: f64,
    #[serde(default = "unit_dt")]
    pub dt: f64,
}

fn unit_dt() -> f64 {
    1.0
}

impl ModelParams {
    /// Builds a validated parameter set with `dt = 1`.
    pub fn new(sigma: f64, sigma_prime: f64, k: f64, a: f64, rho: f64) -> Result<Self> {
        let p = ModelParams {
            sigma,
            sigma_prime,
            k,
            a,
            rho,
            dt: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    pub fn with_k(mut self, k: f64) -> Result<Self> {
        self.k = k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma, self.sigma_prime, self.k, self.a, self.rho, self.dt];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain(format!("non-finite parameter in {self:?}")));
        }
        if self.sigma <= 0.0 {
            return Err(Error::ParameterDomain(format!("sigma must be > 0, got {}", self.sigma)));
        }
        if self.sigma_prime <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "sigma_prime must be > 0, got {}",
                self.sigma_prime
            )));
        }
        if self.k < 0.0 {
            return Err(Error::ParameterDomain(format!("k must be >= 0, got {}", self.k)));
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::ParameterDomain(format!("|rho| must be < 1, got {}", self.rho)));
        }
        if self.dt <= 0.0 {
            return Err(Error::ParameterDomain(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.k * self.dt >= 1.0 {
            return Err(Error::ParameterDomain(format!(
                "k*dt must be < 1 for a non-oscillating discretization, got {}",
                self.k * self.dt
            )));
        }
        Ok(())
    }

    /// Per-step reversion fraction `k·dt`.
    pub fn kappa(&self) -> f64 {
        self.k * self.dt
    }

    /// Drift of the reasonable log price per unit time, `a - σ²/2`.
    pub fn hidden_drift(&self) -> f64 {
        self.a - 0.5 * self.sigma * self.sigma
    }

    /// Long-run drift of the Ito-shifted market log price, `a - σ²/2 + σ'²/2`.
    pub fn shifted_drift(&self) -> f64 {
        self.hidden_drift() + 0.5 * self.sigma_prime * self.sigma_prime
    }

    /// Stationary offset of `X` below `X0` in the absence of drift, `σ'²/2k`.
    pub fn ito_offset(&self) -> f64 {
        0.5 * self.sigma_prime * self.sigma_prime / self.k
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.sigma, self.sigma_prime, self.k, self.a, self.rho]
    }
}

/// How continuum formulas are mapped onto a sampled series.
///
/// `Discrete` evaluates spectral densities and filter gains of the sampled
/// (Euler) process exactly at `ρ = 0`; `Continuum` uses the continuous-time
/// expressions verbatim, which is only accurate for `k·dt ≪ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Discrete,
    Continuum,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discrete" => Ok(Scheme::Discrete),
            "continuum" => Ok(Scheme::Continuum),
            other => Err(Error::Usage(format!("unknown scheme '{other}' (discrete|continuum)"))),
        }
    }
}

/// Observed log prices on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSeries {
    values: Vec<f64>,
    dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl LogSeries {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Size {
                needed: 2,
                got: values.len(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::ParameterDomain(format!("dt must be > 0, got {dt}")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data_at(i, "non-finite log price"));
        }
        Ok(LogSeries {
            values,
            dt,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.values.len() {
            return Err(Error::data(format!(
                "{} labels for {} values",
                labels.len(),
                self.values.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Contiguous sub-series `[start, end)`, keeping labels.
    pub fn slice(&self, start: usize, end: usize) -> Result<LogSeries> {
        if end > self.values.len() || start >= end {
            return Err(Error::Usage(format!(
                "slice {start}..{end} out of range for length {}",
                self.values.len()
            )));
        }
        let mut s = LogSeries::new(self.values[start..end].to_vec(), self.dt)?;
        if let Some(l) = &self.labels {
            s.labels = Some(l[start..end].to_vec());
        }
        Ok(s)
    }

    pub fn require_len(&self, needed: usize) -> Result<()> {
        if self.values.len() < needed {
            return Err(Error::Size {
                needed,
                got: self.values.len(),
            });
        }
        Ok(())
    }

    /// Stable 64-bit FNV-1a hash of the values and step, used to check that
    /// two fits were run on the same data.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let bits = std::iter::once(self.dt.to_bits()).chain(self.values.iter().map(|v| v.to_bits()));
        for b in bits {
            for byte in b.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenPath {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub observed: LogSeries,
    pub hidden: HiddenPath,
    pub params: ModelParams,
    pub seed: Option<u64>,
    pub rng: String,
}

/// Runs the Euler recursion from explicit independent standard-normal pairs.
///
/// Each pair `(u, w)` is turned into correlated shocks `z = u`,
/// `z' = ρu + sqrt(1-ρ²)w`. The output has `shocks.len() + 1` points.
pub fn simulate_with_shocks(
    params: &ModelParams,
    x_init: f64,
    x0_init: f64,
    shocks: &[(f64, f64)],
) -> Result<SimulationOutput> {
    params.validate()?;
    if !x_init.is_finite() || !x0_init.is_finite() {
        return Err(Error::ParameterDomain("initial values must be finite".into()));
    }
    let dt = params.dt;
    let sq = dt.sqrt();
    let drift0 = params.hidden_drift() * dt;
    let ito = 0.5 * params.sigma_prime * params.sigma_prime * dt;
    let rho_c = (1.0 - params.rho * params.rho).sqrt();

    let mut x = Vec::with_capacity(shocks.len() + 1);
    let mut x0 = Vec::with_capacity(shocks.len() + 1);
    x.push(x_init);
    x0.push(x0_init);
    for &(u, w) in shocks {
        let zp = params.rho * u + rho_c * w;
        let (xt, x0t) = (*x.last().unwrap(), *x0.last().unwrap());
        x0.push(x0t + drift0 + params.sigma * sq * u);
        x.push(xt - params.k * (xt - x0t) * dt - ito + params.sigma_prime * sq * zp);
    }
    Ok(SimulationOutput {
        observed: LogSeries::new(x, dt)?,
        hidden: HiddenPath { values: x0 },
        params: *params,
        seed: None,
        rng: RNG_ALGORITHM.to_string(),
    })
}

/// Simulates `n_points` observations (so `n_points - 1` Euler steps) from a
/// seeded ChaCha8 stream.
pub fn simulate(
    params: &ModelParams,
    n_points: usize,
    seed: u64,
    x_init: f64,
    x0_init: f64,
) -> Result<SimulationOutput> {
    if n_points < 2 {
        return Err(Error::Size {
            needed: 2,
            got: n_points,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shocks: Vec<(f64, f64)> = (0..n_points - 1)
        .map(|_| {
            let u: f64 = StandardNormal.sample(&mut rng);
            let w: f64 = StandardNormal.sample(&mut rng);
            (u, w)
        })
        .collect();
    let mut out = simulate_with_shocks(params, x_init, x0_init, &shocks)?;
    out.seed = Some(seed);
    Ok(out)
}
