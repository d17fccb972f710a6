//! Monte-Carlo parameter recovery: simulate, refit, summarize.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::fit::{fit, FitOptions, FitResult};
use crate::model::{simulate, ModelParams};

pub const PARAM_NAMES: [&str; 5] = ["sigma", "sigma_prime", "k", "a", "rho"];

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryRow {
    pub parameter: String,
    pub truth: f64,
    /// Mean estimate across runs.
    pub ave: f64,
    /// Sample standard deviation of the estimates.
    pub std1: Option<f64>,
    /// Mean of the per-run likelihood-slice standard errors.
    pub std2: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryTable {
    pub rows: Vec<RecoveryRow>,
    pub fits: Vec<FitResult>,
    pub seeds: Vec<u64>,
    /// Seeds whose fit returned an error.
    pub failed: Vec<u64>,
    pub n_points: usize,
    pub options: FitOptions,
}

impl RecoveryTable {
    pub fn row(&self, name: &str) -> Option<&RecoveryRow> {
        self.rows.iter().find(|r| r.parameter == name)
    }
}

/// Fits `n_series` independent simulations (seeds `seed, seed+1, ...`,
/// started at `X = X0 = 0`) in parallel. Output order follows the seeds,
/// so the table is identical for any thread count.
pub fn monte_carlo_recovery(
    truth: &ModelParams,
    n_series: usize,
    n_points: usize,
    seed: u64,
    options: &FitOptions,
) -> Result<RecoveryTable> {
    truth.validate()?;
    if n_series == 0 {
        return Err(Error::Size { needed: 1, got: 0 });
    }
    let seeds: Vec<u64> = (0..n_series as u64).map(|i| seed.wrapping_add(i)).collect();
    let outcomes: Vec<(u64, Result<FitResult>)> = seeds
        .par_iter()
        .map(|&s| {
            let r = simulate(truth, n_points, s, 0.0, 0.0).and_then(|sim| fit(&sim.observed, options));
            (s, r)
        })
        .collect();

    let mut fits = Vec::new();
    let mut failed = Vec::new();
    for (s, r) in outcomes {
        match r {
            Ok(f) => fits.push(f),
            Err(Error::Size { needed, got }) => return Err(Error::Size { needed, got }),
            Err(_) => failed.push(s),
        }
    }
    if fits.is_empty() {
        return Err(Error::Numeric("every recovery fit failed".into()));
    }

    let truth_arr = truth.as_array();
    let rows = (0..5)
        .map(|i| {
            let est: Vec<f64> = fits.iter().map(|f| f.params.as_array()[i]).collect();
            let ses: Vec<f64> = fits.iter().filter_map(|f| f.std_errors.as_array()[i]).collect();
            let n = est.len() as f64;
            let ave = est.iter().sum::<f64>() / n;
            let std1 = (est.len() > 1).then(|| (est.iter().map(|v| (v - ave).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
            let std2 = (!ses.is_empty()).then(|| ses.iter().sum::<f64>() / ses.len() as f64);
            RecoveryRow {
                parameter: PARAM_NAMES[i].to_string(),
                truth: truth_arr[i],
                ave,
                std1,
                std2,
            }
        })
        .collect();
    Ok(RecoveryTable {
        rows,
        fits,
        seeds,
        failed,
        n_points,
        options: *options,
    })
}
