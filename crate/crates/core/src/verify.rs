//! Self-checks of the numerical core against exact oracles, closed forms
//! and Monte-Carlo behaviour of the model.
//!
//! Each group returns named [`CheckResult`]s carrying the measured value
//! and the tolerance it was held to. Groups tagged with a criterion number
//! mirror the acceptance list in the README.

use std::fmt;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{aic_compare, fit, fit_gbm, monte_carlo_recovery, FitOptions, RecoveryTable, RhoMode};
use crate::inference::{filter_track, risk_premium, smooth_path, smooth_path_continuum, FilterState};
use crate::io::{ingest_csv, IngestOptions};
use crate::likelihood::{kalman_filter, kalman_log_likelihood, LikelihoodOptions, SpectralLikelihood};
use crate::model::{simulate, LogSeries, ModelParams, Scheme};
use crate::oracle::dense_posterior;
use crate::strategy::{backtest, regress_returns, sign_test_p_value};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub criterion: Option<u8>,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    /// Wall-clock time of the group the check belongs to. Kept out of the
    /// JSON report so reports stay byte-identical across runs.
    #[serde(skip)]
    pub seconds: f64,
}

impl CheckResult {
    fn new(name: &str, criterion: Option<u8>, passed: bool, measured: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            name: name.to_string(),
            criterion,
            passed,
            measured,
            tolerance,
            detail,
            seconds: 0.0,
        }
    }

    /// Passes when `measured <= tolerance`.
    fn at_most(name: &str, criterion: Option<u8>, measured: f64, tolerance: f64, detail: String) -> Self {
        Self::new(name, criterion, measured <= tolerance, measured, tolerance, detail)
    }

    fn failed(name: &str, criterion: Option<u8>, err: &Error) -> Self {
        Self::new(name, criterion, false, f64::NAN, f64::NAN, format!("error: {err}"))
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.criterion {
            Some(c) => format!("[#{c}] "),
            None => String::new(),
        };
        write!(
            f,
            "{} {tag}{}: measured {:.6e}, tolerance {:.6e}; {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Negative control: flips the sign of the spectral likelihood wherever
    /// the suite compares it with an oracle.
    pub corrupt_likelihood: bool,
    /// Include the Monte-Carlo parameter recovery (the slowest group).
    pub recovery: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 20150701,
            corrupt_likelihood: false,
            recovery: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub n_passed: usize,
    pub n_failed: usize,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn from_checks(options: VerifyOptions, checks: Vec<CheckResult>) -> Self {
        let n_failed = checks.iter().filter(|c| !c.passed).count();
        VerifyReport {
            options,
            n_passed: checks.len() - n_failed,
            n_failed,
            passed: n_failed == 0,
            checks,
        }
    }

    pub fn failed_names(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Reference values of the recovery table at truth (0.05, 0.1, 0.2, 0.002, 0.5),
/// 20 series of 500 points, in the order σ, σ', k, a, ρ.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceTable {
    pub ave: [f64; 5],
    pub std1: [f64; 5],
    pub std2: [f64; 5],
}

pub const REFERENCE_ZERO_MODE_ON: ReferenceTable = ReferenceTable {
    ave: [0.0457, 0.0965, 0.1919, 0.0016, 0.2827],
    std1: [0.0144, 0.0079, 0.0864, 0.0027, 0.4967],
    std2: [0.005, 0.0019, 0.0158, 0.0022, 0.0238],
};

pub const REFERENCE_ZERO_MODE_OFF: ReferenceTable = ReferenceTable {
    ave: [0.0434, 0.0967, 0.1879, 0.0015, 0.0241],
    std1: [0.0103, 0.0046, 0.0569, 0.0026, 0.0319],
    std2: [0.0041, 0.0039, 0.0122, 0.0022, 0.0272],
};

pub fn recovery_truth() -> ModelParams {
    ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.5).expect("valid parameters")
}

/// Runs every group that needs no external data.
pub fn run_suite(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    checks.extend(oracle_equivalence(opts));
    checks.extend(dense_oracle(opts));
    checks.extend(rho_invariance(opts));
    if opts.recovery {
        checks.extend(parameter_recovery(opts));
    }
    checks.extend(gbm_reduction(opts));
    checks.extend(regression_calibration(opts));
    checks.extend(strategy_improvement(opts));
    checks.extend(internal_consistency(opts));
    VerifyReport::from_checks(*opts, checks)
}

fn timed(f: impl FnOnce() -> Vec<CheckResult>) -> Vec<CheckResult> {
    let t0 = Instant::now();
    let mut out = f();
    let s = t0.elapsed().as_secs_f64();
    for c in &mut out {
        c.seconds = s;
    }
    out
}

fn spectral(sl: &SpectralLikelihood, p: &ModelParams, lopts: LikelihoodOptions, opts: &VerifyOptions) -> Result<f64> {
    let v = sl.log_likelihood(p, lopts)?;
    Ok(if opts.corrupt_likelihood { -v } else { v })
}

fn stdev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Criterion 1: spectral against Kalman per observation on 50 random
/// parameter draws, T = 512, ρ = 0. The full spectral likelihood (zero
/// mode on) is held to the tolerance; the gap without the zero mode is
/// reported alongside.
pub fn oracle_equivalence(opts: &VerifyOptions) -> Vec<CheckResult> {
    const NAME: &str = "spectral_vs_kalman";
    timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let draws: Vec<(ModelParams, u64)> = (0..50)
            .map(|i| {
                let p = ModelParams::new(
                    rng.random_range(0.03..0.08),
                    rng.random_range(0.06..0.15),
                    rng.random_range(0.02..0.2),
                    rng.random_range(0.0..0.004),
                    0.0,
                )
                .expect("valid draw");
                (p, opts.seed.wrapping_add(1000 + i))
            })
            .collect();
        let gaps: Result<Vec<(f64, f64)>> = draws
            .par_iter()
            .map(|(p, s)| {
                let sim = simulate(p, 512, *s, 0.0, 0.0)?;
                let sl = SpectralLikelihood::new(&sim.observed)?;
                let full = spectral(&sl, p, LikelihoodOptions::zero_mode(true), opts)?;
                let partial = spectral(&sl, p, LikelihoodOptions::zero_mode(false), opts)?;
                let lk = kalman_log_likelihood(&sim.observed, p)?;
                Ok(((full - lk).abs() / 512.0, (partial - lk).abs() / 512.0))
            })
            .collect();
        match gaps {
            Ok(g) => {
                let worst = g.iter().map(|v| v.0).fold(0.0, f64::max);
                let mean = g.iter().map(|v| v.0).sum::<f64>() / g.len() as f64;
                let worst_off = g.iter().map(|v| v.1).fold(0.0, f64::max);
                vec![CheckResult::at_most(
                    NAME,
                    Some(1),
                    worst,
                    0.01,
                    format!("max |dlogL|/T over 50 series, zero mode on (mean {mean:.2e}; zero mode off max {worst_off:.2e})"),
                )]
            }
            Err(e) => vec![CheckResult::failed(NAME, Some(1), &e)],
        }
    })
}

/// Criterion 2: T = 16 against the dense joint-Gaussian marginal.
pub fn dense_oracle(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let p = recovery_truth().with_rho(0.0).expect("valid rho");
        let mut spec_gap: f64 = 0.0;
        let mut kal_gap: f64 = 0.0;
        for i in 0..20 {
            let r = (|| -> Result<(f64, f64)> {
                let sim = simulate(&p, 16, opts.seed.wrapping_add(2000 + i), 0.0, 0.0)?;
                let dense = dense_posterior(&sim.observed, &p)?.log_marginal;
                let sl = SpectralLikelihood::new(&sim.observed)?;
                let ls = spectral(&sl, &p, LikelihoodOptions::zero_mode(true), opts)?;
                let lk = kalman_log_likelihood(&sim.observed, &p)?;
                Ok(((ls - dense).abs(), (lk - dense).abs()))
            })();
            match r {
                Ok((a, b)) => {
                    spec_gap = spec_gap.max(a);
                    kal_gap = kal_gap.max(b);
                }
                Err(e) => {
                    return vec![
                        CheckResult::failed("spectral_vs_dense", Some(2), &e),
                        CheckResult::failed("kalman_vs_dense", Some(2), &e),
                    ]
                }
            }
        }
        vec![
            CheckResult::at_most(
                "spectral_vs_dense",
                Some(2),
                spec_gap,
                2.0,
                "max |dlogL| over 20 series, T=16, zero mode on".into(),
            ),
            CheckResult::at_most(
                "kalman_vs_dense",
                Some(2),
                kal_gap,
                1e-8,
                "max |dlogL| over 20 series, T=16".into(),
            ),
        ]
    })
}

/// Criterion 3: the smoothed endpoint hardly moves with ρ, and the
/// spectral likelihood without the zero mode does not move at all.
pub fn rho_invariance(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let base = ModelParams::new(0.05, 0.1, 0.02, 0.002, 0.0).expect("valid parameters");
        let rhos = [-0.5, 0.0, 0.5];
        let mut worst_ratio: f64 = 0.0;
        let mut bitwise = true;
        for i in 0..20 {
            let r = (|| -> Result<(f64, bool)> {
                let sim = simulate(&base.with_rho(0.5)?, 500, opts.seed.wrapping_add(3000 + i), 0.0, 0.0)?;
                let x = sim.observed.values();
                let mut ends = Vec::new();
                let sl = SpectralLikelihood::new(&sim.observed)?;
                let mut lls = Vec::new();
                for &rho in &rhos {
                    let p = base.with_rho(rho)?;
                    let sm = smooth_path_continuum(&sim.observed, &p)?;
                    ends.push(*sm.path.values.last().expect("non-empty"));
                    lls.push(sl.log_likelihood(&p, LikelihoodOptions::zero_mode(false))?);
                }
                let spread =
                    ends.iter().cloned().fold(f64::MIN, f64::max) - ends.iter().cloned().fold(f64::MAX, f64::min);
                let bound = 5.0 * base.k * base.dt * stdev(x);
                let same = lls.iter().all(|v| v.to_bits() == lls[0].to_bits());
                Ok((spread / bound, same))
            })();
            match r {
                Ok((ratio, same)) => {
                    worst_ratio = worst_ratio.max(ratio);
                    bitwise &= same;
                }
                Err(e) => {
                    return vec![
                        CheckResult::failed("endpoint_rho_spread", Some(3), &e),
                        CheckResult::failed("spectral_rho_constant", Some(3), &e),
                    ]
                }
            }
        }
        vec![
            CheckResult::at_most(
                "endpoint_rho_spread",
                Some(3),
                worst_ratio,
                1.0,
                "max spread of X0(T) over rho in {-0.5,0,0.5}, in units of 5 k dt stdev(X)".into(),
            ),
            CheckResult::new(
                "spectral_rho_constant",
                Some(3),
                bitwise,
                if bitwise { 0.0 } else { 1.0 },
                0.0,
                "zero-mode-off logL bit patterns identical across rho".into(),
            ),
        ]
    })
}

/// Compares a recovery table with the reference means, in units of
/// twice the reference std1. Returns the worst ratio and a summary line.
pub fn compare_with_reference(table: &RecoveryTable, reference: &ReferenceTable) -> (f64, String) {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let ratio = (row.ave - reference.ave[i]).abs() / (2.0 * reference.std1[i]);
        worst = worst.max(ratio);
        parts.push(format!("{}={:.4}", row.parameter, row.ave));
    }
    (worst, parts.join(" "))
}

/// Criterion 4: recovery-table means, both variants, 20 series of 500 points.
pub fn parameter_recovery(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let truth = recovery_truth();
        let mut out = Vec::new();
        let variants = [
            ("recovery_zero_mode_on", FitOptions::new(true), REFERENCE_ZERO_MODE_ON),
            (
                "recovery_zero_mode_off",
                FitOptions::new(false),
                REFERENCE_ZERO_MODE_OFF,
            ),
        ];
        for (name, fo, reference) in variants {
            match monte_carlo_recovery(&truth, 20, 500, opts.seed.wrapping_add(4000), &fo) {
                Ok(table) => {
                    let (worst, summary) = compare_with_reference(&table, &reference);
                    out.push(CheckResult::at_most(
                        name,
                        Some(4),
                        worst,
                        1.0,
                        format!(
                            "max |ave - reference ave| / (2 reference std1); {summary}; {} failed fits",
                            table.failed.len()
                        ),
                    ));
                }
                Err(e) => out.push(CheckResult::failed(name, Some(4), &e)),
            }
        }
        out.push(freed_rho_without_zero_mode(opts));
        out
    })
}

/// With the zero mode off, ρ is freed on a few recovery series; its mean
/// estimate must sit within two reference std1 of zero.
fn freed_rho_without_zero_mode(opts: &VerifyOptions) -> CheckResult {
    const NAME: &str = "rho_free_zero_mode_off";
    let fo = FitOptions::new(false).with_rho(RhoMode::Free).without_std_errors();
    match monte_carlo_recovery(&recovery_truth(), 5, 500, opts.seed.wrapping_add(4000), &fo) {
        Ok(t) => {
            let rho = t.row("rho").map(|r| r.ave).unwrap_or(f64::NAN);
            let bound = 2.0 * REFERENCE_ZERO_MODE_OFF.std1[4];
            CheckResult::at_most(
                NAME,
                Some(4),
                rho.abs(),
                bound,
                "|mean rho| over 5 fits; the objective is flat in rho, so rho stays at its start".to_string(),
            )
        }
        Err(e) => CheckResult::failed(NAME, Some(4), &e),
    }
}

fn gbm_path(sigma: f64, a: f64, n: usize, seed: u64) -> Result<LogSeries> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut v = 0.0;
    x.push(v);
    for _ in 1..n {
        let z: f64 = rng.sample(StandardNormal);
        v += a - 0.5 * sigma * sigma + sigma * z;
        x.push(v);
    }
    LogSeries::new(x, 1.0)
}

/// Criterion 5: at σ = σ' the continuum likelihood forgets k, and the
/// hidden model does not beat geometric Brownian motion on its own data.
pub fn gbm_reduction(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let mut out = Vec::new();
        let k_free = (|| -> Result<(f64, f64)> {
            let series = gbm_path(0.08, 0.002, 500, opts.seed.wrapping_add(5000))?;
            let sl = SpectralLikelihood::new(&series)?;
            let eval = |k: f64, scheme: Scheme| -> Result<f64> {
                let p = ModelParams::new(0.08, 0.08, k, 0.002, 0.0)?;
                let lo = LikelihoodOptions {
                    include_zero_mode: false,
                    scheme,
                };
                spectral(&sl, &p, lo, opts)
            };
            let spread = |scheme: Scheme| -> Result<f64> {
                let v: Vec<f64> = [0.05, 0.2, 0.8]
                    .iter()
                    .map(|&k| eval(k, scheme))
                    .collect::<Result<_>>()?;
                Ok(v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min))
            };
            Ok((spread(Scheme::Continuum)?, spread(Scheme::Discrete)?))
        })();
        match k_free {
            Ok((cont, disc)) => out.push(CheckResult::at_most(
                "gbm_k_independence",
                Some(5),
                cont,
                1e-10,
                format!("continuum logL spread over k in {{0.05,0.2,0.8}} at sigma=sigma' (discrete scheme spread {disc:.3e})"),
            )),
            Err(e) => out.push(CheckResult::failed("gbm_k_independence", Some(5), &e)),
        }

        let deltas: Result<Vec<f64>> = (0..100u64)
            .into_par_iter()
            .map(|i| {
                let s = gbm_path(0.1, 0.002, 500, opts.seed.wrapping_add(5100 + i))?;
                let h = fit(&s, &FitOptions::new(false).without_std_errors())?;
                let g = fit_gbm(&s)?;
                aic_compare(&h, &g)
            })
            .collect();
        match deltas {
            Ok(d) => {
                let negative = d.iter().filter(|v| **v < 0.0).count();
                let med = median(d);
                out.push(CheckResult::new(
                    "gbm_median_delta_aic",
                    Some(5),
                    med >= 0.0,
                    med,
                    0.0,
                    format!("median AIC(hidden) - AIC(GBM) over 100 GBM series of 500 points, must be >= 0; {negative} negative"),
                ));
            }
            Err(e) => out.push(CheckResult::failed("gbm_median_delta_aic", Some(5), &e)),
        }
        out
    })
}

/// Criterion 6: regressing returns on the predicted premium at the true
/// parameters gives slope 1, intercept 0 and the model-implied R².
pub fn regression_calibration(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let p = recovery_truth();
        let rows: Result<Vec<(bool, f64, f64)>> = (0..20u64)
            .into_par_iter()
            .map(|i| {
                let sim = simulate(&p, 5000, opts.seed.wrapping_add(6000 + i), 0.0, 0.0)?;
                let pr = risk_premium(&sim.observed, &p)?;
                let start = pr.burn_in.min(sim.observed.len() - 3);
                let series = sim.observed.slice(start, sim.observed.len())?;
                let pr = pr.slice(start, pr.len());
                let reg = regress_returns(&series, &pr)?;
                let ok = (reg.slope.estimate - 1.0).abs() <= 2.0 * reg.slope.std_error
                    && reg.intercept.estimate.abs() <= 2.0 * reg.intercept.std_error;
                let var_mu = stdev(&pr.mu[..pr.len() - 1]).powi(2) * p.dt * p.dt;
                let implied = var_mu / (var_mu + p.sigma_prime.powi(2) * p.dt);
                Ok((ok, reg.r_squared, implied))
            })
            .collect();
        match rows {
            Ok(rows) => {
                let good = rows.iter().filter(|r| r.0).count();
                let n = rows.len() as f64;
                let r2 = rows.iter().map(|r| r.1).sum::<f64>() / n;
                let implied = rows.iter().map(|r| r.2).sum::<f64>() / n;
                let rel = (r2 - implied).abs() / implied;
                vec![
                    CheckResult::new(
                        "regression_slope_intercept",
                        Some(6),
                        good >= 17,
                        good as f64,
                        17.0,
                        format!(
                            "{good}/20 seeds with slope within 2 SE of 1 and intercept within 2 SE of 0 (need >= 17)"
                        ),
                    ),
                    CheckResult::at_most(
                        "regression_r_squared",
                        Some(6),
                        rel,
                        0.5,
                        format!("relative gap of mean R^2 {r2:.4e} to implied {implied:.4e}"),
                    ),
                ]
            }
            Err(e) => vec![
                CheckResult::failed("regression_slope_intercept", Some(6), &e),
                CheckResult::failed("regression_r_squared", Some(6), &e),
            ],
        }
    })
}

/// Criterion 8: in the mean-reverting regime the premium-sized strategy
/// beats buy-and-hold on Sharpe ratio more often than chance.
pub fn strategy_improvement(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let p = recovery_truth();
        let pairs: Result<Vec<(f64, f64)>> = (0..50u64)
            .into_par_iter()
            .map(|i| {
                let sim = simulate(&p, 2000, opts.seed.wrapping_add(8000 + i), 0.0, 0.0)?;
                let pr = risk_premium(&sim.observed, &p)?;
                let bt = backtest(&sim.observed, &pr, &p)?;
                Ok((bt.sharpe_strategy, bt.sharpe_benchmark))
            })
            .collect();
        match pairs {
            Ok(v) => {
                let wins = v.iter().filter(|(s, b)| s > b).count();
                let n = v.len() as f64;
                let ms = v.iter().map(|x| x.0).sum::<f64>() / n;
                let mb = v.iter().map(|x| x.1).sum::<f64>() / n;
                let pval = sign_test_p_value(wins, v.len());
                vec![CheckResult::new(
                    "strategy_sign_test",
                    Some(8),
                    pval < 0.05 && ms > mb,
                    pval,
                    0.05,
                    format!("{wins}/50 wins, mean Sharpe strategy {ms:.4} vs benchmark {mb:.4}"),
                )]
            }
            Err(e) => vec![CheckResult::failed("strategy_sign_test", Some(8), &e)],
        }
    })
}

/// Filter, smoother and premium identities that hold to round-off.
pub fn internal_consistency(opts: &VerifyOptions) -> Vec<CheckResult> {
    timed(|| {
        let mut out = Vec::new();
        let p = recovery_truth();
        let p0 = p.with_rho(0.0).expect("valid rho");

        let r = (|| -> Result<f64> {
            let sim = simulate(&p0, 400, opts.seed.wrapping_add(9000), 0.0, 0.0)?;
            let track = filter_track(&sim.observed, &p0, Scheme::Discrete)?;
            let kf = kalman_filter(&sim.observed, &p0)?;
            Ok((300..400)
                .map(|t| (track[t] - kf.filtered_mean[t]).abs())
                .fold(0.0, f64::max))
        })();
        out.push(match r {
            Ok(v) => CheckResult::at_most("filter_vs_kalman", None, v, 1e-6, "max gap after t=300, rho=0".into()),
            Err(e) => CheckResult::failed("filter_vs_kalman", None, &e),
        });

        let r = (|| -> Result<f64> {
            let sim = simulate(&p, 200, opts.seed.wrapping_add(9001), 0.0, 0.0)?;
            let sm = smooth_path(&sim.observed, &p)?;
            let dense = dense_posterior(&sim.observed, &p)?;
            Ok(sm
                .path
                .values
                .iter()
                .zip(&dense.mode)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max))
        })();
        out.push(match r {
            Ok(v) => CheckResult::at_most(
                "smoother_vs_dense",
                None,
                v,
                1e-8,
                "max gap to the dense posterior mode, T=200".into(),
            ),
            Err(e) => CheckResult::failed("smoother_vs_dense", None, &e),
        });

        let r = (|| -> Result<f64> {
            let sim = simulate(&p, 500, opts.seed.wrapping_add(9002), 0.0, 0.0)?;
            let mut worst: f64 = 0.0;
            for scheme in [Scheme::Discrete, Scheme::Continuum] {
                let x = sim.observed.values();
                let mut st = FilterState::new(&p, scheme, x[0])?;
                for &v in &x[1..] {
                    st.update(v);
                    let scale = 1.0 + p.k * v.abs();
                    worst = worst.max((st.premium() - st.premium_from_endpoint()).abs() / scale);
                }
            }
            Ok(worst)
        })();
        out.push(match r {
            Ok(v) => CheckResult::at_most(
                "premium_forms_agree",
                None,
                v,
                1e-9,
                "EMA and endpoint forms of the premium".into(),
            ),
            Err(e) => CheckResult::failed("premium_forms_agree", None, &e),
        });

        let r = (|| -> Result<bool> {
            let a = simulate(&p, 1000, opts.seed, 0.0, 0.0)?;
            let b = simulate(&p, 1000, opts.seed, 0.0, 0.0)?;
            Ok(a.observed.values() == b.observed.values() && a.hidden.values == b.hidden.values)
        })();
        out.push(match r {
            Ok(same) => CheckResult::new(
                "simulation_deterministic",
                None,
                same,
                if same { 0.0 } else { 1.0 },
                0.0,
                "same seed gives identical paths".into(),
            ),
            Err(e) => CheckResult::failed("simulation_deterministic", None, &e),
        });
        out
    })
}

/// Reference fit on the S&P 500 index window starting 2009-06-01.
pub const SP500_PARAMS: [f64; 4] = [0.0066, 0.0094, 0.0965, 0.0006];
pub const SP500_START: &str = "2009-06-01";
/// Prices in the window; the return regression has one fewer observation.
pub const SP500_POINTS: usize = 1561;
pub const SP500_SUB_WINDOW_START: &str = "2012-01-01";
pub const SP500_SLOPE: f64 = 1.2212;

/// Criterion 7, run on a user-supplied FRED `SP500` download.
pub fn sp500_reproduction(path: &Path) -> Vec<CheckResult> {
    timed(|| match sp500_inner(path) {
        Ok(v) => v,
        Err(e) => vec![CheckResult::failed("sp500_reproduction", Some(7), &e)],
    })
}

fn sp500_inner(path: &Path) -> Result<Vec<CheckResult>> {
    let opts = IngestOptions {
        start: Some(crate::io::parse_date(SP500_START)?),
        ..Default::default()
    };
    let (all, _) = ingest_csv(path, &opts)?;
    if all.len() < SP500_POINTS {
        return Err(Error::Size {
            needed: SP500_POINTS,
            got: all.len(),
        });
    }
    let series = all.slice(0, SP500_POINTS)?;
    let fr = fit(&series, &FitOptions::new(false))?;
    let g = fit_gbm(&series)?;
    let mut out = Vec::new();

    let fitted = [fr.params.sigma, fr.params.sigma_prime, fr.params.k, fr.params.a];
    let worst = fitted
        .iter()
        .zip(&SP500_PARAMS)
        .map(|(f, r)| (f - r).abs() / r.abs())
        .fold(0.0, f64::max);
    out.push(CheckResult::at_most(
        "sp500_params",
        Some(7),
        worst,
        0.2,
        format!("max relative gap; fitted {fitted:?}"),
    ));
    let d = aic_compare(&fr, &g)?;
    out.push(CheckResult::at_most(
        "sp500_delta_aic",
        Some(7),
        d,
        -5.0,
        "AIC(hidden) - AIC(GBM)".into(),
    ));

    let pr = risk_premium(&series, &fr.params)?;
    let reg = regress_returns(&series, &pr)?;
    out.push(CheckResult::at_most(
        "sp500_regression_slope",
        Some(7),
        (reg.slope.estimate - SP500_SLOPE).abs(),
        reg.slope.std_error,
        format!(
            "slope {:.4} (SE {:.4}), n = {}",
            reg.slope.estimate, reg.slope.std_error, reg.n_obs
        ),
    ));

    let bt = backtest(&series, &pr, &fr.params)?;
    out.push(CheckResult::new(
        "sp500_sharpe_ratio_full",
        Some(7),
        (0.85..=0.95).contains(&bt.sharpe_ratio),
        bt.sharpe_ratio,
        0.95,
        "strategy/benchmark Sharpe, must lie in [0.85, 0.95]".into(),
    ));

    let labels = series.labels().ok_or_else(|| Error::data("series has no dates"))?;
    let start = labels
        .iter()
        .position(|l| l.as_str() >= SP500_SUB_WINDOW_START)
        .ok_or_else(|| Error::data("window ends before the sub-window"))?;
    let sub = series.slice(start, series.len())?;
    let sub_bt = backtest(&sub, &pr.slice(start, pr.len()), &fr.params)?;
    out.push(CheckResult::new(
        "sp500_sharpe_ratio_2012",
        Some(7),
        (1.1..=1.35).contains(&sub_bt.sharpe_ratio),
        sub_bt.sharpe_ratio,
        1.35,
        "strategy/benchmark Sharpe from 2012, must lie in [1.1, 1.35]".into(),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            recovery: false,
            ..Default::default()
        }
    }

    #[test]
    fn oracle_groups_pass() {
        let o = quick();
        for c in oracle_equivalence(&o)
            .into_iter()
            .chain(dense_oracle(&o))
            .chain(internal_consistency(&o))
        {
            assert!(c.passed, "{c}");
        }
    }

    #[test]
    fn corrupted_likelihood_is_caught() {
        let o = VerifyOptions {
            corrupt_likelihood: true,
            ..quick()
        };
        let c = oracle_equivalence(&o);
        assert!(!c[0].passed);
        assert_eq!(c[0].name, "spectral_vs_kalman");
    }

    #[test]
    fn report_counts() {
        let checks = vec![
            CheckResult::at_most("a", None, 1.0, 2.0, String::new()),
            CheckResult::at_most("b", None, 3.0, 2.0, String::new()),
        ];
        let r = VerifyReport::from_checks(quick(), checks);
        assert_eq!((r.n_passed, r.n_failed, r.passed), (1, 1, false));
        assert_eq!(r.failed_names(), vec!["b"]);
    }
}
