//! Return regression on the predicted premium and a sized-position backtest.

use serde::Serialize;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};
use crate::inference::PremiumSeries;
use crate::model::{LogSeries, ModelParams};

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub estimate: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegressionReport {
    pub n_obs: usize,
    pub df_error: usize,
    pub intercept: Coefficient,
    pub slope: Coefficient,
    pub residual_se: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_stat: f64,
    pub f_p_value: f64,
}

impl RegressionReport {
    /// Plain-text block laid out like a statistics package summary.
    pub fn summary(&self) -> String {
        let row = |name: &str, c: &Coefficient| {
            format!(
                "{name:<12}{:>14.6e}{:>14.6e}{:>10.4}{:>12.4e}\n",
                c.estimate, c.std_error, c.t_stat, c.p_value
            )
        };
        let mut s = String::from("Linear regression model: dX ~ 1 + mu*dt\n\n");
        s += &format!(
            "{:<12}{:>14}{:>14}{:>10}{:>12}\n",
            "", "Estimate", "SE", "tStat", "pValue"
        );
        s += &row("(Intercept)", &self.intercept);
        s += &row("mu*dt", &self.slope);
        s += &format!(
            "\nNumber of observations: {}, Error degrees of freedom: {}\n",
            self.n_obs, self.df_error
        );
        s += &format!("Root Mean Squared Error: {:.4e}\n", self.residual_se);
        s += &format!(
            "R-squared: {:.4}, Adjusted R-Squared {:.4}\n",
            self.r_squared, self.adj_r_squared
        );
        s += &format!(
            "F-statistic vs. constant model: {:.4}, p-value = {:.4e}\n",
            self.f_stat, self.f_p_value
        );
        s
    }
}

/// Ordinary least squares of `y` on `[1, x]` with two-sided t-test p-values.
pub fn ols(x: &[f64], y: &[f64]) -> Result<RegressionReport> {
    if x.len() != y.len() {
        return Err(Error::Usage(format!(
            "regressor length {} vs response {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Size { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let raw_ss: f64 = x.iter().map(|v| v * v).sum();
    if !(sxx > 1e-20 * raw_ss) {
        return Err(Error::Degenerate(
            "regressor has zero variance (constant premium)".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let df = n - 2;
    let s2 = sse / df as f64;
    let se_slope = (s2 / sxx).sqrt();
    let se_int = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
    let t = StudentsT::new(0.0, 1.0, df as f64).map_err(|e| Error::Numeric(e.to_string()))?;
    let coef = |est: f64, se: f64| {
        let ts = est / se;
        Coefficient {
            estimate: est,
            std_error: se,
            t_stat: ts,
            p_value: 2.0 * t.sf(ts.abs()),
        }
    };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 0.0 };
    let ssr = syy - sse;
    let f_stat = ssr / s2;
    let f_p_value = FisherSnedecor::new(1.0, df as f64)
        .map(|f| f.sf(f_stat))
        .unwrap_or(f64::NAN);
    Ok(RegressionReport {
        n_obs: n,
        df_error: df,
        intercept: coef(intercept, se_int),
        slope: coef(slope, se_slope),
        residual_se: s2.sqrt(),
        r_squared: r2,
        adj_r_squared: 1.0 - (1.0 - r2) * (nf - 1.0) / df as f64,
        f_stat,
        f_p_value,
    })
}

/// Regresses next-step log returns `X(t+1) - X(t)` on `μ_X(t) dt` for every
/// `t` with a successor, so `T` prices give `T-1` observations. A
/// calibrated premium has slope 1 and intercept 0.
pub fn regress_returns(series: &LogSeries, premiums: &PremiumSeries) -> Result<RegressionReport> {
    check_aligned(series, premiums)?;
    let x: Vec<f64> = premiums.mu[..series.len() - 1]
        .iter()
        .map(|m| m * series.dt())
        .collect();
    ols(&x, &series.increments())
}

fn check_aligned(series: &LogSeries, premiums: &PremiumSeries) -> Result<()> {
    if premiums.len() != series.len() {
        return Err(Error::Usage(format!(
            "premium series has {} points, price series {}",
            premiums.len(),
            series.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestReport {
    /// Position held over `[t, t+1)`, proportional to `μ_X(t)/σ'²`.
    pub positions: Vec<f64>,
    /// Strategy returns after rescaling to the benchmark's volatility.
    pub strategy_returns: Vec<f64>,
    /// Returns of holding one unit throughout.
    pub benchmark_returns: Vec<f64>,
    pub strategy_cum: Vec<f64>,
    pub benchmark_cum: Vec<f64>,
    /// Factor applied to the raw strategy returns.
    pub scale: f64,
    /// Per-step Sharpe ratios, mean over sample standard deviation.
    pub sharpe_strategy: f64,
    pub sharpe_benchmark: f64,
    pub sharpe_ratio: f64,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

pub fn sharpe(returns: &[f64]) -> f64 {
    let (m, s) = mean_sd(returns);
    m / s
}

fn cumsum(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Holds `μ_X(t)/σ'²` units over each step and compares with buy-and-hold
/// after scaling both to the same return volatility.
pub fn backtest(series: &LogSeries, premiums: &PremiumSeries, params: &ModelParams) -> Result<BacktestReport> {
    check_aligned(series, premiums)?;
    series.require_len(3)?;
    let bench = series.increments();
    let sp2 = params.sigma_prime * params.sigma_prime;
    let positions: Vec<f64> = premiums.mu[..bench.len()].iter().map(|m| m / sp2).collect();
    if positions.iter().all(|p| *p == 0.0) {
        return Err(Error::Degenerate("all positions are zero".into()));
    }
    let raw: Vec<f64> = positions.iter().zip(&bench).map(|(p, r)| p * r).collect();
    let (_, sd_raw) = mean_sd(&raw);
    let (_, sd_bench) = mean_sd(&bench);
    if !(sd_raw > 0.0 && sd_bench > 0.0) {
        return Err(Error::Degenerate("zero-volatility returns".into()));
    }
    let scale = sd_bench / sd_raw;
    let strat: Vec<f64> = raw.iter().map(|r| r * scale).collect();
    let (ss, sb) = (sharpe(&strat), sharpe(&bench));
    Ok(BacktestReport {
        strategy_cum: cumsum(&strat),
        benchmark_cum: cumsum(&bench),
        positions,
        strategy_returns: strat,
        benchmark_returns: bench,
        scale,
        sharpe_strategy: ss,
        sharpe_benchmark: sb,
        sharpe_ratio: ss / sb,
    })
}

/// One-sided sign-test p-value: probability of at least `wins` successes in
/// `n` fair coin flips.
pub fn sign_test_p_value(wins: usize, n: usize) -> f64 {
    if wins == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n as u64).expect("valid binomial");
    b.sf(wins as u64 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::risk_premium;
    use crate::model::{simulate, Scheme};
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.5 + 2.0 * v).collect();
        let r = ols(&x, &y).unwrap();
        assert_abs_diff_eq!(r.slope.estimate, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.intercept.estimate, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn textbook_p_values() {
        // Noisy line; compare t-statistic p-values with the F-test, which
        // must agree for a single regressor.
        let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .enumerate()
            .map(|(i, v)| 0.1 * v + if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let r = ols(&x, &y).unwrap();
        assert_abs_diff_eq!(r.slope.p_value, r.f_p_value, epsilon = 1e-10);
        assert_abs_diff_eq!(r.slope.t_stat.powi(2), r.f_stat, epsilon = 1e-8);
    }

    #[test]
    fn constant_premium_is_degenerate() {
        let p = ModelParams::new(0.08, 0.08, 0.1, 0.004, 0.0).unwrap();
        let sim = simulate(&p, 100, 1, 0.0, 0.0).unwrap();
        let pr = crate::inference::risk_premium_with(&sim.observed, &p, Scheme::Continuum).unwrap();
        assert!(matches!(regress_returns(&sim.observed, &pr), Err(Error::Degenerate(_))));
        // Positive constant premium: strategy is buy-and-hold.
        let bt = backtest(&sim.observed, &pr, &p).unwrap();
        for (a, b) in bt.strategy_cum.iter().zip(&bt.benchmark_cum) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(bt.sharpe_ratio, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn backtest_equalizes_volatility() {
        let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.0).unwrap();
        let sim = simulate(&p, 500, 2, 0.0, 0.0).unwrap();
        let pr = risk_premium(&sim.observed, &p).unwrap();
        let bt = backtest(&sim.observed, &pr, &p).unwrap();
        let (_, a) = mean_sd(&bt.strategy_returns);
        let (_, b) = mean_sd(&bt.benchmark_returns);
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        assert_eq!(bt.positions.len(), 499);
    }

    #[test]
    fn sign_test_values() {
        assert_abs_diff_eq!(sign_test_p_value(1, 1), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sign_test_p_value(2, 2), 0.25, epsilon = 1e-12);
        assert!(sign_test_p_value(32, 50) < 0.05);
        assert!(sign_test_p_value(31, 50) > 0.05);
    }
}
