//! Predicted drift of the market price in the two regimes.
//!
//! With σ < σ' the premium leans against the recent move (mean reversion);
//! with σ > σ' it follows it.

use reasonable_price::inference::risk_premium;
use reasonable_price::{simulate, ModelParams};

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn run_example() -> reasonable_price::Result<()> {
    for (label, sigma, sigma_prime) in [("mean-reverting", 0.05, 0.1), ("trend-following", 0.1, 0.05)] {
        let p = ModelParams::new(sigma, sigma_prime, 0.2, 0.002, 0.0)?;
        let sim = simulate(&p, 3000, 11, 0.0, 0.0)?;
        let pr = risk_premium(&sim.observed, &p)?;
        let x = sim.observed.values();
        let from = pr.burn_in;
        let gap: Vec<f64> = (from..x.len()).map(|t| pr.ema_x[t] - x[t]).collect();
        let c = correlation(&pr.mu[from..], &gap);
        println!(
            "{label:>16}: corr(mu, ema - X) = {c:+.3}, last mu = {:+.5}",
            pr.mu[x.len() - 1]
        );
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
