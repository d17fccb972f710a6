//! Spectral log-likelihood next to the exact Kalman value and, for a short
//! series, the dense Gaussian marginal.

use reasonable_price::likelihood::{kalman_log_likelihood, LikelihoodOptions, SpectralLikelihood};
use reasonable_price::oracle::dense_posterior;
use reasonable_price::{simulate, ModelParams};

pub fn run_example() -> reasonable_price::Result<()> {
    let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.0)?;

    for n in [16, 128, 1024] {
        let sim = simulate(&p, n, 3, 0.0, 0.0)?;
        let sl = SpectralLikelihood::new(&sim.observed)?;
        let off = sl.evaluate(&p, LikelihoodOptions::zero_mode(false))?;
        let on = sl.log_likelihood(&p, LikelihoodOptions::zero_mode(true))?;
        let kal = kalman_log_likelihood(&sim.observed, &p)?;
        print!(
            "T={n:<5} spectral {:>10.3} (+zero mode {:>10.3})  kalman {:>10.3}",
            off.value, on, kal
        );
        if n <= 200 {
            print!("  dense {:>10.3}", dense_posterior(&sim.observed, &p)?.log_marginal);
        }
        println!();
    }

    // Where the likelihood comes from: the strongest few modes.
    let sim = simulate(&p, 256, 4, 0.0, 0.0)?;
    let sl = SpectralLikelihood::new(&sim.observed)?;
    let ll = sl.evaluate(&p, LikelihoodOptions::default())?;
    let mut modes: Vec<(usize, f64)> = ll.per_mode.iter().cloned().enumerate().collect();
    modes.sort_by(|a, b| a.1.total_cmp(&b.1));
    println!("lowest mode contributions: {:?}", &modes[..3]);
    println!("drift term {:.4}", ll.drift_term);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
