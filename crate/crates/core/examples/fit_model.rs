//! Maximum-likelihood fit with likelihood-slice errors, compared with a
//! geometric Brownian motion fit by AIC.

use reasonable_price::estimation::{aic_compare, fit, fit_gbm, FitOptions};
use reasonable_price::{simulate, ModelParams};

pub fn run_example() -> reasonable_price::Result<()> {
    let truth = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.5)?;
    let sim = simulate(&truth, 2000, 2024, 0.0, 0.0)?;

    let hidden = fit(&sim.observed, &FitOptions::default())?;
    let gbm = fit_gbm(&sim.observed)?;

    let names = ["sigma", "sigma'", "k", "a", "rho"];
    let est = hidden.params.as_array();
    let se = hidden.std_errors.as_array();
    for i in 0..5 {
        let err = se[i].map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>7} truth {:>7.4}  fit {:>8.4}  +- {err}",
            names[i],
            truth.as_array()[i],
            est[i]
        );
    }
    println!("logL hidden {:.2}, GBM {:.2}", hidden.loglik, gbm.loglik);
    println!(
        "dAIC = {:.2} (negative favors the hidden model)",
        aic_compare(&hidden, &gbm)?
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
