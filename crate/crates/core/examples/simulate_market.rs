//! Simulates a market price that reverts toward a hidden reasonable price.
//!
//! Parameters give a clearly visible lag: σ = 0.5,
//! σ' = 1, k = 0.2, a = 0.125, ρ = 0, unit time step.

use reasonable_price::{simulate, ModelParams};

pub fn run_example() -> reasonable_price::Result<()> {
    let params = ModelParams::new(0.5, 1.0, 0.2, 0.125, 0.0)?;
    let sim = simulate(&params, 200, 42, 0.0, 0.0)?;

    // The hidden price is usually drawn shifted by -σ'²/2k, where the
    // market price is expected to sit.
    let offset = params.ito_offset();
    println!("{:>5} {:>10} {:>10}", "t", "X", "X0-off");
    for t in (0..sim.observed.len()).step_by(20) {
        println!(
            "{t:>5} {:>10.4} {:>10.4}",
            sim.observed.values()[t],
            sim.hidden.values[t] - offset
        );
    }
    let gap: f64 = sim
        .observed
        .values()
        .iter()
        .zip(&sim.hidden.values)
        .map(|(x, x0)| x0 - offset - x)
        .sum::<f64>()
        / sim.observed.len() as f64;
    println!("mean (X0 - offset - X) = {gap:.4}  [rng {}]", sim.rng);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
