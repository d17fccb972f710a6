//! Most probable hidden price given a whole series, for several ρ, and the
//! causal estimate at each point in time.

use reasonable_price::inference::{filter_track, smooth_path, smooth_path_continuum};
use reasonable_price::{simulate, ModelParams, Scheme};

pub fn run_example() -> reasonable_price::Result<()> {
    let truth = ModelParams::new(0.5, 1.0, 0.2, 0.125, 0.0)?;
    let sim = simulate(&truth, 300, 7, 0.0, 0.0)?;
    let n = sim.observed.len();

    println!("{:>6} {:>12} {:>12}", "rho", "X0(T) exact", "X0(T) cont.");
    for rho in [-0.5, 0.0, 0.5] {
        let p = truth.with_rho(rho)?;
        let exact = smooth_path(&sim.observed, &p)?;
        let cont = smooth_path_continuum(&sim.observed, &p)?;
        println!(
            "{rho:>6.1} {:>12.5} {:>12.5}",
            exact.path.values[n - 1],
            cont.path.values[n - 1]
        );
    }

    let track = filter_track(&sim.observed, &truth, Scheme::Discrete)?;
    let smooth = smooth_path(&sim.observed, &truth)?;
    let rms = |a: &[f64]| {
        (a.iter()
            .zip(&sim.hidden.values)
            .map(|(u, v)| (u - v).powi(2))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };
    println!(
        "rms error vs true X0: smoother {:.4}, filter {:.4}",
        rms(&smooth.path.values),
        rms(&track)
    );
    println!("filter endpoint {:.5}", track[n - 1]);
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
