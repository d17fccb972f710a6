//! Runs the self-check suite and prints one line per check.
//!
//! Pass `--quick` to skip the Monte-Carlo recovery group and
//! `--corrupt` to flip the likelihood sign as a negative control.

use reasonable_price::verify::{run_suite, VerifyOptions};

pub fn run_example() -> reasonable_price::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let opts = VerifyOptions {
        recovery: !args.iter().any(|a| a == "--quick"),
        corrupt_likelihood: args.iter().any(|a| a == "--corrupt"),
        ..Default::default()
    };
    let report = run_suite(&opts);
    for c in &report.checks {
        println!("{c}  ({:.1}s)", c.seconds);
    }
    println!("{} passed, {} failed", report.n_passed, report.n_failed);
    if report.passed {
        Ok(())
    } else {
        Err(reasonable_price::Error::Numeric(format!(
            "failed: {}",
            report.failed_names().join(", ")
        )))
    }
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
