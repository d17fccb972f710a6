//! Monte-Carlo recovery: 20 series of 500 points, refit with and without
//! the zero-mode term, summarized as mean, spread, and mean slice error.

use reasonable_price::estimation::{monte_carlo_recovery, FitOptions};
use reasonable_price::verify::{recovery_truth, REFERENCE_ZERO_MODE_OFF, REFERENCE_ZERO_MODE_ON};

pub fn run_example() -> reasonable_price::Result<()> {
    let truth = recovery_truth();
    for (zero_mode, reference) in [(true, REFERENCE_ZERO_MODE_ON), (false, REFERENCE_ZERO_MODE_OFF)] {
        let table = monte_carlo_recovery(&truth, 20, 500, 1, &FitOptions::new(zero_mode))?;
        println!("zero mode {}", if zero_mode { "on" } else { "off" });
        println!("{:>12} {:>8} {:>8} {:>8} {:>8}", "", "ave", "std1", "std2", "ref ave");
        for (i, row) in table.rows.iter().enumerate() {
            let f = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
            println!(
                "{:>12} {:>8.4} {:>8} {:>8} {:>8.4}",
                row.parameter,
                row.ave,
                f(row.std1),
                f(row.std2),
                reference.ave[i]
            );
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
