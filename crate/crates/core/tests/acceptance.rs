//! Acceptance criteria 1 to 8, one PASS/FAIL/SKIP line each.
//!
//! Criterion 7 needs the S&P 500 closes: point `RPRICE_SP500_CSV` at a
//! FRED-style CSV (DATE,SP500) to run it.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use reasonable_price::verify::{
    dense_oracle, gbm_reduction, oracle_equivalence, parameter_recovery, regression_calibration, rho_invariance,
    sp500_reproduction, strategy_improvement, CheckResult, VerifyOptions,
};

type Group = fn(&VerifyOptions) -> Vec<CheckResult>;

struct Outcome {
    criterion: u8,
    passed: Option<bool>,
    line: String,
}

fn evaluate(criterion: u8, checks: Vec<CheckResult>, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    let scoped: Vec<&CheckResult> = checks.iter().filter(|c| c.criterion == Some(criterion)).collect();
    let mut passed = !scoped.is_empty() && scoped.iter().all(|c| c.passed);
    let mut notes: Vec<String> = scoped.iter().map(|c| c.to_string()).collect();
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
            notes.push(format!(
                "over time budget: {:.1}s > {:.0}s",
                elapsed.as_secs_f64(),
                b.as_secs_f64()
            ));
        }
    }
    let head = format!(
        "criterion {criterion}: {} ({:.2}s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    Outcome {
        criterion,
        passed: Some(passed),
        line: std::iter::once(head)
            .chain(notes.into_iter().map(|n| format!("    {n}")))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn run_group(criterion: u8, group: Group, opts: &VerifyOptions, budget: Option<Duration>) -> Outcome {
    let t0 = Instant::now();
    let checks = group(opts);
    evaluate(criterion, checks, t0.elapsed(), budget)
}

fn acceptance_criteria() -> bool {
    let opts = VerifyOptions::default();
    let mut outcomes = vec![
        run_group(1, oracle_equivalence, &opts, Some(Duration::from_secs(10))),
        run_group(2, dense_oracle, &opts, None),
        run_group(3, rho_invariance, &opts, None),
        run_group(4, parameter_recovery, &opts, Some(Duration::from_secs(300))),
        run_group(5, gbm_reduction, &opts, None),
        run_group(6, regression_calibration, &opts, None),
    ];
    match std::env::var_os("RPRICE_SP500_CSV").filter(|v| !v.is_empty()) {
        Some(p) => {
            let path = PathBuf::from(p);
            let t0 = Instant::now();
            let checks = sp500_reproduction(&path);
            outcomes.push(evaluate(7, checks, t0.elapsed(), None));
        }
        None => outcomes.push(Outcome {
            criterion: 7,
            passed: None,
            line: "criterion 7: SKIP (set RPRICE_SP500_CSV to a DATE,SP500 close file)".into(),
        }),
    }
    outcomes.push(run_group(8, strategy_improvement, &opts, None));

    for o in &outcomes {
        println!("{}", o.line);
    }
    let failed: Vec<u8> = outcomes
        .iter()
        .filter(|o| o.passed == Some(false))
        .map(|o| o.criterion)
        .collect();
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
    }
    failed.is_empty()
}

fn corrupted_likelihood_fails_the_oracle_criteria() -> bool {
    let opts = VerifyOptions {
        corrupt_likelihood: true,
        recovery: false,
        ..VerifyOptions::default()
    };
    let caught = [
        run_group(1, oracle_equivalence, &opts, None),
        run_group(2, dense_oracle, &opts, None),
    ]
    .iter()
    .all(|o| o.passed == Some(false));
    println!(
        "negative control: {} (corrupted likelihood {} criteria 1 and 2)",
        if caught { "PASS" } else { "FAIL" },
        if caught { "fails" } else { "slips past" }
    );
    caught
}

fn main() {
    // Plain binary (no libtest harness) so the per-criterion lines always
    // reach the output; any libtest arguments are ignored.
    let ok = acceptance_criteria() & corrupted_likelihood_fails_the_oracle_criteria();
    if !ok {
        std::process::exit(1);
    }
}
