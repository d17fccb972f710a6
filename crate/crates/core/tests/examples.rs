//! Every program under examples/ runs to completion.

#[allow(dead_code)]
#[path = "../examples/backtest.rs"]
mod backtest;
#[allow(dead_code)]
#[path = "../examples/fit_model.rs"]
mod fit_model;
#[allow(dead_code)]
#[path = "../examples/hidden_path.rs"]
mod hidden_path;
#[allow(dead_code)]
#[path = "../examples/ingest_prices.rs"]
mod ingest_prices;
#[allow(dead_code)]
#[path = "../examples/parameter_recovery.rs"]
mod parameter_recovery;
#[allow(dead_code)]
#[path = "../examples/risk_premium.rs"]
mod risk_premium;
#[allow(dead_code)]
#[path = "../examples/simulate_market.rs"]
mod simulate_market;
#[allow(dead_code)]
#[path = "../examples/spectral_likelihood.rs"]
mod spectral_likelihood;
#[allow(dead_code)]
#[path = "../examples/verify_suite.rs"]
mod verify_suite;

#[test]
fn backtest_runs() {
    backtest::run_example().unwrap();
}

#[test]
fn fit_model_runs() {
    fit_model::run_example().unwrap();
}

#[test]
fn hidden_path_runs() {
    hidden_path::run_example().unwrap();
}

#[test]
fn ingest_prices_runs() {
    ingest_prices::run_example().unwrap();
}

#[test]
fn risk_premium_runs() {
    risk_premium::run_example().unwrap();
}

#[test]
fn simulate_market_runs() {
    simulate_market::run_example().unwrap();
}

#[test]
fn spectral_likelihood_runs() {
    spectral_likelihood::run_example().unwrap();
}

#[test]
fn parameter_recovery_runs() {
    parameter_recovery::run_example().unwrap();
}

#[test]
fn verify_suite_runs() {
    verify_suite::run_example().unwrap();
}
