//! Regression of returns on the predicted premium, then a premium-sized
//! position against buy-and-hold at equal volatility.

use reasonable_price::inference::risk_premium;
use reasonable_price::strategy::{backtest, regress_returns};
use reasonable_price::{simulate, ModelParams};

pub fn run_example() -> reasonable_price::Result<()> {
    let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.5)?;
    let sim = simulate(&p, 5000, 99, 0.0, 0.0)?;
    let pr = risk_premium(&sim.observed, &p)?;

    let reg = regress_returns(&sim.observed, &pr)?;
    print!("{}", reg.summary());

    let bt = backtest(&sim.observed, &pr, &p)?;
    println!(
        "\nSharpe per step: strategy {:.4}, benchmark {:.4}, ratio {:.2}",
        bt.sharpe_strategy, bt.sharpe_benchmark, bt.sharpe_ratio
    );
    let last = bt.strategy_cum.len() - 1;
    println!(
        "final cumulative log return: strategy {:.3}, benchmark {:.3}",
        bt.strategy_cum[last], bt.benchmark_cum[last]
    );
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
