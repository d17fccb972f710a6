//! Property tests over random parameters, paths and price files.

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use reasonable_price::inference::{smooth_path, smooth_path_continuum};
use reasonable_price::io::{fmt_num, ingest_reader, read_log_series_csv, write_simulation_csv, IngestOptions};
use reasonable_price::likelihood::{kalman_filter, kalman_log_likelihood, LikelihoodOptions, SpectralLikelihood};
use reasonable_price::strategy::ols;
use reasonable_price::tridiag::solve_symmetric;
use reasonable_price::{simulate, LogSeries, ModelParams};

fn params() -> impl Strategy<Value = ModelParams> {
    (0.01f64..0.2, 0.01f64..0.2, 0.02f64..0.8, -0.01f64..0.01, -0.9f64..0.9)
        .prop_map(|(s, sp, k, a, rho)| ModelParams::new(s, sp, k, a, rho).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulation_is_a_function_of_the_seed(p in params(), seed in any::<u64>()) {
        let a = simulate(&p, 64, seed, 0.0, 0.0).unwrap();
        let b = simulate(&p, 64, seed, 0.0, 0.0).unwrap();
        prop_assert_eq!(a.observed.values(), b.observed.values());
        prop_assert_eq!(&a.hidden.values, &b.hidden.values);
    }

    #[test]
    fn formatted_numbers_keep_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = fmt_num(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs(), "{} -> {}", x, fmt_num(x));
    }

    #[test]
    fn ingested_prices_are_logged_and_gaps_skipped(
        prices in prop::collection::vec(prop::option::weighted(0.9, 1.0f64..5000.0), 3..60)
    ) {
        prop_assume!(prices.iter().flatten().count() >= 2);
        let mut csv = String::from("DATE,SP500\n");
        for (i, p) in prices.iter().enumerate() {
            let day = chrono_day(i);
            match p {
                Some(v) => csv += &format!("{day},{v}\n"),
                None => csv += &format!("{day},.\n"),
            }
        }
        let opts = IngestOptions { min_rows: 2, ..Default::default() };
        let (series, report) = ingest_reader(csv.as_bytes(), &opts).unwrap();
        let kept: Vec<f64> = prices.iter().flatten().map(|v| v.ln()).collect();
        prop_assert_eq!(report.n_missing_skipped, prices.len() - kept.len());
        prop_assert_eq!(series.len(), kept.len());
        for (a, b) in series.values().iter().zip(&kept) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn continuum_endpoint_does_not_depend_on_rho(p in params(), seed in 0u64..1000, r2 in -0.9f64..0.9) {
        let sim = simulate(&p, 200, seed, 0.0, 0.0).unwrap();
        let a = smooth_path_continuum(&sim.observed, &p).unwrap();
        let b = smooth_path_continuum(&sim.observed, &p.with_rho(r2).unwrap()).unwrap();
        let (ea, eb) = (a.path.values[199], b.path.values[199]);
        prop_assert!((ea - eb).abs() < 1e-9 * (1.0 + ea.abs()));
    }

    #[test]
    fn discrete_smoother_ends_at_the_kalman_mean(p in params(), seed in 0u64..1000) {
        let sim = simulate(&p, 150, seed, 0.0, 0.0).unwrap();
        let s = smooth_path(&sim.observed, &p).unwrap().path.values[149];
        let f = kalman_filter(&sim.observed, &p).unwrap().filtered_mean[149];
        prop_assert!((s - f).abs() < 1e-8 * (1.0 + f.abs()), "{} vs {}", s, f);
    }

    #[test]
    fn zero_mode_free_likelihood_ignores_rho(p in params(), seed in 0u64..1000, r2 in -0.9f64..0.9) {
        let sim = simulate(&p, 128, seed, 0.0, 0.0).unwrap();
        let sl = SpectralLikelihood::new(&sim.observed).unwrap();
        let o = LikelihoodOptions::zero_mode(false);
        let a = sl.log_likelihood(&p, o).unwrap();
        let b = sl.log_likelihood(&p.with_rho(r2).unwrap(), o).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn kalman_likelihood_is_shift_invariant(p in params(), seed in 0u64..1000, shift in -5.0f64..5.0) {
        let sim = simulate(&p, 100, seed, 0.0, 0.0).unwrap();
        let moved: Vec<f64> = sim.observed.values().iter().map(|v| v + shift).collect();
        let a = kalman_log_likelihood(&sim.observed, &p).unwrap();
        let b = kalman_log_likelihood(&LogSeries::new(moved, 1.0).unwrap(), &p).unwrap();
        prop_assert!((a - b).abs() < 1e-7 * (1.0 + a.abs()));
    }

    #[test]
    fn tridiagonal_solution_satisfies_the_system(
        rows in prop::collection::vec((2.5f64..5.0, -1.0f64..1.0, -10.0f64..10.0), 2..40)
    ) {
        let n = rows.len();
        let d: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let e: Vec<f64> = rows[..n - 1].iter().map(|r| r.1).collect();
        let b: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let x = solve_symmetric(&d, &e, &b).unwrap();
        for i in 0..n {
            let mut lhs = d[i] * x[i];
            if i > 0 { lhs += e[i - 1] * x[i - 1]; }
            if i + 1 < n { lhs += e[i] * x[i + 1]; }
            prop_assert!((lhs - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn ols_recovers_noiseless_lines(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 3usize..50) {
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let r = ols(&x, &y).unwrap();
        prop_assert!((r.slope.estimate - b).abs() < 1e-8);
        prop_assert!((r.intercept.estimate - a).abs() < 1e-8);
    }
}

fn chrono_day(i: usize) -> String {
    let base = chrono::NaiveDate::from_ymd_opt(2015, 1, 1).unwrap();
    (base + chrono::Days::new(i as u64)).to_string()
}

#[test]
fn simulation_csv_round_trips() {
    let p = ModelParams::new(0.05, 0.1, 0.2, 0.002, 0.3).unwrap();
    let sim = simulate(&p, 400, 17, 0.0, 0.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    write_simulation_csv(&path, &sim).unwrap();
    let obs = read_log_series_csv(&path, "observed", 1.0).unwrap();
    let hid = read_log_series_csv(&path, "hidden", 1.0).unwrap();
    for (a, b) in obs.values().iter().zip(sim.observed.values()) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-11 * (1.0 + b.abs()));
    }
    for (a, b) in hid.values().iter().zip(&sim.hidden.values) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-11 * (1.0 + b.abs()));
    }
}
