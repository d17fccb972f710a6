//! End-to-end runs of the `rprice` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/fred_synthetic.csv");
const PARAMS: &str = "0.0066,0.0094,0.0965,0.0006,0";

fn rprice(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rprice"))
        .args(args)
        .arg("--output-dir")
        .arg(out)
        .env_remove("RPRICE_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = rprice(&["simulate", "--seed", "42", "--n-points", "300"], d);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["simulation.csv", "simulation.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    rprice(&["simulate", "--seed", "43", "--n-points", "300"], &c);
    assert_ne!(
        fs::read(a.join("simulation.csv")).unwrap(),
        fs::read(c.join("simulation.csv")).unwrap()
    );
}

#[test]
fn fit_is_deterministic_and_prefers_the_hidden_model() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = rprice(&["fit", "--input", FIXTURE], d);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["fit.json", "modes.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let v = json(a.join("fit.json"));
    assert_eq!(v["ingest"]["n_missing_skipped"], 8);
    assert!(v["delta_aic"].as_f64().unwrap() < 0.0);
}

#[test]
fn infer_forecast_backtest_write_their_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let common = ["--input", FIXTURE, "--params", PARAMS];
    for (cmd, files) in [
        ("infer", &["infer.json", "paths.csv"][..]),
        ("forecast", &["forecast.json", "premium.csv"][..]),
        ("backtest", &["backtest.json", "backtest.csv", "regression.txt"][..]),
    ] {
        let mut args = vec![cmd];
        args.extend(common);
        let o = rprice(&args, out);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        for f in files {
            assert!(out.join(f).is_file(), "{cmd} wrote no {f}");
        }
    }
    let ends = json(out.join("infer.json"))["endpoints"].as_array().unwrap().clone();
    assert_eq!(ends.len(), 3);
    let f = json(out.join("forecast.json"));
    assert_eq!(f["last_date"], "2015-09-08");
}

#[test]
fn window_flags_limit_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = rprice(
        &[
            "fit",
            "--input",
            FIXTURE,
            "--start",
            "2014-01-01",
            "--end",
            "2014-12-31",
            "--fix-rho",
            "0",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(dir.path().join("fit.json"));
    assert_eq!(v["ingest"]["first_date"], "2014-01-01");
    assert_eq!(v["ingest"]["last_date"], "2014-12-31");
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&rprice(&["nonsense"], out)), 2);
    assert_eq!(code(&rprice(&["fit"], out)), 2);
    assert_eq!(code(&rprice(&["simulate", "--params", "0.1,0.1"], out)), 2);
    assert_eq!(code(&rprice(&["simulate", "--params", "-1,0.1,0.2,0.002"], out)), 2);
    assert_eq!(code(&rprice(&["fit", "--input", "/no/such/file.csv"], out)), 3);
    let bad = out.join("bad.csv");
    fs::write(&bad, "DATE,SP500\n2015-01-02,abc\n").unwrap();
    assert_eq!(code(&rprice(&["fit", "--input", bad.to_str().unwrap()], out)), 3);
    let flat = out.join("flat.csv");
    let rows: String = (1..=28).map(|d| format!("2015-02-{d:02},100\n")).collect();
    fs::write(&flat, format!("DATE,SP500\n{rows}")).unwrap();
    assert_eq!(
        code(&rprice(
            &["backtest", "--input", flat.to_str().unwrap(), "--params", PARAMS],
            out
        )),
        4
    );
    assert_eq!(code(&rprice(&["verify", "--quick", "--corrupt-likelihood"], out)), 5);
}

#[test]
fn flags_override_config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let from_file = dir.path().join("from_file");
    fs::write(
        &cfg,
        format!(
            r#"{{"seed": 5, "n_points": 120, "output_dir": {:?}}}"#,
            from_file.to_str().unwrap()
        ),
    )
    .unwrap();
    let from_env = dir.path().join("from_env");
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_rprice"))
            .arg("simulate")
            .args(extra)
            .env("RPRICE_OUTPUT_DIR", &from_env)
            .current_dir(dir.path())
            .output()
            .unwrap()
    };

    assert_eq!(code(&run(&[])), 0);
    let c = json(from_env.join("config.json"));
    assert_eq!(c["seed"], 1);
    assert_eq!(c["n_points"], 1000);

    assert_eq!(code(&run(&["--config", cfg.to_str().unwrap()])), 0);
    let c = json(from_file.join("config.json"));
    assert_eq!(c["seed"], 5);
    assert_eq!(c["n_points"], 120);

    let flag_dir = dir.path().join("from_flag");
    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--output-dir",
        flag_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let c = json(flag_dir.join("config.json"));
    assert_eq!(c["seed"], 9);
    assert_eq!(c["n_points"], 120);
    let sim = fs::read_to_string(flag_dir.join("simulation.csv")).unwrap();
    assert_eq!(sim.lines().count(), 121);
}

#[test]
fn verify_quick_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = rprice(&["verify", "--quick"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = json(dir.path().join("verify_report.json"));
    assert_eq!(v["passed"], true);
    let text = fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert!(text.lines().all(|l| !l.starts_with("FAIL")));
}
