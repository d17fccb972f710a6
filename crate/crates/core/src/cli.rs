//! Command-line front end: argument parsing, configuration resolution and
//! the six workflows. The `rprice` binary is a thin wrapper over [`main_with_args`].
//!
//! Settings resolve as flags, then the `--config` JSON file, then
//! defaults. The default output directory comes from `RPRICE_OUTPUT_DIR`
//! when set. Every run writes its resolved settings to `config.json` in
//! the output directory.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{aic_compare, fit, fit_gbm, FitOptions, FitResult, RhoMode};
use crate::inference::{filter_track, risk_premium_with, smooth_path, smooth_path_continuum};
use crate::io::{self, ingest_csv, parse_date, IngestOptions, IngestReport};
use crate::likelihood::{LikelihoodOptions, SpectralLikelihood};
use crate::model::{simulate, LogSeries, ModelParams, Scheme};
use crate::strategy::{backtest, regress_returns};
use crate::verify::{run_suite, sp500_reproduction, VerifyOptions, VerifyReport};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "RPRICE_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "rprice-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) | Error::ParameterDomain(_) => EXIT_USAGE,
        Error::Data { .. } | Error::Size { .. } | Error::Io { .. } => EXIT_DATA,
        Error::Numeric(_) | Error::Degenerate(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rprice",
    version,
    about = "Hidden reasonable-price model: simulate, fit, infer, forecast, backtest, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Simulate a market price and its hidden reasonable price.
    Simulate,
    /// Fit the hidden model and a geometric Brownian motion baseline.
    Fit,
    /// Most probable hidden path for several ρ, plus the causal estimate.
    Infer,
    /// Risk premium at every step and the one-step forecast at the end.
    Forecast,
    /// Return regression and premium-sized backtest.
    Backtest,
    /// Run the self-check suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Price CSV (date and close columns, "." marks a missing close).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Directory for all outputs [default: $RPRICE_OUTPUT_DIR or ./rprice-out].
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// First date kept, YYYY-MM-DD.
    #[arg(long, global = true)]
    pub start: Option<String>,
    /// Last date kept, YYYY-MM-DD.
    #[arg(long, global = true)]
    pub end: Option<String>,
    /// Model parameters σ,σ',k,a,ρ (ρ may be omitted and defaults to 0).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Include the zero-mode term in the likelihood.
    #[arg(long, global = true, value_enum)]
    pub zero_mode: Option<Switch>,
    /// Hold ρ at this value while fitting.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub fix_rho: Option<f64>,
    /// JSON file with any of the settings below; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Discretization of likelihood, filter and smoother.
    #[arg(long, global = true)]
    pub scheme: Option<Scheme>,
    /// Number of simulated points.
    #[arg(long, global = true)]
    pub n_points: Option<usize>,
    /// Time step of simulated data.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub date_column: Option<String>,
    #[arg(long, global = true)]
    pub price_column: Option<String>,
    /// Read log prices from this column instead of dated closes (for
    /// example `observed` in a simulation CSV).
    #[arg(long, global = true)]
    pub log_column: Option<String>,
    /// Comma-separated ρ values for `infer`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rhos: Option<String>,
    /// First date of the backtest window; premiums still use all prior data.
    #[arg(long, global = true)]
    pub eval_start: Option<String>,
    /// Skip the per-point CSV files meant for plotting.
    #[arg(long, global = true)]
    pub no_plots: bool,
    /// `verify`: skip the Monte-Carlo recovery group.
    #[arg(long, global = true)]
    pub quick: bool,
    /// `verify`: flip the likelihood sign as a negative control.
    #[arg(long, global = true)]
    pub corrupt_likelihood: bool,
}

/// Settings accepted in a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub start: Option<String>,
    pub end: Option<String>,
    pub params: Option<ModelParams>,
    pub zero_mode: Option<bool>,
    pub fix_rho: Option<f64>,
    pub scheme: Option<Scheme>,
    pub n_points: Option<usize>,
    pub dt: Option<f64>,
    pub date_column: Option<String>,
    pub price_column: Option<String>,
    pub log_column: Option<String>,
    pub rhos: Option<Vec<f64>>,
    pub eval_start: Option<String>,
    pub emit_plots: Option<bool>,
    pub quick: Option<bool>,
    pub corrupt_likelihood: Option<bool>,
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub start: Option<String>,
    pub end: Option<String>,
    pub params: Option<ModelParams>,
    pub zero_mode: bool,
    pub fix_rho: Option<f64>,
    pub scheme: Scheme,
    pub n_points: usize,
    pub dt: f64,
    pub date_column: Option<String>,
    pub price_column: Option<String>,
    pub log_column: Option<String>,
    pub rhos: Vec<f64>,
    pub eval_start: Option<String>,
    pub emit_plots: bool,
    pub quick: bool,
    pub corrupt_likelihood: bool,
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("{what}: cannot parse '{v}' as a number")))
        })
        .collect()
}

pub fn parse_params(s: &str) -> Result<ModelParams> {
    let v = parse_list(s, "--params")?;
    match v.len() {
        4 => ModelParams::new(v[0], v[1], v[2], v[3], 0.0),
        5 => ModelParams::new(v[0], v[1], v[2], v[3], v[4]),
        n => Err(Error::Usage(format!(
            "--params needs 4 or 5 values (σ,σ',k,a[,ρ]), got {n}"
        ))),
    }
}

fn read_config(path: &Path) -> Result<ConfigFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("config file {}: {e}", path.display())))
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn resolve(command: Command, args: &CommonArgs, env_output_dir: Option<PathBuf>) -> Result<RunConfig> {
        let file = match &args.config {
            Some(p) => read_config(p)?,
            None => ConfigFile::default(),
        };
        let default_params = match command {
            Command::Simulate => Some(ModelParams::new(0.5, 1.0, 0.2, 0.125, 0.0)?),
            _ => None,
        };
        let params = match &args.params {
            Some(s) => Some(parse_params(s)?),
            None => file.params.or(default_params),
        };
        if let Some(p) = &params {
            p.validate()?;
        }
        let rhos = match &args.rhos {
            Some(s) => parse_list(s, "--rhos")?,
            None => file.rhos.unwrap_or_else(|| vec![-0.5, 0.0, 0.5]),
        };
        let cfg = RunConfig {
            command,
            input: args.input.clone().or(file.input),
            output_dir: args
                .output_dir
                .clone()
                .or(file.output_dir)
                .or(env_output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            seed: args.seed.or(file.seed).unwrap_or(1),
            start: args.start.clone().or(file.start),
            end: args.end.clone().or(file.end),
            params,
            zero_mode: args
                .zero_mode
                .map(|z| z == Switch::On)
                .or(file.zero_mode)
                .unwrap_or(false),
            fix_rho: args.fix_rho.or(file.fix_rho),
            scheme: args.scheme.or(file.scheme).unwrap_or_default(),
            n_points: args.n_points.or(file.n_points).unwrap_or(1000),
            dt: args.dt.or(file.dt).unwrap_or(1.0),
            date_column: args.date_column.clone().or(file.date_column),
            price_column: args.price_column.clone().or(file.price_column),
            log_column: args.log_column.clone().or(file.log_column),
            rhos,
            eval_start: args.eval_start.clone().or(file.eval_start),
            emit_plots: if args.no_plots {
                false
            } else {
                file.emit_plots.unwrap_or(true)
            },
            quick: args.quick || file.quick.unwrap_or(false),
            corrupt_likelihood: args.corrupt_likelihood || file.corrupt_likelihood.unwrap_or(false),
        };
        for d in [&cfg.start, &cfg.end, &cfg.eval_start].into_iter().flatten() {
            parse_date(d).map_err(|e| Error::Usage(e.to_string()))?;
        }
        if let Some(r) = cfg.fix_rho {
            if !(r.abs() < 1.0) {
                return Err(Error::Usage(format!("--fix-rho must satisfy |rho| < 1, got {r}")));
            }
        }
        Ok(cfg)
    }

    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }

    fn fit_options(&self) -> FitOptions {
        let mut o = FitOptions::new(self.zero_mode).with_scheme(self.scheme);
        if let Some(r) = self.fix_rho {
            o = o.with_rho(RhoMode::Fixed(r));
        }
        o
    }

    fn load_series(&self) -> Result<(LogSeries, Option<IngestReport>)> {
        let path = self
            .input
            .as_ref()
            .ok_or_else(|| Error::Usage("this command needs --input".into()))?;
        if let Some(col) = &self.log_column {
            return Ok((io::read_log_series_csv(path, col, self.dt)?, None));
        }
        let opts = IngestOptions {
            date_column: self.date_column.clone(),
            price_column: self.price_column.clone(),
            start: self.start.as_deref().map(parse_date).transpose()?,
            end: self.end.as_deref().map(parse_date).transpose()?,
            ..Default::default()
        };
        let (s, r) = ingest_csv(path, &opts)?;
        Ok((s, Some(r)))
    }

    /// Parameters from the settings, or fitted on `series` when none given.
    fn params_for(&self, series: &LogSeries) -> Result<(ModelParams, Option<FitResult>)> {
        match self.params {
            Some(p) => Ok((p.with_dt(series.dt())?, None)),
            None => {
                let f = fit(series, &self.fit_options())?;
                Ok((f.params, Some(f)))
            }
        }
    }
}

/// What a finished command reports back to the caller.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Short human-readable summary printed to stdout.
    pub summary: String,
    pub exit_code: i32,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; clap handles `--help` and usage errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    let result = RunConfig::resolve(cli.command, &cli.common, env_dir).and_then(|cfg| run(&cfg));
    match result {
        Ok(o) => {
            print!("{}", o.summary);
            o.exit_code
        }
        Err(e) => {
            eprintln!("rprice: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let config_path = cfg.out("config.json");
    io::write_json(&config_path, cfg)?;
    let mut outcome = match cfg.command {
        Command::Simulate => cmd_simulate(cfg),
        Command::Fit => cmd_fit(cfg),
        Command::Infer => cmd_infer(cfg),
        Command::Forecast => cmd_forecast(cfg),
        Command::Backtest => cmd_backtest(cfg),
        Command::Verify => cmd_verify(cfg),
    }?;
    outcome.files.insert(0, config_path);
    Ok(outcome)
}

fn ok(files: Vec<PathBuf>, summary: String) -> Outcome {
    Outcome {
        files,
        summary,
        exit_code: EXIT_OK,
    }
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    params: &'a ModelParams,
    seed: u64,
    rng: &'a str,
    n_points: usize,
    offset: f64,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg
        .params
        .ok_or_else(|| Error::Usage("simulate needs --params".into()))?
        .with_dt(cfg.dt)?;
    let sim = simulate(&params, cfg.n_points, cfg.seed, 0.0, 0.0)?;
    let csv = cfg.out("simulation.csv");
    io::write_simulation_csv(&csv, &sim)?;
    let json = cfg.out("simulation.json");
    io::write_json(
        &json,
        &SimulationSummary {
            params: &params,
            seed: cfg.seed,
            rng: &sim.rng,
            n_points: cfg.n_points,
            offset: params.ito_offset(),
        },
    )?;
    let summary = format!(
        "simulated {} points (seed {}) -> {}\n",
        cfg.n_points,
        cfg.seed,
        csv.display()
    );
    Ok(ok(vec![csv, json], summary))
}

#[derive(Serialize)]
struct FitReport<'a> {
    hidden: &'a FitResult,
    gbm: &'a FitResult,
    delta_aic: f64,
    ingest: Option<&'a IngestReport>,
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let (series, ingest) = cfg.load_series()?;
    let mut opts = cfg.fit_options();
    opts.initial = cfg.params.map(|p| p.with_dt(series.dt())).transpose()?;
    let hidden = fit(&series, &opts)?;
    let gbm = fit_gbm(&series)?;
    let delta_aic = aic_compare(&hidden, &gbm)?;
    let json = cfg.out("fit.json");
    io::write_json(
        &json,
        &FitReport {
            hidden: &hidden,
            gbm: &gbm,
            delta_aic,
            ingest: ingest.as_ref(),
        },
    )?;
    let mut files = vec![json];
    if cfg.emit_plots {
        let modes = cfg.out("modes.csv");
        let sl = SpectralLikelihood::new(&series)?;
        io::write_modes_csv(
            &modes,
            &sl,
            &hidden.params,
            LikelihoodOptions {
                include_zero_mode: cfg.zero_mode,
                scheme: cfg.scheme,
            },
        )?;
        files.push(modes);
    }
    let p = hidden.params;
    let summary = format!(
        "sigma={:.6} sigma'={:.6} k={:.6} a={:.6} rho={:.4}\nlogL={:.3} GBM logL={:.3} dAIC={:.3}\n",
        p.sigma, p.sigma_prime, p.k, p.a, p.rho, hidden.loglik, gbm.loglik, delta_aic
    );
    Ok(ok(files, summary))
}

#[derive(Serialize)]
struct InferReport {
    params: ModelParams,
    fitted: bool,
    scheme: Scheme,
    offset: f64,
    endpoints: Vec<(f64, f64)>,
    filtered_endpoint: f64,
}

pub fn cmd_infer(cfg: &RunConfig) -> Result<Outcome> {
    let (series, _) = cfg.load_series()?;
    let (params, fitted) = cfg.params_for(&series)?;
    let mut smoothed = Vec::new();
    let mut endpoints = Vec::new();
    for &rho in &cfg.rhos {
        let p = params.with_rho(rho)?;
        let r = match cfg.scheme {
            Scheme::Discrete => smooth_path(&series, &p)?,
            Scheme::Continuum => smooth_path_continuum(&series, &p)?,
        };
        endpoints.push((rho, *r.path.values.last().expect("non-empty series")));
        smoothed.push((format!("x0_rho_{rho}"), r.path.values));
    }
    let filtered = filter_track(&series, &params, cfg.scheme)?;
    let json = cfg.out("infer.json");
    io::write_json(
        &json,
        &InferReport {
            params,
            fitted: fitted.is_some(),
            scheme: cfg.scheme,
            offset: params.ito_offset(),
            endpoints: endpoints.clone(),
            filtered_endpoint: *filtered.last().expect("non-empty series"),
        },
    )?;
    let mut files = vec![json];
    if cfg.emit_plots {
        let csv = cfg.out("paths.csv");
        io::write_paths_csv(&csv, &series, &smoothed, &filtered, params.ito_offset())?;
        files.push(csv);
    }
    let mut summary = String::from("smoothed X0(T) by rho:");
    for (rho, v) in &endpoints {
        summary += &format!(" {rho}: {v:.6}");
    }
    summary += &format!("\nfiltered X0(T): {:.6}\n", filtered.last().expect("non-empty series"));
    Ok(ok(files, summary))
}

#[derive(Serialize)]
struct Forecast {
    params: ModelParams,
    fitted: bool,
    last_date: Option<String>,
    last_log_price: f64,
    x0_endpoint: f64,
    /// Expected drift of the log price per unit time.
    mu: f64,
    expected_next_log_price: f64,
    /// Position in units of `μ/σ'²`.
    position: f64,
    in_burn_in: bool,
}

pub fn cmd_forecast(cfg: &RunConfig) -> Result<Outcome> {
    let (series, _) = cfg.load_series()?;
    let (params, fitted) = cfg.params_for(&series)?;
    let pr = risk_premium_with(&series, &params, cfg.scheme)?;
    let last = series.len() - 1;
    let x = series.values()[last];
    let f = Forecast {
        params,
        fitted: fitted.is_some(),
        last_date: series.labels().map(|l| l[last].clone()),
        last_log_price: x,
        x0_endpoint: pr.endpoint[last],
        mu: pr.mu[last],
        expected_next_log_price: x + pr.mu[last] * series.dt(),
        position: pr.mu[last] / params.sigma_prime.powi(2),
        in_burn_in: last < pr.burn_in,
    };
    let json = cfg.out("forecast.json");
    io::write_json(&json, &f)?;
    let csv = cfg.out("premium.csv");
    io::write_premium_csv(&csv, &series, &pr)?;
    let summary = format!(
        "mu={:+.6} per unit time, expected next log price {:.6}\n",
        f.mu, f.expected_next_log_price
    );
    Ok(ok(vec![json, csv], summary))
}

#[derive(Serialize)]
struct BacktestSummary<'a> {
    params: ModelParams,
    fitted: bool,
    eval_start: Option<&'a str>,
    n_steps: usize,
    regression: &'a crate::strategy::RegressionReport,
    sharpe_strategy: f64,
    sharpe_benchmark: f64,
    sharpe_ratio: f64,
    scale: f64,
}

pub fn cmd_backtest(cfg: &RunConfig) -> Result<Outcome> {
    let (series, _) = cfg.load_series()?;
    let (params, fitted) = cfg.params_for(&series)?;
    let pr = risk_premium_with(&series, &params, cfg.scheme)?;
    let from = match &cfg.eval_start {
        None => 0,
        Some(d) => {
            let labels = series
                .labels()
                .ok_or_else(|| Error::Usage("--eval-start needs a dated input".into()))?;
            labels
                .iter()
                .position(|l| l.as_str() >= d.as_str())
                .ok_or_else(|| Error::data(format!("no prices on or after {d}")))?
        }
    };
    let window = series.slice(from, series.len())?;
    let pr = pr.slice(from, pr.len());
    let reg = regress_returns(&window, &pr)?;
    let bt = backtest(&window, &pr, &params)?;
    let json = cfg.out("backtest.json");
    io::write_json(
        &json,
        &BacktestSummary {
            params,
            fitted: fitted.is_some(),
            eval_start: cfg.eval_start.as_deref(),
            n_steps: bt.positions.len(),
            regression: &reg,
            sharpe_strategy: bt.sharpe_strategy,
            sharpe_benchmark: bt.sharpe_benchmark,
            sharpe_ratio: bt.sharpe_ratio,
            scale: bt.scale,
        },
    )?;
    let txt = cfg.out("regression.txt");
    fs::write(&txt, reg.summary()).map_err(|e| Error::io(&txt, e))?;
    let mut files = vec![json, txt];
    if cfg.emit_plots {
        let csv = cfg.out("backtest.csv");
        io::write_backtest_csv(&csv, &window, &bt)?;
        files.push(csv);
    }
    let summary = format!(
        "{}\nSharpe per step: strategy {:.5}, benchmark {:.5}, ratio {:.4}\n",
        reg.summary(),
        bt.sharpe_strategy,
        bt.sharpe_benchmark,
        bt.sharpe_ratio
    );
    Ok(ok(files, summary))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let opts = VerifyOptions {
        seed: cfg.seed,
        corrupt_likelihood: cfg.corrupt_likelihood,
        recovery: !cfg.quick,
    };
    let mut report = run_suite(&opts);
    if let Some(path) = &cfg.input {
        let mut checks = report.checks;
        checks.extend(sp500_reproduction(path));
        report = VerifyReport::from_checks(opts, checks);
    }
    let json = cfg.out("verify_report.json");
    io::write_json(&json, &report)?;
    let mut text = String::new();
    for c in &report.checks {
        text += &format!("{c}\n");
    }
    text += &format!("{} passed, {} failed\n", report.n_passed, report.n_failed);
    let txt = cfg.out("verify_report.txt");
    fs::write(&txt, &text).map_err(|e| Error::io(&txt, e))?;
    Ok(Outcome {
        files: vec![json, txt],
        summary: text,
        exit_code: if report.passed { EXIT_OK } else { EXIT_VERIFY },
    })
}
