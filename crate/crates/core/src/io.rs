//! CSV ingest of daily closes and deterministic CSV/JSON artifact writers.
//!
//! Numbers are written with 12 significant digits so files are stable
//! across runs and re-ingest to the same values at that precision.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::RecoveryTable;
use crate::inference::PremiumSeries;
use crate::likelihood::spectral::{LikelihoodOptions, SpectralLikelihood};
use crate::model::{LogSeries, ModelParams, SimulationOutput};
use crate::strategy::BacktestReport;

/// Price fields treated as missing.
pub const MISSING_MARKERS: [&str; 2] = [".", ""];

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Header name of the date column; first column when `None`.
    pub date_column: Option<String>,
    /// Header name of the price column; second column when `None`.
    pub price_column: Option<String>,
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub delimiter: u8,
    pub min_rows: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            date_column: None,
            price_column: None,
            start: None,
            end: None,
            delimiter: b',',
            min_rows: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    /// Rows whose date falls inside the requested window.
    pub n_rows_read: usize,
    pub n_missing_skipped: usize,
    pub n_outside_window: usize,
    pub n_used: usize,
    pub first_date: Option<String>,
    pub last_date: Option<String>,
}

pub fn parse_date(s: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| Error::data(format!("unparseable date '{s}': {e}")))
}

fn column_index(headers: &csv::StringRecord, name: Option<&str>, default: usize) -> Result<usize> {
    match name {
        Some(n) => headers
            .iter()
            .position(|h| h.trim() == n)
            .ok_or_else(|| Error::data(format!("column '{n}' not found in header {headers:?}"))),
        None if headers.len() > default => Ok(default),
        None => Err(Error::data(format!("header has only {} columns", headers.len()))),
    }
}

/// Reads dated closes, drops missing rows, applies the window, and returns
/// log prices on a uniform trading-day grid (`dt = 1`).
pub fn ingest_csv(path: impl AsRef<Path>, opts: &IngestOptions) -> Result<(LogSeries, IngestReport)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, opts)
}

pub fn ingest_reader(reader: impl std::io::Read, opts: &IngestOptions) -> Result<(LogSeries, IngestReport)> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::data(format!("cannot read header: {e}")))?
        .clone();
    let di = column_index(&headers, opts.date_column.as_deref(), 0)?;
    let pi = column_index(&headers, opts.price_column.as_deref(), 1)?;

    let mut report = IngestReport {
        n_rows_read: 0,
        n_missing_skipped: 0,
        n_outside_window: 0,
        n_used: 0,
        first_date: None,
        last_date: None,
    };
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut prev: Option<NaiveDate> = None;
    for (i, rec) in rdr.records().enumerate() {
        // Line number in the file, counting the header as line 1.
        let line = i + 2;
        let rec = rec.map_err(|e| Error::data_at(line, e.to_string()))?;
        let date_s = rec.get(di).ok_or_else(|| Error::data_at(line, "missing date field"))?;
        let date = parse_date(date_s).map_err(|e| match e {
            Error::Data { msg, .. } => Error::data_at(line, msg),
            other => other,
        })?;
        if prev.is_some_and(|p| date <= p) {
            return Err(Error::data_at(line, format!("date {date} not after previous row")));
        }
        prev = Some(date);
        if opts.start.is_some_and(|s| date < s) || opts.end.is_some_and(|e| date > e) {
            report.n_outside_window += 1;
            continue;
        }
        report.n_rows_read += 1;
        let raw = rec.get(pi).unwrap_or("");
        if MISSING_MARKERS.contains(&raw) {
            report.n_missing_skipped += 1;
            continue;
        }
        let price: f64 = raw
            .parse()
            .map_err(|_| Error::data_at(line, format!("unparseable price '{raw}'")))?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(Error::data_at(line, format!("non-positive price {price}")));
        }
        values.push(price.ln());
        labels.push(date.format("%Y-%m-%d").to_string());
    }
    report.n_used = values.len();
    report.first_date = labels.first().cloned();
    report.last_date = labels.last().cloned();
    if values.len() < opts.min_rows.max(2) {
        return Err(Error::Size {
            needed: opts.min_rows.max(2),
            got: values.len(),
        });
    }
    let series = LogSeries::new(values, 1.0)?.with_labels(labels)?;
    Ok((series, report))
}

/// Reads a column of log values written by [`write_simulation_csv`] or any
/// CSV with a header.
pub fn read_log_series_csv(path: impl AsRef<Path>, column: &str, dt: f64) -> Result<LogSeries> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(format!("{other:?}")),
    })?;
    let headers = rdr.headers().map_err(|e| Error::data(e.to_string()))?.clone();
    let ci = column_index(&headers, Some(column), 0)?;
    let mut v = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::data_at(i + 2, e.to_string()))?;
        let s = rec.get(ci).unwrap_or("");
        v.push(
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::data_at(i + 2, format!("unparseable value '{s}'")))?,
        );
    }
    LogSeries::new(v, dt)
}

/// 12 significant digits, plain notation where reasonable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

/// Writes a header and rows; an empty row set yields a header-only file.
pub fn write_csv<I>(path: impl AsRef<Path>, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = path.as_ref();
    ensure_parent(path)?;
    let to_err = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::data(format!("{other:?}")),
    };
    let mut w = csv::Writer::from_path(path).map_err(to_err)?;
    w.write_record(header).map_err(to_err)?;
    for r in rows {
        w.write_record(&r).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    ensure_parent(path)?;
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Numeric(format!("JSON encoding: {e}")))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn label_at(series: &LogSeries, t: usize) -> String {
    series.labels().map(|l| l[t].clone()).unwrap_or_else(|| t.to_string())
}

pub fn write_simulation_csv(path: impl AsRef<Path>, sim: &SimulationOutput) -> Result<()> {
    let x = sim.observed.values();
    let rows = (0..x.len()).map(|t| {
        vec![
            fmt_num(t as f64 * sim.observed.dt()),
            fmt_num(x[t]),
            fmt_num(sim.hidden.values[t]),
        ]
    });
    write_csv(path, &["t", "observed", "hidden"], rows)
}

pub fn write_premium_csv(path: impl AsRef<Path>, series: &LogSeries, prem: &PremiumSeries) -> Result<()> {
    let x = series.values();
    let rows = (0..prem.len()).map(|t| {
        vec![
            label_at(series, t),
            fmt_num(x[t]),
            fmt_num(prem.mu[t]),
            fmt_num(prem.ema_x[t]),
            fmt_num(prem.endpoint[t]),
            (t < prem.burn_in).to_string(),
        ]
    });
    write_csv(
        path,
        &["date", "log_price", "mu", "ema", "x0_filtered", "burn_in"],
        rows,
    )
}

/// Smoothed paths (one column per label), the filtered track, and the
/// hidden path shifted by `-σ'²/2k` for direct comparison with `X`.
pub fn write_paths_csv(
    path: impl AsRef<Path>,
    series: &LogSeries,
    smoothed: &[(String, Vec<f64>)],
    filtered: &[f64],
    offset: f64,
) -> Result<()> {
    let mut header: Vec<String> = vec!["date".into(), "log_price".into()];
    for (name, _) in smoothed {
        header.push(name.clone());
        header.push(format!("{name}_minus_offset"));
    }
    header.push("filtered".into());
    let header_ref: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let x = series.values();
    let rows = (0..x.len()).map(|t| {
        let mut r = vec![label_at(series, t), fmt_num(x[t])];
        for (_, p) in smoothed {
            r.push(fmt_num(p[t]));
            r.push(fmt_num(p[t] - offset));
        }
        r.push(fmt_num(filtered[t]));
        r
    });
    write_csv(path, &header_ref, rows)
}

/// Per-mode dump: index, frequency, periodogram power, contribution.
pub fn write_modes_csv(
    path: impl AsRef<Path>,
    sl: &SpectralLikelihood,
    params: &ModelParams,
    opts: LikelihoodOptions,
) -> Result<()> {
    let ll = sl.evaluate(params, opts)?;
    let eff = sl.effective(params, opts.scheme)?;
    let rows = sl.coefficients().iter().enumerate().map(|(i, c)| {
        vec![
            (i + 1).to_string(),
            fmt_num(eff.omegas[i]),
            fmt_num(c.norm_sqr()),
            fmt_num(ll.per_mode[i]),
        ]
    });
    write_csv(path, &["n", "omega", "power", "contribution"], rows)
}

pub fn write_recovery_csv(path: impl AsRef<Path>, table: &RecoveryTable) -> Result<()> {
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    let rows = table
        .rows
        .iter()
        .map(|r| vec![r.parameter.clone(), fmt_num(r.ave), opt(r.std1), opt(r.std2)]);
    write_csv(path, &["parameter", "ave", "std1", "std2"], rows)
}

/// Cumulative return curves aligned to the start date of each step.
pub fn write_backtest_csv(path: impl AsRef<Path>, series: &LogSeries, bt: &BacktestReport) -> Result<()> {
    let rows = (0..bt.positions.len()).map(|t| {
        vec![
            label_at(series, t + 1),
            fmt_num(bt.benchmark_cum[t]),
            fmt_num(bt.strategy_cum[t]),
            fmt_num(bt.positions[t]),
        ]
    });
    write_csv(path, &["date", "benchmark_cum", "strategy_cum", "position"], rows)
}
