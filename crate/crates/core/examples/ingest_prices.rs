//! Reads a FRED-style download, where "." marks a missing close.

use reasonable_price::io::{ingest_reader, parse_date, IngestOptions};

const CSV: &str = "DATE,SP500
2015-01-02,2058.20
2015-01-05,2020.58
2015-01-06,2002.61
2015-01-07,2025.90
2015-01-08,2062.14
2015-01-09,2044.81
2015-01-12,2028.26
2015-01-13,2023.03
2015-01-14,2011.27
2015-01-15,1992.67
2015-01-16,2019.42
2015-01-19,.
2015-01-20,2022.55
2015-01-21,2032.12
2015-01-22,2063.15
2015-01-23,2051.82
2015-01-26,2057.09
2015-01-27,2029.55
2015-01-28,2002.16
2015-01-29,2021.25
2015-01-30,1994.99
";

pub fn run_example() -> reasonable_price::Result<()> {
    let opts = IngestOptions {
        price_column: Some("SP500".into()),
        start: Some(parse_date("2015-01-05")?),
        ..Default::default()
    };
    let (series, report) = ingest_reader(CSV.as_bytes(), &opts)?;
    println!("{report:?}");
    let inc = series.increments();
    let mean = inc.iter().sum::<f64>() / inc.len() as f64;
    println!("{} prices, mean daily log return {mean:+.5}", series.len());
    Ok(())
}

fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
