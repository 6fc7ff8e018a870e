//! CSV and gnuplot writers for sweep results.

use std::fmt::Write as _;

use super::{PointRecord, SweepResult};
use crate::error::{BossError, Result};

/// Column header of every sweep CSV.
pub const CSV_HEADER: &str = "snr_db,scenario,decoder,trials,block_errors,bler,ci_low,ci_high,code_hash,seed";

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub scenario: String,
    pub decoder: String,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub code_hash: String,
    pub seed: u64,
}

fn row(r: &SweepResult, p: &PointRecord) -> String {
    format!(
        "{:.3},{},{},{},{},{:.10},{:.10},{:.10},{},{}",
        p.snr_db, r.scenario, r.decoder, p.trials, p.block_errors, p.bler, p.ci_low, p.ci_high, r.code_hash, r.seed
    )
}

/// Header plus one line per SNR point, newline terminated.
pub fn emit_csv(r: &SweepResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &r.points {
        out.push_str(&row(r, p));
        out.push('\n');
    }
    out
}

fn field<T: std::str::FromStr>(line: usize, name: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| BossError::ConfigFile(format!("csv line {line}: bad {name} {v:?}")))
}

/// Parses a CSV produced by [`emit_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => return Err(BossError::ConfigFile(format!("unexpected csv header {other:?}"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let n = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 10 {
                return Err(BossError::ConfigFile(format!("csv line {n}: {} fields", f.len())));
            }
            Ok(CsvRow {
                snr_db: field(n, "snr_db", f[0])?,
                scenario: f[1].to_string(),
                decoder: f[2].to_string(),
                trials: field(n, "trials", f[3])?,
                block_errors: field(n, "block_errors", f[4])?,
                bler: field(n, "bler", f[5])?,
                ci_low: field(n, "ci_low", f[6])?,
                ci_high: field(n, "ci_high", f[7])?,
                code_hash: f[8].to_string(),
                seed: field(n, "seed", f[9])?,
            })
        })
        .collect()
}

/// A gnuplot script plotting BLER with its confidence band on a log axis.
/// `csv_name` is the data file the script reads.
pub fn emit_gnuplot(r: &SweepResult, csv_name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set xlabel 'Es/N0 (dB)'");
    let _ = writeln!(s, "set ylabel 'BLER'");
    let _ = writeln!(s, "set grid");
    let _ = writeln!(
        s,
        "plot '{csv_name}' every ::1 using 1:6:7:8 with yerrorlines title '{} / {}'",
        r.scenario, r.decoder
    );
    s
}
