//! Unit conversion and result emission.

use std::path::Path;

use clap::ValueEnum;
use ncl_core::pipeline::SweepRow;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Column names of the sweep CSV, in order.
pub const SWEEP_COLUMNS: [&str; 9] =
    ["k", "n", "R_nats", "capacity_estimate", "avg_error", "max_error", "converse_lower_bound", "trials", "seed"];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Sweep rows as CSV (header included, LF line endings). Failed rows keep
/// their block lengths and leave the measured cells empty.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io { path: "<csv>".into(), message: e.to_string() };
    w.write_record(SWEEP_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.n.to_string(),
            r.r_nats.to_string(),
            r.capacity_estimate.to_string(),
            cell(r.avg_error),
            cell(r.max_error),
            cell(r.converse_lower_bound),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: "<csv>".into(), message: e.to_string() })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// One-row CSV from `(column, value)` pairs.
pub fn single_row_csv(fields: &[(&str, String)]) -> String {
    let header: Vec<&str> = fields.iter().map(|f| f.0).collect();
    let values: Vec<&str> = fields.iter().map(|f| f.1.as_str()).collect();
    format!("{}\n{}\n", header.join(","), values.join(","))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    s
}

/// Writes to `out`, or to stdout when absent.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
