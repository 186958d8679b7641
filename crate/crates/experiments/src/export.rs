//! CSV and line-delimited JSON output.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::runner::{ResultRow, SummaryRow};
use crate::vl2::Vl2Row;

pub const HEADER: [&str; 14] = [
    "preset", "sweep", "seed", "throughput", "C", "C_bar", "U", "D_flows", "AS", "path_bound", "cut_bound", "d_star",
    "seconds", "status",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("empty table")]
    EmptyTable,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

/// Shortest decimal of `x` after rounding to 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{}", crate::runner::round_sig(x))
}

fn cell(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// Rows in a fixed column order, one record per row.
pub trait Record {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

impl Record for ResultRow {
    fn header() -> Vec<&'static str> {
        HEADER.to_vec()
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.preset.clone(),
            fmt_float(self.sweep),
            self.seed.to_string(),
            cell(self.throughput),
            cell(self.c),
            cell(self.c_bar),
            cell(self.u),
            cell(self.d_flows),
            cell(self.stretch),
            cell(self.path_bound),
            cell(self.cut_bound),
            cell(self.d_star),
            cell(self.seconds),
            self.status.clone(),
        ]
    }
}

impl Record for SummaryRow {
    fn header() -> Vec<&'static str> {
        vec!["preset", "sweep", "runs", "ok", "mean", "std", "c_bar_mean", "c_bar_star"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.preset.clone(),
            fmt_float(self.sweep),
            self.runs.to_string(),
            self.ok.to_string(),
            cell(self.mean),
            cell(self.std),
            cell(self.c_bar_mean),
            cell(self.c_bar_star),
        ]
    }
}

impl Record for Vl2Row {
    fn header() -> Vec<&'static str> {
        vec!["preset", "da", "di", "traffic", "vl2_tors", "rewired_tors", "gain_percent", "status"]
    }

    fn record(&self) -> Vec<String> {
        vec![
            self.preset.clone(),
            self.da.to_string(),
            self.di.to_string(),
            self.traffic.clone(),
            self.vl2_tors.map(|v| v.to_string()).unwrap_or_default(),
            self.rewired_tors.map(|v| v.to_string()).unwrap_or_default(),
            cell(self.gain_percent),
            self.status.clone(),
        ]
    }
}

pub fn write_to<R: Record + Serialize, W: Write>(rows: &[R], format: Format, w: W) -> Result<(), ExportError> {
    if rows.is_empty() {
        return Err(ExportError::EmptyTable);
    }
    match format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(R::header())?;
            for r in rows {
                out.write_record(r.record())?;
            }
            out.flush()?;
        }
        Format::Jsonl => {
            let mut w = BufWriter::new(w);
            for r in rows {
                serde_json::to_writer(&mut w, r)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn export<R: Record + Serialize>(rows: &[R], format: Format, path: &Path) -> Result<(), ExportError> {
    if rows.is_empty() {
        return Err(ExportError::EmptyTable);
    }
    write_to(rows, format, File::create(path)?)
}

pub fn to_csv_string<R: Record + Serialize>(rows: &[R]) -> Result<String, ExportError> {
    let mut buf = Vec::new();
    write_to(rows, Format::Csv, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn read_csv<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, ExportError> {
    let mut rd = csv::Reader::from_path(path)?;
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

pub fn read_jsonl<R: DeserializeOwned>(path: &Path) -> Result<Vec<R>, ExportError> {
    let mut out = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
