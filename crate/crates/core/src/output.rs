//! Trace serialization.
//!
//! CSV has the header `tau_ps,rate,normalized_rate`, `.` decimals and LF line
//! endings; its metadata goes to a `<path>.meta.json` sidecar. The JSON format
//! embeds the metadata next to the samples.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{EngineSelection, OutputFormat};
use crate::engine::{CoincidenceTrace, ConvergenceReport, EnginePath, TraceSample};
use crate::error::{Error, Result};
use crate::grid::DelaySweep;
use crate::setup::OpticalSetup;

pub const CSV_HEADER: &str = "tau_ps,rate,normalized_rate";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub points: usize,
    /// rad/ps
    pub span: f64,
    /// rad/ps
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub preset: Option<String>,
    pub setup: OpticalSetup,
    pub grid: GridMetadata,
    pub sweep: DelaySweep,
    pub engine: EngineSelection,
    /// Path that produced the written samples.
    pub path: EnginePath,
    pub baseline_rate: f64,
    pub convergence: ConvergenceReport,
    /// Set when the convergence self-test did not pass.
    pub convergence_warning: bool,
    /// Sup-norm distance between the direct and FFT traces (`engine = both`).
    pub path_delta: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct JsonTrace<'a> {
    metadata: &'a RunMetadata,
    samples: &'a [TraceSample],
}

pub fn csv_string(trace: &CoincidenceTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &trace.samples {
        let _ = writeln!(out, "{},{},{}", s.tau, s.rate, s.normalized_rate);
    }
    out
}

pub fn json_string(trace: &CoincidenceTrace, metadata: &RunMetadata) -> String {
    let mut s = serde_json::to_string_pretty(&JsonTrace {
        metadata,
        samples: &trace.samples,
    })
    .expect("trace serializes");
    s.push('\n');
    s
}

pub fn metadata_string(metadata: &RunMetadata) -> String {
    let mut s = serde_json::to_string_pretty(metadata).expect("metadata serializes");
    s.push('\n');
    s
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the trace and returns every file written.
pub fn write_trace(
    path: &Path,
    format: OutputFormat,
    trace: &CoincidenceTrace,
    metadata: &RunMetadata,
) -> Result<Vec<PathBuf>> {
    match format {
        OutputFormat::Csv => {
            write(path, &csv_string(trace))?;
            let sidecar = sidecar_path(path);
            write(&sidecar, &metadata_string(metadata))?;
            Ok(vec![path.to_path_buf(), sidecar])
        }
        OutputFormat::Json => {
            write(path, &json_string(trace, metadata))?;
            Ok(vec![path.to_path_buf()])
        }
    }
}

/// Parses a CSV trace produced by [`csv_string`] into `(tau, rate, normalized)` rows.
pub fn parse_csv(text: &str) -> Result<Vec<(f64, f64, f64)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(CSV_HEADER) => {}
        other => {
            return Err(Error::Parse {
                line: 1,
                key: None,
                message: format!("unexpected CSV header {other:?}"),
            })
        }
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let bad = || Error::Parse {
                line: k + 2,
                key: None,
                message: format!("malformed row `{line}`"),
            };
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            match fields[..] {
                [t, r, n] => Ok((t, r, n)),
                _ => Err(bad()),
            }
        })
        .collect()
}
