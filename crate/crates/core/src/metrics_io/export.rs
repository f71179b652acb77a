use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::CoverageCurve;
use crate::config::SimulationConfig;
use crate::engine::DropResult;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("no drop results to export")]
    EmptyResults,
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed drops file line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("JSON encoding failed: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExportError + '_ {
    move |source| ExportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// JSON document written by [`export`] in JSON mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Report<T: Real> {
    pub seed: u64,
    pub config: SimulationConfig<T>,
    pub curves: Vec<CoverageCurve<T>>,
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// `drop,sinr_db,rate_bps,load,state`; outage SINR is written as `-inf`.
pub fn write_drops_csv<T: Real, W: Write>(results: &[DropResult<T>], mut out: W) -> std::io::Result<()> {
    writeln!(out, "drop,sinr_db,rate_bps,load,state")?;
    for (i, r) in results.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{}",
            r.sinr_db,
            r.rate_bps,
            r.serving_load,
            r.serving_state.name()
        )?;
    }
    Ok(())
}

pub fn read_drops_csv<T: Real>(path: impl AsRef<Path>) -> Result<Vec<DropResult<T>>, ExportError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate().skip(1) {
        let line = line.map_err(io_err(path))?;
        let malformed = |message: String| ExportError::Malformed {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(malformed(format!("expected 5 fields, got {}", fields.len())));
        }
        out.push(DropResult {
            sinr_db: fields[1].parse().map_err(|e| malformed(format!("{e}")))?,
            rate_bps: fields[2].parse().map_err(|e| malformed(format!("{e}")))?,
            serving_load: fields[3].parse().map_err(|e| malformed(format!("{e}")))?,
            serving_state: fields[4].parse().map_err(malformed)?,
        });
    }
    Ok(out)
}

fn write_curve_csv<T: Real, W: Write>(curve: &CoverageCurve<T>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "threshold,coverage")?;
    for (t, c) in curve.thresholds.iter().zip(&curve.coverage) {
        writeln!(out, "{t},{c}")?;
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), ExportError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Writes results and curves into `dir`, returning the created files.
///
/// CSV mode writes `drops.csv` plus one `coverage_<label>_<metric>.csv` per
/// curve; JSON mode writes a single `report.json`.
pub fn export<T: Real>(
    config: &SimulationConfig<T>,
    results: &[DropResult<T>],
    curves: &[CoverageCurve<T>],
    dir: impl AsRef<Path>,
    format: ExportFormat,
) -> Result<Vec<PathBuf>, ExportError> {
    if results.is_empty() {
        return Err(ExportError::EmptyResults);
    }
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    match format {
        ExportFormat::Csv => {
            let path = dir.join("drops.csv");
            write_file(&path, |w| write_drops_csv(results, w))?;
            written.push(path);
            for curve in curves {
                let name = format!("coverage_{}_{}.csv", sanitize(&curve.label), curve.metric.file_tag());
                let path = dir.join(name);
                write_file(&path, |w| write_curve_csv(curve, w))?;
                written.push(path);
            }
        }
        ExportFormat::Json => {
            let report = Report {
                seed: config.rng_seed,
                config: config.clone(),
                curves: curves.to_vec(),
            };
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            let path = dir.join("report.json");
            fs::write(&path, text).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}
