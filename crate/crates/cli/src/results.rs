//! One-row `results.csv` files.

use std::path::Path;

use hbaca::RunSummary;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub pipeline: String,
    pub geometry: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub e_h: f64,
    pub residual: f64,
    pub storage_mb: f64,
    pub compression_percent: f64,
    pub avg_rank_ak: f64,
    pub avg_rank_ahat: f64,
    pub entries: u64,
    pub cg_iterations: usize,
    pub outer_iterations: usize,
    pub wall_seconds: f64,
}

impl ResultRow {
    pub fn new(pipeline: &str, geometry: String, s: &RunSummary) -> Self {
        Self {
            pipeline: pipeline.to_string(),
            geometry,
            n: s.n,
            e_h: s.e_h,
            residual: s.residual,
            storage_mb: s.storage.megabytes(),
            compression_percent: s.storage.compression_percent,
            avg_rank_ak: s.storage.avg_rank_ak,
            avg_rank_ahat: s.storage.avg_rank_ahat,
            entries: s.storage.entries,
            cg_iterations: s.cg_iterations,
            outer_iterations: s.outer_iterations,
            wall_seconds: s.wall_seconds,
        }
    }
}

pub fn write_results(path: &Path, row: &ResultRow) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    w.serialize(row).map_err(csv_error)?;
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> CliResult<ResultRow> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let row = r
        .deserialize()
        .next()
        .ok_or_else(|| CliError::Runtime(format!("{}: no result row", path.display())))?;
    row.map_err(csv_error)
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}
