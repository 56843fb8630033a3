//! Ratios between two runs on the same discretisation.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};
use crate::results::ResultRow;

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub quantity: &'static str,
    pub a: f64,
    pub b: f64,
    /// `b / a`
    pub ratio: f64,
}

pub fn compare(a: &ResultRow, b: &ResultRow) -> CliResult<Vec<RatioRow>> {
    if a.n != b.n || a.geometry != b.geometry {
        return Err(CliError::Runtime(format!(
            "runs differ in discretisation: {} N={} vs {} N={}",
            a.geometry, a.n, b.geometry, b.n
        )));
    }
    let row = |quantity, a: f64, b: f64| RatioRow {
        quantity,
        a,
        b,
        ratio: if a == b { 1.0 } else { b / a },
    };
    Ok(vec![
        row("time", a.wall_seconds, b.wall_seconds),
        row("storage", a.storage_mb, b.storage_mb),
        row("entries", a.entries as f64, b.entries as f64),
        row("cg_iterations", a.cg_iterations as f64, b.cg_iterations as f64),
    ])
}

pub fn ratios_csv(rows: &[RatioRow]) -> String {
    let mut s = String::from("quantity,a,b,ratio\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.quantity, r.a, r.b, r.ratio);
    }
    s
}
