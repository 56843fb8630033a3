//! Per-iteration record of the refinement loop.

use std::io::Write;

use crate::error::Result;
use crate::hmatrix::RankSplit;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow<T> {
    pub k: usize,
    pub eta: T,
    /// `‖b - A_k x_k‖₂` on exit of the solver.
    pub delta: T,
    pub w_norm: T,
    pub marked: usize,
    pub cg_iters: usize,
    pub entries: u64,
    pub storage_bytes: usize,
    pub wall_seconds: f64,
}

/// Full state of one iteration, kept when history recording is on.
#[derive(Clone, Debug)]
pub struct IterationSnapshot<T> {
    pub x: Vec<T>,
    pub splits: Vec<RankSplit>,
    pub contributions: Vec<T>,
    pub marked: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BacaTrace<T> {
    pub rows: Vec<TraceRow<T>>,
    pub history: Vec<IterationSnapshot<T>>,
}

impl<T> Default for BacaTrace<T> {
    fn default() -> Self {
        Self {
            rows: Vec::new(),
            history: Vec::new(),
        }
    }
}

pub const TRACE_HEADER: [&str; 9] = [
    "k",
    "eta",
    "delta",
    "w_norm",
    "marked",
    "cg_iters",
    "entries",
    "storage_bytes",
    "wall",
];

impl<T: Scalar> BacaTrace<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow<T>> {
        self.rows.last()
    }

    pub fn total_cg_iterations(&self) -> usize {
        self.rows.iter().map(|r| r.cg_iters).sum()
    }

    /// Writes one CSV line per iteration under [`TRACE_HEADER`].
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", TRACE_HEADER.join(","))?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{:e},{:e},{:e},{},{},{},{},{:.6}",
                r.k, r.eta, r.delta, r.w_norm, r.marked, r.cg_iters, r.entries, r.storage_bytes, r.wall_seconds
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_one_line_per_row() {
        let mut t = BacaTrace::<f64>::default();
        for k in 0..3 {
            t.rows.push(TraceRow {
                k,
                eta: 0.5f64.powi(k as i32),
                delta: 1e-3,
                w_norm: 2e-3,
                marked: 4,
                cg_iters: 7,
                entries: 1000 + k as u64,
                storage_bytes: 8000,
                wall_seconds: 0.25,
            });
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "k,eta,delta,w_norm,marked,cg_iters,entries,storage_bytes,wall");
        assert!(lines[2].starts_with("1,5e-1,"));
        assert_eq!(t.total_cg_iterations(), 21);
    }
}
