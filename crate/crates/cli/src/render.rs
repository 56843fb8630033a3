//! SVG drawing of a block partition.

use std::fmt::Write as _;
use std::path::Path;

use hbaca::hmatrix::BlockData;
use hbaca::{BlockPartition64, HMatrix64};

use crate::error::{CliError, CliResult};

/// Largest matrix size that is drawn.
pub const MAX_RENDER_SIZE: usize = 100_000;

const RED: &str = "#d62728";
const GREEN: &str = "#2ca02c";

/// One rectangle of the drawing, in matrix index units.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
    /// Rank label of a low-rank block; `None` draws the block red.
    pub rank: Option<usize>,
}

/// Rectangles of every block; all red, as before any approximation.
pub fn partition_rects(p: &BlockPartition64) -> Vec<BlockRect> {
    let tree = p.tree();
    p.blocks()
        .iter()
        .map(|b| {
            let (r, c) = (&tree.node(b.row).range, &tree.node(b.col).range);
            BlockRect {
                x: c.start,
                y: r.start,
                width: c.len(),
                height: r.len(),
                rank: None,
            }
        })
        .collect()
}

/// Rectangles with the `Â` rank of every low-rank block. Blocks that are
/// stored densely, admissible or not, are drawn red.
pub fn hmatrix_rects(h: &HMatrix64) -> Vec<BlockRect> {
    let mut rects = partition_rects(h.partition());
    for (rect, hb) in rects.iter_mut().zip(h.blocks()) {
        if let BlockData::LowRank { aca, .. } = &hb.data {
            if aca.dense().is_none() {
                rect.rank = Some(aca.rank());
            }
        }
    }
    rects
}

pub fn svg_string(n: usize, rects: &[BlockRect]) -> CliResult<String> {
    if n > MAX_RENDER_SIZE {
        return Err(CliError::Validation(format!(
            "matrix size {n} exceeds the drawing limit {MAX_RENDER_SIZE}"
        )));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="800" viewBox="0 0 {n} {n}">"#
    );
    for r in rects {
        let fill = if r.rank.is_some() { GREEN } else { RED };
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="black" stroke-width="{}"/>"#,
            r.x,
            r.y,
            r.width,
            r.height,
            (n as f64 / 800.0).max(0.05),
        );
        if let Some(rank) = r.rank {
            let size = r.width.min(r.height) as f64 * 0.5;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="{size}" text-anchor="middle" dominant-baseline="central">{rank}</text>"#,
                r.x as f64 + r.width as f64 / 2.0,
                r.y as f64 + r.height as f64 / 2.0,
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_svg(path: &Path, n: usize, rects: &[BlockRect]) -> CliResult<()> {
    std::fs::write(path, svg_string(n, rects)?)?;
    Ok(())
}
