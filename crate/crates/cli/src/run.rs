//! Executes one configured pipeline and writes its artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use hbaca::mesh::save_off;
use hbaca::pipeline::Setup;
use hbaca::{BacaTrace, Setup64, TriMesh64};

use crate::config::{Pipeline, RunConfig};
use crate::error::{CliError, CliResult};
use crate::render::{hmatrix_rects, partition_rects, write_svg, BlockRect};
use crate::results::{write_results, ResultRow};

pub const RESULTS_FILE: &str = "results.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const BLOCKS_FILE: &str = "blocks.svg";
pub const MESH_FILE: &str = "mesh.off";

pub struct RunOutput {
    pub mesh: TriMesh64,
    pub row: ResultRow,
    /// Outer-iteration trace; empty for the ACA and dense pipelines.
    pub trace: BacaTrace<f64>,
    pub rects: Vec<BlockRect>,
}

/// Runs `f` on a worker pool of the configured size.
pub fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> CliResult<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Builds the mesh and problem and runs the pipeline. The caller chooses the
/// worker pool.
pub fn execute(cfg: &RunConfig) -> CliResult<RunOutput> {
    cfg.validate()?;
    let mesh = cfg.build_mesh()?;
    let setup: Setup64 = Setup::new(mesh.clone(), cfg.source_point(), cfg.leaf_size, cfg.beta, cfg.orders())?;
    let label = cfg.geometry_label();
    let name = cfg.pipeline.name();
    let (summary, trace, rects) = match cfg.pipeline {
        Pipeline::Aca => {
            let (_, h, s) = setup.run_aca(cfg.eps_aca, cfg.cg_tol, cfg.cg_max_iter)?;
            (s, BacaTrace::default(), hmatrix_rects(&h))
        }
        Pipeline::Baca => {
            let (res, s) = setup.run_baca(&cfg.baca_params())?;
            let rects = hmatrix_rects(&res.hmatrix);
            (s, res.trace, rects)
        }
        Pipeline::Dense => {
            let (_, s) = setup.run_dense(cfg.cg_tol, cfg.cg_max_iter)?;
            (s, BacaTrace::default(), partition_rects(&setup.partition))
        }
    };
    Ok(RunOutput {
        mesh,
        row: ResultRow::new(name, label, &summary),
        trace,
        rects,
    })
}

pub fn write_artifacts(dir: &Path, out: &RunOutput) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    write_results(&dir.join(RESULTS_FILE), &out.row)?;
    let mut w = BufWriter::new(File::create(dir.join(TRACE_FILE))?);
    out.trace.write_csv(&mut w)?;
    w.flush()?;
    write_svg(&dir.join(BLOCKS_FILE), out.row.n, &out.rects)?;
    save_off(&out.mesh, dir.join(MESH_FILE))?;
    Ok(())
}

/// `execute` followed by `write_artifacts` into the configured output
/// directory.
pub fn run(cfg: &RunConfig) -> CliResult<ResultRow> {
    cfg.validate()?;
    let out = with_pool(cfg.threads, || execute(cfg))??;
    write_artifacts(&cfg.output, &out)?;
    Ok(out.row)
}
