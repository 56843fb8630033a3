//! End-to-end solves of the exterior-source Dirichlet problem with the
//! ACA, BACA and dense pipelines.

use std::sync::Arc;
use std::time::Instant;

use crate::baca::{baca_solve, BacaParams, BacaResult};
use crate::cluster::{BlockPartition, ClusterTree};
use crate::error::Result;
use crate::geometry::Vec3;
use crate::hmatrix::{HMatrix, MatvecMode, StorageStats};
use crate::kernel::{assemble_dense, assemble_rhs, relative_l2_error, DirichletProblem, LaplaceSlp, QuadratureOrders};
use crate::mesh::TriMesh;
use crate::scalar::{norm2, Scalar};
use crate::solver::cg_solve;

/// CG tolerance of the ACA and dense pipelines.
pub const FIXED_CG_TOL: f64 = 1e-8;

/// Everything shared by the pipelines for one mesh and source point.
pub struct Setup<T> {
    pub mesh: TriMesh<T>,
    pub orders: QuadratureOrders,
    pub operator: LaplaceSlp<T>,
    pub problem: DirichletProblem<T>,
    pub rhs: Vec<T>,
    pub partition: Arc<BlockPartition<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub n: usize,
    pub e_h: f64,
    /// `‖b - A_k x‖₂` of the matrix that was solved.
    pub residual: f64,
    pub storage: StorageStats,
    pub cg_iterations: usize,
    pub outer_iterations: usize,
    pub wall_seconds: f64,
    pub converged: bool,
}

impl<T: Scalar> Setup<T> {
    pub fn new(mesh: TriMesh<T>, source: Vec3<T>, leaf_size: usize, beta: T, orders: QuadratureOrders) -> Result<Self> {
        let operator = LaplaceSlp::new(&mesh, orders)?;
        let problem = DirichletProblem::new(&mesh, source)?;
        let rhs = assemble_rhs(&mesh, &problem, orders)?;
        let partition = Arc::new(BlockPartition::build(ClusterTree::build(&mesh, leaf_size), beta));
        Ok(Self {
            mesh,
            orders,
            operator,
            problem,
            rhs,
            partition,
        })
    }

    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn error(&self, x: &[T]) -> Result<f64> {
        Ok(relative_l2_error(x, &self.mesh, &self.problem, self.orders)?.as_f64())
    }

    /// ACA with accuracy `eps` on every admissible block, then CG.
    pub fn run_aca(&self, eps: T, cg_tol: T, cg_max_iter: usize) -> Result<(Vec<T>, HMatrix<T>, RunSummary)> {
        let start = Instant::now();
        let h = HMatrix::assemble_aca(self.partition.clone(), &self.operator, eps, self.partition.beta());
        let zero = vec![T::zero(); self.size()];
        let out = cg_solve(|v: &[T]| h.matvec(v, MatvecMode::Ahat), &self.rhs, &zero, cg_tol, cg_max_iter)?;
        let wall_seconds = start.elapsed().as_secs_f64();
        let summary = RunSummary {
            n: self.size(),
            e_h: self.error(&out.x)?,
            residual: out.residual_norm.as_f64(),
            storage: h.storage_stats(),
            cg_iterations: out.iterations,
            outer_iterations: 0,
            wall_seconds,
            converged: out.converged,
        };
        Ok((out.x, h, summary))
    }

    pub fn run_baca(&self, params: &BacaParams<T>) -> Result<(BacaResult<T>, RunSummary)> {
        let start = Instant::now();
        let res = baca_solve(&self.operator, &self.rhs, self.partition.clone(), params)?;
        let wall_seconds = start.elapsed().as_secs_f64();
        let last = res.trace.last().expect("at least one outer iteration");
        let summary = RunSummary {
            n: self.size(),
            e_h: self.error(&res.x)?,
            residual: last.delta.as_f64(),
            storage: res.hmatrix.storage_stats(),
            cg_iterations: res.trace.total_cg_iterations(),
            outer_iterations: last.k,
            wall_seconds,
            converged: res.converged,
        };
        Ok((res, summary))
    }

    /// Full matrix, then CG.
    pub fn run_dense(&self, cg_tol: T, cg_max_iter: usize) -> Result<(Vec<T>, RunSummary)> {
        let start = Instant::now();
        let a = assemble_dense(&self.operator)?;
        let zero = vec![T::zero(); self.size()];
        let out = cg_solve(|v: &[T]| Ok(a.matvec(v)), &self.rhs, &zero, cg_tol, cg_max_iter)?;
        let wall_seconds = start.elapsed().as_secs_f64();
        let n = self.size();
        let bytes = 8 * n * n;
        let summary = RunSummary {
            n,
            e_h: self.error(&out.x)?,
            residual: norm2(&residual(&a.matvec(&out.x), &self.rhs)).as_f64(),
            storage: StorageStats {
                bytes,
                compression_percent: 100.0,
                avg_rank_ak: 0.0,
                avg_rank_ahat: 0.0,
                entries: (n * n) as u64,
            },
            cg_iterations: out.iterations,
            outer_iterations: 0,
            wall_seconds,
            converged: out.converged,
        };
        Ok((out.x, summary))
    }
}

fn residual<T: Scalar>(ax: &[T], b: &[T]) -> Vec<T> {
    b.iter().zip(ax).map(|(&bi, &ai)| bi - ai).collect()
}
