//! Block-adaptive cross approximation: solve, estimate, mark and refine
//! until the error estimator falls below a target.

mod diagnostics;
mod marking;
mod trace;

use std::sync::Arc;
use std::time::Instant;

pub use diagnostics::{
    dense_diagnostics, reduction_diagnostics, reliability_ratios, DenseIterationReport, ReductionReport,
};
pub use marking::mark_doerfler;
pub use trace::{BacaTrace, IterationSnapshot, TraceRow, TRACE_HEADER};

use crate::cluster::BlockPartition;
use crate::error::{Error, Result};
use crate::hmatrix::{HMatrix, MatvecMode};
use crate::oracle::EntryOracle;
use crate::scalar::{norm2, Scalar};
use crate::solver::cg_solve;

/// Block accuracy used when advancing blocks: only exhaustion or machine
/// precision stops them, the marking decides everything else.
pub const BLOCK_EPS_FLOOR: f64 = 1e-14;

/// Upper bound on tolerance halvings per outer iteration.
pub const MAX_TIGHTENINGS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct BacaParams<T> {
    pub theta: T,
    pub eps_baca: T,
    pub alpha: T,
    pub n_ahead: usize,
    pub r0: usize,
    pub max_outer: usize,
    /// Cap on CG iterations per solver call.
    pub cg_max_iter: usize,
    /// Keep `x_k`, rank splits and marked sets of every iteration.
    pub record_history: bool,
}

impl<T: Scalar> Default for BacaParams<T> {
    fn default() -> Self {
        Self {
            theta: T::lit(0.9),
            eps_baca: T::lit(1e-4),
            alpha: T::lit(100.0),
            n_ahead: 2,
            r0: 3,
            max_outer: 200,
            cg_max_iter: 10_000,
            record_history: false,
        }
    }
}

impl<T: Scalar> BacaParams<T> {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Precondition(m));
        if !(self.theta > T::zero() && self.theta < T::one()) {
            return fail(format!("theta must lie in (0, 1), got {}", self.theta));
        }
        if !(self.eps_baca > T::zero()) {
            return fail(format!("eps_baca must be positive, got {}", self.eps_baca));
        }
        if !(self.alpha >= T::zero()) {
            return fail(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        if self.n_ahead == 0 {
            return fail("n_ahead must be positive".into());
        }
        if self.max_outer == 0 || self.cg_max_iter == 0 {
            return fail("iteration caps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BacaResult<T> {
    pub x: Vec<T>,
    pub hmatrix: HMatrix<T>,
    pub trace: BacaTrace<T>,
    /// `η_k ≤ ε_BACA` was reached.
    pub converged: bool,
    pub curvature: bool,
}

/// Runs the refinement loop for `A x = b`, where `A` is given entry-wise by
/// `oracle` and partitioned by `partition`.
pub fn baca_solve<T: Scalar, O: EntryOracle<T> + ?Sized>(
    oracle: &O,
    b: &[T],
    partition: Arc<BlockPartition<T>>,
    params: &BacaParams<T>,
) -> Result<BacaResult<T>> {
    params.validate()?;
    if b.len() != partition.size() || oracle.size() != partition.size() {
        return Err(Error::Dimension {
            expected: partition.size(),
            actual: if b.len() != partition.size() { b.len() } else { oracle.size() },
        });
    }
    let start = Instant::now();
    let floor = T::lit(BLOCK_EPS_FLOOR);
    let beta = partition.beta();
    let mut h = HMatrix::initial(partition, oracle, params.r0, params.n_ahead, floor, beta);
    let mut trace = BacaTrace::default();
    let mut curvature = false;
    let tol_floor = T::lit(1e-14) * norm2(b).max(T::min_positive_value());

    // Bootstrap for the first tolerance: one solve at ε_BACA from zero.
    let boot = cg_solve(
        |v: &[T]| h.matvec(v, MatvecMode::Ak),
        b,
        &vec![T::zero(); b.len()],
        params.eps_baca,
        params.cg_max_iter,
    )?;
    curvature |= boot.curvature;
    let mut x = boot.x;
    let mut pending_iters = boot.iterations;
    let mut eta_prev = h.estimator_contributions(&x)?.1;

    for k in 0.. {
        let mut tol = (params.alpha * eta_prev).max(params.eps_baca) / T::lit(4.0);
        let mut out = cg_solve(|v: &[T]| h.matvec(v, MatvecMode::Ak), b, &x, tol, params.cg_max_iter)?;
        let mut cg_iters = pending_iters + out.iterations;
        pending_iters = 0;
        curvature |= out.curvature;
        let mut w_norm = norm2(&h.matvec(&out.x, MatvecMode::Wk)?);
        let mut tightenings = 0;
        while out.residual_norm > params.alpha * w_norm && tightenings < MAX_TIGHTENINGS && tol > tol_floor {
            tol = tol / T::lit(2.0);
            out = cg_solve(|v: &[T]| h.matvec(v, MatvecMode::Ak), b, &out.x, tol, params.cg_max_iter)?;
            cg_iters += out.iterations;
            curvature |= out.curvature;
            w_norm = norm2(&h.matvec(&out.x, MatvecMode::Wk)?);
            tightenings += 1;
        }
        x = out.x;
        let (contrib, eta) = h.estimator_contributions(&x)?;
        let done = eta <= params.eps_baca;
        let last = done || k + 1 >= params.max_outer;
        let marked = if last { Vec::new() } else { mark_doerfler(&contrib, params.theta) };
        let stats = h.storage_stats();
        trace.rows.push(TraceRow {
            k,
            eta,
            delta: out.residual_norm,
            w_norm,
            marked: marked.len(),
            cg_iters,
            entries: stats.entries,
            storage_bytes: stats.bytes,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
        if params.record_history {
            trace.history.push(IterationSnapshot {
                x: x.clone(),
                splits: h.rank_splits(),
                contributions: contrib,
                marked: marked.clone(),
            });
        }
        if last {
            return Ok(BacaResult {
                x,
                hmatrix: h,
                trace,
                converged: done,
                curvature,
            });
        }
        h.refine_blocks(&marked, oracle, floor, beta);
        eta_prev = eta;
    }
    unreachable!("the outer loop returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterTree;
    use crate::kernel::{assemble_rhs, DirichletProblem, LaplaceSlp, QuadratureOrders};
    use crate::mesh::generate_icosphere;
    use crate::Vec3;

    #[test]
    fn rejects_bad_parameters() {
        let mut p = BacaParams::<f64>::default();
        p.theta = 1.0;
        assert!(p.validate().is_err());
        p.theta = 0.5;
        p.eps_baca = 0.0;
        assert!(p.validate().is_err());
        p.eps_baca = 1e-6;
        p.n_ahead = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn no_admissible_blocks_exits_after_one_solve() {
        let m = generate_icosphere::<f64>(1, 1.0).unwrap();
        let orders = QuadratureOrders::default();
        let op = LaplaceSlp::new(&m, orders).unwrap();
        let prob = DirichletProblem::new(&m, Vec3::new(1.5, 0.0, 0.0)).unwrap();
        let b = assemble_rhs(&m, &prob, orders).unwrap();
        let part = Arc::new(BlockPartition::build(ClusterTree::build(&m, 15), 0.8));
        assert_eq!(part.stats().admissible, 0);
        let params = BacaParams {
            eps_baca: 1e-8,
            ..Default::default()
        };
        let res = baca_solve(&op, &b, part, &params).unwrap();
        assert!(res.converged);
        assert_eq!(res.trace.len(), 1);
        let row = res.trace.last().unwrap();
        assert_eq!(row.eta, 0.0);
        assert!(row.delta <= 1e-8);
    }

    #[test]
    fn refinement_is_monotone() {
        let m = generate_icosphere::<f64>(2, 1.0).unwrap();
        let orders = QuadratureOrders::default();
        let op = LaplaceSlp::new(&m, orders).unwrap();
        let prob = DirichletProblem::new(&m, Vec3::new(1.1, 0.0, 0.0)).unwrap();
        let b = assemble_rhs(&m, &prob, orders).unwrap();
        let part = Arc::new(BlockPartition::build(ClusterTree::build(&m, 15), 2.0));
        let params = BacaParams {
            eps_baca: 1e-7,
            r0: 1,
            record_history: true,
            ..Default::default()
        };
        let res = baca_solve(&op, &b, part, &params).unwrap();
        assert!(res.converged);
        assert!(res.trace.len() > 1);
        for w in res.trace.rows.windows(2) {
            assert!(w[1].storage_bytes >= w[0].storage_bytes);
            assert!(w[1].entries >= w[0].entries);
        }
        for w in res.trace.history.windows(2) {
            for (a, b) in w[0].splits.iter().zip(&w[1].splits) {
                assert!(b.top >= a.top && b.base >= a.base);
            }
        }
    }
}
