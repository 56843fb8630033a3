//! Post-hoc checks of the estimator on a recorded run.

use crate::cluster::PartitionStats;
use crate::error::{Error, Result};
use crate::hmatrix::{HMatrix, MatvecMode};
use crate::kernel::DenseMatrix;
use crate::scalar::{norm2, Scalar};

use super::trace::BacaTrace;

/// `‖W_k x_k‖₂ / (sqrt(c_sp L) η_k)` per iteration; zero when both vanish.
pub fn reliability_ratios<T: Scalar>(trace: &BacaTrace<T>, stats: &PartitionStats) -> Vec<T> {
    let scale = T::from_count(stats.sparsity * stats.depth).sqrt();
    trace
        .rows
        .iter()
        .map(|r| {
            if r.w_norm == T::zero() {
                T::zero()
            } else {
                r.w_norm / (scale * r.eta)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseIterationReport<T> {
    pub k: usize,
    /// `‖b - A x_k‖₂` with the exact matrix.
    pub true_residual: T,
    /// `η_k / ‖b - A x_k‖₂`.
    pub efficiency: T,
    /// `‖Â_k x_k - A x_k‖₂ / ‖A_k x_k - A x_k‖₂`.
    pub saturation: T,
}

fn missing_history() -> Error {
    Error::Precondition("diagnostics need a trace recorded with history".into())
}

/// Compares every recorded iterate against the exact matrix.
pub fn dense_diagnostics<T: Scalar>(
    h: &HMatrix<T>,
    trace: &BacaTrace<T>,
    dense: &DenseMatrix<T>,
    b: &[T],
) -> Result<Vec<DenseIterationReport<T>>> {
    if trace.history.len() != trace.rows.len() {
        return Err(missing_history());
    }
    trace
        .rows
        .iter()
        .zip(&trace.history)
        .map(|(row, snap)| {
            let ax = dense.matvec(&snap.x);
            let ak = h.matvec_at(&snap.x, &snap.splits, MatvecMode::Ak)?;
            let ahat = h.matvec_at(&snap.x, &snap.splits, MatvecMode::Ahat)?;
            let res: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
            let diff = |v: &[T]| -> T {
                let d: Vec<T> = v.iter().zip(&ax).map(|(&p, &q)| p - q).collect();
                norm2(&d)
            };
            let true_residual = norm2(&res);
            let err_ak = diff(&ak);
            Ok(DenseIterationReport {
                k: row.k,
                true_residual,
                efficiency: row.eta / true_residual,
                saturation: if err_ak == T::zero() { T::zero() } else { diff(&ahat) / err_ak },
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport<T> {
    pub k: usize,
    pub eta_sq_next: T,
    pub q: T,
    pub eta_sq: T,
    pub z: T,
}

impl<T: Scalar> ReductionReport<T> {
    /// `η²_{k+1} - (q η²_k + z_k)`, nonpositive when the reduction holds.
    pub fn excess(&self) -> T {
        self.eta_sq_next - (self.q * self.eta_sq + self.z)
    }
}

/// Evaluates `η²_{k+1} ≤ q η²_k + z_k` with `q = 1 - θ²/2` and
/// `z_k = Σ_{M_k} ‖(Â_k - Â_{k+1}) x_{k+1}‖² + (1 + 1/ε) Σ_{∉M_k} ‖W_k (x_{k+1} - x_k)‖²`,
/// `ε = θ²/(2(1 - θ²))`, for every consecutive pair of recorded iterations.
pub fn reduction_diagnostics<T: Scalar>(
    h: &HMatrix<T>,
    trace: &BacaTrace<T>,
    theta: T,
) -> Result<Vec<ReductionReport<T>>> {
    if trace.history.len() != trace.rows.len() {
        return Err(missing_history());
    }
    let two = T::lit(2.0);
    let t2 = theta * theta;
    let q = T::one() - t2 / two;
    let young = T::one() + two * (T::one() - t2) / t2;
    let mut out = Vec::new();
    for k in 0..trace.history.len().saturating_sub(1) {
        let (cur, next) = (&trace.history[k], &trace.history[k + 1]);
        let dx: Vec<T> = next.x.iter().zip(&cur.x).map(|(&a, &b)| a - b).collect();
        let mut is_marked = vec![false; h.blocks().len()];
        for &m in &cur.marked {
            is_marked[m] = true;
        }
        let mut z = T::zero();
        for (idx, hb) in h.blocks().iter().enumerate() {
            if hb.aca().is_none() {
                continue;
            }
            let term = if is_marked[idx] {
                let xs = h.gather_cols(idx, &next.x);
                let a = hb.apply_local_split(&xs, cur.splits[idx], MatvecMode::Ahat);
                let b = hb.apply_local_split(&xs, next.splits[idx], MatvecMode::Ahat);
                let d: Vec<T> = a.iter().zip(&b).map(|(&p, &q)| p - q).collect();
                let n = norm2(&d);
                n * n
            } else {
                let xs = h.gather_cols(idx, &dx);
                let n = norm2(&hb.apply_local_split(&xs, cur.splits[idx], MatvecMode::Wk));
                young * n * n
            };
            z = z + term;
        }
        let eta = trace.rows[k].eta;
        let eta_next = trace.rows[k + 1].eta;
        out.push(ReductionReport {
            k,
            eta_sq_next: eta_next * eta_next,
            q,
            eta_sq: eta * eta,
            z,
        });
    }
    Ok(out)
}
