//! Unpreconditioned conjugate gradients with warm start.

use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm2, Scalar};

/// Iterations between recomputations of the true residual.
pub const RESTART_INTERVAL: usize = 50;

#[derive(Clone, Debug)]
pub struct CgOutcome<T> {
    pub x: Vec<T>,
    /// `‖b - op(x)‖₂`, recomputed from `x` on exit.
    pub residual_norm: T,
    pub iterations: usize,
    pub converged: bool,
    /// Some search direction had `pᵀ op p ≤ 0`.
    pub curvature: bool,
}

fn residual<T: Scalar>(op: &mut impl FnMut(&[T]) -> Result<Vec<T>>, b: &[T], x: &[T]) -> Result<Vec<T>> {
    let ax = op(x)?;
    if ax.len() != b.len() {
        return Err(Error::Dimension {
            expected: b.len(),
            actual: ax.len(),
        });
    }
    Ok(b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect())
}

/// Solves `op(x) = b` from `x0` until `‖b - op(x)‖₂ ≤ abs_tol` or
/// `max_iter` iterations. Calling again with the returned `x` and a smaller
/// tolerance continues the solve.
pub fn cg_solve<T: Scalar>(
    mut op: impl FnMut(&[T]) -> Result<Vec<T>>,
    b: &[T],
    x0: &[T],
    abs_tol: T,
    max_iter: usize,
) -> Result<CgOutcome<T>> {
    if x0.len() != b.len() {
        return Err(Error::Dimension {
            expected: b.len(),
            actual: x0.len(),
        });
    }
    if !(abs_tol > T::zero()) {
        return Err(Error::Precondition(format!("CG tolerance must be positive, got {abs_tol}")));
    }
    let mut x = x0.to_vec();
    let mut r = residual(&mut op, b, &x)?;
    let mut rr = dot(&r, &r);
    let mut p = r.clone();
    let mut iterations = 0;
    let mut curvature = false;
    let mut since_restart = 0;
    while rr.sqrt() > abs_tol && iterations < max_iter {
        let ap = op(&p)?;
        let pap = dot(&p, &ap);
        if pap <= T::zero() {
            curvature = true;
            break;
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        iterations += 1;
        since_restart += 1;
        if since_restart == RESTART_INTERVAL {
            since_restart = 0;
            r = residual(&mut op, b, &x)?;
            rr = dot(&r, &r);
            p.copy_from_slice(&r);
            continue;
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    let residual_norm = norm2(&residual(&mut op, b, &x)?);
    Ok(CgOutcome {
        x,
        residual_norm,
        iterations,
        converged: residual_norm <= abs_tol,
        curvature,
    })
}
