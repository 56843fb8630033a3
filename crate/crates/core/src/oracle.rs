//! Entry-wise access to a matrix that is too expensive to store.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::scalar::Scalar;

/// Pure, thread-safe access to the entries of an `N x N` matrix.
pub trait EntryOracle<T: Scalar>: Sync {
    fn size(&self) -> usize;

    fn entry(&self, i: usize, j: usize) -> T;

    /// `out[k] = A[i, cols[k]]`
    fn row(&self, i: usize, cols: &[usize], out: &mut [T]) {
        for (o, &j) in out.iter_mut().zip(cols) {
            *o = self.entry(i, j);
        }
    }

    /// `out[k] = A[rows[k], j]`
    fn column(&self, rows: &[usize], j: usize, out: &mut [T]) {
        for (o, &i) in out.iter_mut().zip(rows) {
            *o = self.entry(i, j);
        }
    }
}

impl<T: Scalar, O: EntryOracle<T> + ?Sized> EntryOracle<T> for &O {
    fn size(&self) -> usize {
        (**self).size()
    }
    fn entry(&self, i: usize, j: usize) -> T {
        (**self).entry(i, j)
    }
}

/// Oracle backed by a closure.
pub struct FnOracle<F> {
    n: usize,
    f: F,
}

impl<F> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<T: Scalar, F: Fn(usize, usize) -> T + Sync> EntryOracle<T> for FnOracle<F> {
    fn size(&self) -> usize {
        self.n
    }
    fn entry(&self, i: usize, j: usize) -> T {
        (self.f)(i, j)
    }
}

/// Wraps an oracle and counts every entry request.
pub struct CountingOracle<O> {
    inner: O,
    count: AtomicU64,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            count: AtomicU64::new(0),
        }
    }

    pub fn count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<T: Scalar, O: EntryOracle<T>> EntryOracle<T> for CountingOracle<O> {
    fn size(&self) -> usize {
        self.inner.size()
    }
    fn entry(&self, i: usize, j: usize) -> T {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.entry(i, j)
    }
}
