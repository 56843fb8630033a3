use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::EntryOracle;
use crate::scalar::Scalar;

/// Size guard of [`assemble_dense`].
pub const MAX_DENSE_SIZE: usize = 4096;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `y += A x`
    pub fn matvec_add(&self, x: &[T], y: &mut [T]) {
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *yi = *yi + crate::scalar::dot(row, x);
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        self.matvec_add(x, &mut y);
        y
    }

    pub fn frobenius_norm(&self) -> T {
        crate::scalar::norm2(&self.data)
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> EntryOracle<T> for DenseMatrix<T> {
    fn size(&self) -> usize {
        self.rows
    }

    fn entry(&self, i: usize, j: usize) -> T {
        self.get(i, j)
    }
}

/// All `N²` entries of an oracle; rows are computed in parallel.
pub fn assemble_dense<T: Scalar, O: EntryOracle<T> + ?Sized>(op: &O) -> Result<DenseMatrix<T>> {
    let n = op.size();
    if n > MAX_DENSE_SIZE {
        return Err(Error::Size {
            what: "dense matrix dimension",
            value: n,
            limit: MAX_DENSE_SIZE,
        });
    }
    let mut data = vec![T::zero(); n * n];
    let cols: Vec<usize> = (0..n).collect();
    data.par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(i, row)| op.row(i, &cols, row));
    Ok(DenseMatrix::from_row_major(n, n, data))
}
