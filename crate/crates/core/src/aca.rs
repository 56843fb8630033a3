//! Resumable adaptive cross approximation of a single admissible block.
//!
//! The block `A_ts` is approximated by `S_r = Σ_l u_l v_lᵀ`, built from
//! residual rows and columns. The state can be advanced step by step, which
//! is what lets the block-adaptive driver raise ranks only where needed.

use crate::error::{Error, Result};
use crate::kernel::DenseMatrix;
use crate::oracle::EntryOracle;
use crate::scalar::{dot, Scalar};

/// Relative size below which a residual row counts as vanishing.
pub const VANISHING_ROW_TOL: f64 = 1e-14;

/// Guard of [`AcaBlockState::low_rank_eval`].
pub const MAX_EVAL_ENTRIES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcaStatus {
    Active,
    /// The stopping inequality held after the last step.
    Converged,
    /// Every row of the block has been used (`Z = t`); the remainder is zero.
    Exhausted,
    /// The rank exceeded half the smaller block dimension and the block was
    /// replaced by its exact dense entries.
    Densified,
}

impl AcaStatus {
    pub fn is_terminal(self) -> bool {
        self != AcaStatus::Active
    }
}

/// `ε (1 - β) / (1 + ε)`, the relative threshold of the stopping test.
pub fn stopping_factor<T: Scalar>(eps: T, beta: T) -> T {
    eps * (T::one() - beta) / (T::one() + eps)
}

#[derive(Clone, Debug)]
pub struct AcaBlockState<T> {
    rows: Vec<usize>,
    cols: Vec<usize>,
    /// Column factors `u_l`, stored contiguously (`rank * |t|`).
    u: Vec<T>,
    /// Row factors `v_l`, stored contiguously (`rank * |s|`).
    v: Vec<T>,
    rank: usize,
    used: Vec<bool>,
    num_used: usize,
    row_pivots: Vec<usize>,
    col_pivots: Vec<usize>,
    norm_sq: T,
    max_entry: T,
    status: AcaStatus,
    dense: Option<DenseMatrix<T>>,
    entries: u64,
}

impl<T: Scalar> AcaBlockState<T> {
    /// Empty approximation (`r = 0`) of the block `rows x cols`, given as
    /// global indices.
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        assert!(!rows.is_empty() && !cols.is_empty(), "empty block");
        let m = rows.len();
        Self {
            rows,
            cols,
            u: Vec::new(),
            v: Vec::new(),
            rank: 0,
            used: vec![false; m],
            num_used: 0,
            row_pivots: Vec::new(),
            col_pivots: Vec::new(),
            norm_sq: T::zero(),
            max_entry: T::zero(),
            status: AcaStatus::Active,
            dense: None,
            entries: 0,
        }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    /// Number of factor pairs `r`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn status(&self) -> AcaStatus {
        self.status
    }

    pub fn u(&self, l: usize) -> &[T] {
        let m = self.rows.len();
        &self.u[l * m..(l + 1) * m]
    }

    pub fn v(&self, l: usize) -> &[T] {
        let n = self.cols.len();
        &self.v[l * n..(l + 1) * n]
    }

    /// Local row pivots `i_1..i_r` of accepted steps.
    pub fn row_pivots(&self) -> &[usize] {
        &self.row_pivots
    }

    pub fn col_pivots(&self) -> &[usize] {
        &self.col_pivots
    }

    /// `|Z|`, rows consumed so far (accepted or vanishing).
    pub fn num_used_rows(&self) -> usize {
        self.num_used
    }

    pub fn is_row_used(&self, local: usize) -> bool {
        self.used[local]
    }

    /// Incrementally maintained `‖S_r‖²_F`.
    pub fn norm_sq(&self) -> T {
        self.norm_sq
    }

    /// Exact block entries once densified.
    pub fn dense(&self) -> Option<&DenseMatrix<T>> {
        self.dense.as_ref()
    }

    /// Oracle entries drawn by this block so far.
    pub fn entries(&self) -> u64 {
        self.entries
    }

    /// Performs up to `steps` accepted cross steps. Returns the number of
    /// accepted steps.
    pub fn advance<O: EntryOracle<T> + ?Sized>(&mut self, oracle: &O, steps: usize, eps: T, beta: T) -> usize {
        let (m, n) = (self.rows.len(), self.cols.len());
        let threshold = stopping_factor(eps, beta);
        let vanish = T::lit(VANISHING_ROW_TOL).max(T::lit(10.0) * T::epsilon());
        let mut row = vec![T::zero(); n];
        let mut col = vec![T::zero(); m];
        let mut accepted = 0;
        while accepted < steps && self.status == AcaStatus::Active {
            if self.num_used == m {
                self.status = AcaStatus::Exhausted;
                break;
            }
            let i = self.next_row_pivot();
            oracle.row(self.rows[i], &self.cols, &mut row);
            self.entries += n as u64;
            self.track_max(&row);
            for l in 0..self.rank {
                let ul_i = self.u[l * m + i];
                if ul_i != T::zero() {
                    for (rj, &vj) in row.iter_mut().zip(&self.v[l * n..(l + 1) * n]) {
                        *rj = *rj - ul_i * vj;
                    }
                }
            }
            self.used[i] = true;
            self.num_used += 1;

            let (j, vmax) = argmax_abs(&row);
            if vmax <= vanish * self.max_entry || vmax == T::zero() {
                // A zero candidate increment passes the stopping test once
                // S_r is nonzero.
                if self.rank > 0 {
                    self.status = AcaStatus::Converged;
                } else if self.num_used == m {
                    self.status = AcaStatus::Exhausted;
                }
                continue;
            }
            let inv = T::one() / row[j];
            for r in row.iter_mut() {
                *r = *r * inv;
            }
            oracle.column(&self.rows, self.cols[j], &mut col);
            self.entries += m as u64;
            self.track_max(&col);
            for l in 0..self.rank {
                let vl_j = self.v[l * n + j];
                if vl_j != T::zero() {
                    for (ci, &ui) in col.iter_mut().zip(&self.u[l * m..(l + 1) * m]) {
                        *ci = *ci - vl_j * ui;
                    }
                }
            }

            // ‖S_r‖² = ‖S_{r-1}‖² + 2 Σ_l (u_lᵀu)(v_lᵀv) + ‖u‖²‖v‖²
            let mut cross = T::zero();
            for l in 0..self.rank {
                cross = cross + dot(self.u(l), &col) * dot(self.v(l), &row);
            }
            let (uu, vv) = (dot(&col, &col), dot(&row, &row));
            self.norm_sq = self.norm_sq + T::lit(2.0) * cross + uu * vv;

            self.u.extend_from_slice(&col);
            self.v.extend_from_slice(&row);
            self.rank += 1;
            self.row_pivots.push(i);
            self.col_pivots.push(j);
            accepted += 1;

            if (uu * vv).sqrt() <= threshold * self.norm_sq.max(T::zero()).sqrt() {
                self.status = AcaStatus::Converged;
            } else if self.num_used == m {
                self.status = AcaStatus::Exhausted;
            } else if 2 * self.rank > m.min(n) {
                self.densify(oracle);
            }
        }
        accepted
    }

    /// Runs until the stopping test, exhaustion or densification.
    pub fn run_to_convergence<O: EntryOracle<T> + ?Sized>(&mut self, oracle: &O, eps: T, beta: T) -> usize {
        self.advance(oracle, usize::MAX, eps, beta)
    }

    fn next_row_pivot(&self) -> usize {
        if self.rank > 0 {
            let m = self.rows.len();
            let last = &self.u[(self.rank - 1) * m..self.rank * m];
            let mut best: Option<(usize, T)> = None;
            for (i, &ui) in last.iter().enumerate() {
                if self.used[i] {
                    continue;
                }
                let a = ui.abs();
                if best.map_or(true, |(_, b)| a > b) {
                    best = Some((i, a));
                }
            }
            if let Some((i, a)) = best {
                if a > T::zero() {
                    return i;
                }
            }
        }
        self.used.iter().position(|&u| !u).expect("an unused row exists")
    }

    fn track_max(&mut self, xs: &[T]) {
        for &x in xs {
            self.max_entry = self.max_entry.max(x.abs());
        }
    }

    fn densify<O: EntryOracle<T> + ?Sized>(&mut self, oracle: &O) {
        let (m, n) = (self.rows.len(), self.cols.len());
        let mut data = vec![T::zero(); m * n];
        for (i, chunk) in data.chunks_exact_mut(n).enumerate() {
            oracle.row(self.rows[i], &self.cols, chunk);
        }
        self.entries += (m * n) as u64;
        self.dense = Some(DenseMatrix::from_row_major(m, n, data));
        self.status = AcaStatus::Densified;
    }

    /// `S_r` as a dense matrix.
    pub fn low_rank_eval(&self) -> Result<DenseMatrix<T>> {
        let (m, n) = (self.rows.len(), self.cols.len());
        if m * n > MAX_EVAL_ENTRIES {
            return Err(Error::Size {
                what: "low-rank evaluation entries",
                value: m * n,
                limit: MAX_EVAL_ENTRIES,
            });
        }
        let mut s = DenseMatrix::zeros(m, n);
        for l in 0..self.rank {
            let (u, v) = (self.u(l), self.v(l));
            for (i, &ui) in u.iter().enumerate() {
                for (j, &vj) in v.iter().enumerate() {
                    s.set(i, j, s.get(i, j) + ui * vj);
                }
            }
        }
        Ok(s)
    }

    /// `Σ_{l = from+1}^{to} u_l (v_lᵀ x)`, i.e. factors `from..to`.
    pub fn apply_partial(&self, x: &[T], from: usize, to: usize) -> Result<Vec<T>> {
        if from > to || to > self.rank {
            return Err(Error::RankRange {
                from,
                to,
                rank: self.rank,
            });
        }
        if x.len() != self.cols.len() {
            return Err(Error::Dimension {
                expected: self.cols.len(),
                actual: x.len(),
            });
        }
        let mut y = vec![T::zero(); self.rows.len()];
        self.apply_partial_add(T::one(), x, from, to, &mut y);
        Ok(y)
    }

    /// `y += alpha Σ_{l in from..to} u_l (v_lᵀ x)`; ranges must be valid.
    pub(crate) fn apply_partial_add(&self, alpha: T, x: &[T], from: usize, to: usize, y: &mut [T]) {
        debug_assert!(from <= to && to <= self.rank);
        for l in from..to {
            let c = alpha * dot(self.v(l), x);
            if c != T::zero() {
                crate::scalar::axpy(c, self.u(l), y);
            }
        }
    }

    /// `‖Σ_{l in from..to} u_l v_lᵀ‖²_F` from the factor Gramians.
    pub fn partial_norm_sq(&self, from: usize, to: usize) -> T {
        let mut s = T::zero();
        for l in from..to {
            for k in from..to {
                s = s + dot(self.u(l), self.u(k)) * dot(self.v(l), self.v(k));
            }
        }
        s.max(T::zero())
    }

    /// Bytes of the stored representation with 8-byte reals.
    pub fn storage_bytes(&self) -> usize {
        match &self.dense {
            Some(d) => 8 * d.rows() * d.cols(),
            None => 8 * self.rank * (self.rows.len() + self.cols.len()),
        }
    }
}

fn argmax_abs<T: Scalar>(xs: &[T]) -> (usize, T) {
    let mut best = (0, T::zero());
    for (j, &x) in xs.iter().enumerate() {
        if x.abs() > best.1 {
            best = (j, x.abs());
        }
    }
    best
}
