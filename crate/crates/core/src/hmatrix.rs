//! Hierarchical matrix over a [`BlockPartition`] holding the pair
//! `(A_k, Â_k)` in one store.
//!
//! Every admissible block keeps a single [`AcaBlockState`]; `Â_k` uses all
//! of its factors and `A_k` only the first `base_rank` of them. Blocks that
//! are not admissible are stored densely and are identical in both.

use std::sync::Arc;

use rayon::prelude::*;

use crate::aca::{AcaBlockState, AcaStatus};
use crate::cluster::{Block, BlockKind, BlockPartition};
use crate::error::{Error, Result};
use crate::kernel::DenseMatrix;
use crate::oracle::EntryOracle;
use crate::scalar::Scalar;

/// Which of the three related matrices a product uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatvecMode {
    /// `A_k`
    Ak,
    /// `Â_k`
    Ahat,
    /// `W_k = A_k - Â_k`
    Wk,
}

#[derive(Clone, Debug)]
pub enum BlockData<T> {
    Dense(DenseMatrix<T>),
    LowRank {
        aca: AcaBlockState<T>,
        /// Number of factors used by `A_k`.
        base_rank: usize,
    },
}

#[derive(Clone, Debug)]
pub struct HBlock<T> {
    pub block: Block,
    pub data: BlockData<T>,
}

/// Factor split of one block at a point in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankSplit {
    pub base: usize,
    pub top: usize,
    pub dense: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StorageStats {
    pub bytes: usize,
    /// Stored bytes relative to `8 N²` bytes, in percent.
    pub compression_percent: f64,
    pub avg_rank_ak: f64,
    pub avg_rank_ahat: f64,
    pub entries: u64,
}

impl StorageStats {
    pub fn megabytes(&self) -> f64 {
        self.bytes as f64 / (1024.0 * 1024.0)
    }
}

impl<T: Scalar> HBlock<T> {
    pub fn split(&self) -> RankSplit {
        match &self.data {
            BlockData::Dense(_) => RankSplit {
                base: 0,
                top: 0,
                dense: true,
            },
            BlockData::LowRank { aca, base_rank } => RankSplit {
                base: *base_rank,
                top: aca.rank(),
                dense: aca.dense().is_some(),
            },
        }
    }

    /// Admissible block that can still be refined.
    pub fn is_active(&self) -> bool {
        matches!(&self.data, BlockData::LowRank { aca, .. } if aca.status() == AcaStatus::Active)
    }

    pub fn entries(&self) -> u64 {
        match &self.data {
            BlockData::Dense(d) => (d.rows() * d.cols()) as u64,
            BlockData::LowRank { aca, .. } => aca.entries(),
        }
    }

    pub fn storage_bytes(&self) -> usize {
        match &self.data {
            BlockData::Dense(d) => 8 * d.rows() * d.cols(),
            BlockData::LowRank { aca, .. } => aca.storage_bytes(),
        }
    }

    pub fn aca(&self) -> Option<&AcaBlockState<T>> {
        match &self.data {
            BlockData::LowRank { aca, .. } => Some(aca),
            BlockData::Dense(_) => None,
        }
    }

    /// Local product of the block in `mode` with the gathered `x_s`.
    pub fn apply_local(&self, xs: &[T], mode: MatvecMode) -> Vec<T> {
        self.apply_local_split(xs, self.split(), mode)
    }

    /// Like [`Self::apply_local`] for an earlier split of this block. Factors
    /// are append-only, so any split recorded in the past stays valid.
    pub fn apply_local_split(&self, xs: &[T], split: RankSplit, mode: MatvecMode) -> Vec<T> {
        match &self.data {
            BlockData::Dense(d) => match mode {
                MatvecMode::Wk => vec![T::zero(); d.rows()],
                _ => d.matvec(xs),
            },
            BlockData::LowRank { aca, .. } => {
                let mut y = vec![T::zero(); aca.num_rows()];
                if split.dense {
                    if mode != MatvecMode::Wk {
                        aca.dense()
                            .expect("a dense split implies a densified block")
                            .matvec_add(xs, &mut y);
                    }
                    return y;
                }
                match mode {
                    MatvecMode::Ak => aca.apply_partial_add(T::one(), xs, 0, split.base, &mut y),
                    MatvecMode::Ahat => aca.apply_partial_add(T::one(), xs, 0, split.top, &mut y),
                    MatvecMode::Wk => aca.apply_partial_add(-T::one(), xs, split.base, split.top, &mut y),
                }
                y
            }
        }
    }

    /// Squared Frobenius norm of the block in `mode`.
    pub fn norm_sq(&self, mode: MatvecMode) -> T {
        let dense_sq = |d: &DenseMatrix<T>| {
            let f = d.frobenius_norm();
            f * f
        };
        match (&self.data, mode) {
            (BlockData::Dense(_), MatvecMode::Wk) => T::zero(),
            (BlockData::Dense(d), _) => dense_sq(d),
            (BlockData::LowRank { aca, .. }, MatvecMode::Wk) if aca.dense().is_some() => T::zero(),
            (BlockData::LowRank { aca, .. }, _) if aca.dense().is_some() => dense_sq(aca.dense().unwrap()),
            (BlockData::LowRank { aca, base_rank }, MatvecMode::Ak) => aca.partial_norm_sq(0, *base_rank),
            (BlockData::LowRank { aca, .. }, MatvecMode::Ahat) => aca.partial_norm_sq(0, aca.rank()),
            (BlockData::LowRank { aca, base_rank }, MatvecMode::Wk) => {
                aca.partial_norm_sq(*base_rank, aca.rank())
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct HMatrix<T> {
    partition: Arc<BlockPartition<T>>,
    blocks: Vec<HBlock<T>>,
    look_ahead: usize,
}

fn gather<T: Scalar>(x: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| x[i]).collect()
}

impl<T: Scalar> HMatrix<T> {
    /// Standard construction: every admissible block is approximated by ACA
    /// with accuracy `eps`; `A_k = Â_k`.
    pub fn assemble_aca<O: EntryOracle<T> + ?Sized>(
        partition: Arc<BlockPartition<T>>,
        oracle: &O,
        eps: T,
        beta: T,
    ) -> Self {
        let blocks = partition
            .blocks()
            .par_iter()
            .map(|b| {
                let mut hb = Self::empty_block(&partition, b, oracle);
                if let BlockData::LowRank { aca, base_rank } = &mut hb.data {
                    aca.run_to_convergence(oracle, eps, beta);
                    *base_rank = aca.rank();
                }
                hb
            })
            .collect();
        Self {
            partition,
            blocks,
            look_ahead: 0,
        }
    }

    /// Coarse pair `(A_0, Â_0)`: `base_steps` cross steps per admissible
    /// block for `A_0`, `look_ahead` further steps for `Â_0`.
    pub fn initial<O: EntryOracle<T> + ?Sized>(
        partition: Arc<BlockPartition<T>>,
        oracle: &O,
        base_steps: usize,
        look_ahead: usize,
        eps: T,
        beta: T,
    ) -> Self {
        assert!(look_ahead > 0, "look-ahead must be positive");
        let blocks = partition
            .blocks()
            .par_iter()
            .map(|b| {
                let mut hb = Self::empty_block(&partition, b, oracle);
                if let BlockData::LowRank { aca, base_rank } = &mut hb.data {
                    aca.advance(oracle, base_steps, eps, beta);
                    *base_rank = aca.rank();
                    aca.advance(oracle, look_ahead, eps, beta);
                    if aca.status().is_terminal() {
                        *base_rank = aca.rank();
                    }
                }
                hb
            })
            .collect();
        Self {
            partition,
            blocks,
            look_ahead,
        }
    }

    fn empty_block<O: EntryOracle<T> + ?Sized>(p: &BlockPartition<T>, b: &Block, oracle: &O) -> HBlock<T> {
        let rows = p.row_indices(b);
        let cols = p.col_indices(b);
        let data = match b.kind {
            BlockKind::NonAdmissible => {
                let mut d = DenseMatrix::zeros(rows.len(), cols.len());
                let mut buf = vec![T::zero(); cols.len()];
                for (i, &gi) in rows.iter().enumerate() {
                    oracle.row(gi, cols, &mut buf);
                    for (j, &v) in buf.iter().enumerate() {
                        d.set(i, j, v);
                    }
                }
                BlockData::Dense(d)
            }
            BlockKind::Admissible => BlockData::LowRank {
                aca: AcaBlockState::new(rows.to_vec(), cols.to_vec()),
                base_rank: 0,
            },
        };
        HBlock { block: *b, data }
    }

    pub fn partition(&self) -> &Arc<BlockPartition<T>> {
        &self.partition
    }

    pub fn blocks(&self) -> &[HBlock<T>] {
        &self.blocks
    }

    pub fn size(&self) -> usize {
        self.partition.size()
    }

    pub fn look_ahead(&self) -> usize {
        self.look_ahead
    }

    /// Moves block `idx` from `A_k` to `Â_k` and advances `Â_k` by
    /// `look_ahead` cross steps. Terminal blocks end with `A_k = Â_k`.
    pub fn refine_block<O: EntryOracle<T> + ?Sized>(&mut self, idx: usize, oracle: &O, eps: T, beta: T) {
        let look_ahead = self.look_ahead;
        if let BlockData::LowRank { aca, base_rank } = &mut self.blocks[idx].data {
            *base_rank = aca.rank();
            aca.advance(oracle, look_ahead, eps, beta);
            if aca.status().is_terminal() {
                *base_rank = aca.rank();
            }
        }
    }

    /// Refines a set of distinct blocks in parallel.
    pub fn refine_blocks<O: EntryOracle<T> + ?Sized>(&mut self, marked: &[usize], oracle: &O, eps: T, beta: T) {
        let mut flags = vec![false; self.blocks.len()];
        for &m in marked {
            flags[m] = true;
        }
        let look_ahead = self.look_ahead;
        self.blocks
            .par_iter_mut()
            .zip(flags.par_iter())
            .filter(|(_, &f)| f)
            .for_each(|(hb, _)| {
                if let BlockData::LowRank { aca, base_rank } = &mut hb.data {
                    *base_rank = aca.rank();
                    aca.advance(oracle, look_ahead, eps, beta);
                    if aca.status().is_terminal() {
                        *base_rank = aca.rank();
                    }
                }
            });
    }

    /// Refines every active block until all are terminal.
    pub fn exhaust<O: EntryOracle<T> + ?Sized>(&mut self, oracle: &O, eps: T, beta: T) {
        loop {
            let active: Vec<usize> = (0..self.blocks.len()).filter(|&i| self.blocks[i].is_active()).collect();
            if active.is_empty() {
                return;
            }
            self.refine_blocks(&active, oracle, eps, beta);
        }
    }

    pub fn rank_splits(&self) -> Vec<RankSplit> {
        self.blocks.iter().map(HBlock::split).collect()
    }

    fn check_len(&self, x: &[T]) -> Result<()> {
        if x.len() != self.size() {
            return Err(Error::Dimension {
                expected: self.size(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// `y = M x` for `M` selected by `mode`. Block products run in parallel;
    /// accumulation is sequential in block order, so results are identical
    /// for any thread count.
    pub fn matvec(&self, x: &[T], mode: MatvecMode) -> Result<Vec<T>> {
        self.matvec_filtered(x, mode, |_| true)
    }

    /// Product with the matrix described by earlier `splits` (one per
    /// block, as returned by [`Self::rank_splits`]).
    pub fn matvec_at(&self, x: &[T], splits: &[RankSplit], mode: MatvecMode) -> Result<Vec<T>> {
        if splits.len() != self.blocks.len() {
            return Err(Error::Dimension {
                expected: self.blocks.len(),
                actual: splits.len(),
            });
        }
        self.check_len(x)?;
        let partials: Vec<Vec<T>> = self
            .blocks
            .par_iter()
            .zip(splits.par_iter())
            .map(|(hb, &sp)| {
                let xs = gather(x, self.partition.col_indices(&hb.block));
                hb.apply_local_split(&xs, sp, mode)
            })
            .collect();
        Ok(self.scatter(partials.into_iter().map(Some)))
    }

    /// Gathers `x_s` for block `idx`.
    pub fn gather_cols(&self, idx: usize, x: &[T]) -> Vec<T> {
        gather(x, self.partition.col_indices(&self.blocks[idx].block))
    }

    fn scatter(&self, partials: impl Iterator<Item = Option<Vec<T>>>) -> Vec<T> {
        let mut y = vec![T::zero(); self.size()];
        for (hb, part) in self.blocks.iter().zip(partials) {
            if let Some(local) = part {
                for (&gi, v) in self.partition.row_indices(&hb.block).iter().zip(local) {
                    y[gi] = y[gi] + v;
                }
            }
        }
        y
    }

    /// Product restricted to the blocks of one level of the block tree.
    pub fn matvec_level(&self, x: &[T], mode: MatvecMode, level: usize) -> Result<Vec<T>> {
        self.matvec_filtered(x, mode, |b| b.block.level == level)
    }

    fn matvec_filtered(&self, x: &[T], mode: MatvecMode, keep: impl Fn(&HBlock<T>) -> bool + Sync) -> Result<Vec<T>> {
        self.check_len(x)?;
        let partials: Vec<Option<Vec<T>>> = self
            .blocks
            .par_iter()
            .map(|hb| {
                if !keep(hb) || (mode == MatvecMode::Wk && !hb.is_wk_nonzero()) {
                    return None;
                }
                let xs = gather(x, self.partition.col_indices(&hb.block));
                Some(hb.apply_local(&xs, mode))
            })
            .collect();
        Ok(self.scatter(partials.into_iter()))
    }

    /// Per-block `‖(W_k)_ts x_s‖₂`, indexed like [`Self::blocks`] (zero for
    /// dense and terminal blocks), and `η = sqrt(Σ contributions²)`.
    pub fn estimator_contributions(&self, x: &[T]) -> Result<(Vec<T>, T)> {
        self.check_len(x)?;
        let contrib: Vec<T> = self
            .blocks
            .par_iter()
            .map(|hb| {
                if !hb.is_wk_nonzero() {
                    return T::zero();
                }
                let xs = gather(x, self.partition.col_indices(&hb.block));
                crate::scalar::norm2(&hb.apply_local(&xs, MatvecMode::Wk))
            })
            .collect();
        let eta = contrib.iter().map(|&c| c * c).sum::<T>().sqrt();
        Ok((contrib, eta))
    }

    pub fn frobenius_norm(&self, mode: MatvecMode) -> T {
        self.blocks
            .iter()
            .map(|b| b.norm_sq(mode))
            .sum::<T>()
            .sqrt()
    }

    /// Total number of oracle entries computed so far.
    pub fn entries(&self) -> u64 {
        self.blocks.iter().map(HBlock::entries).sum()
    }

    pub fn storage_stats(&self) -> StorageStats {
        let bytes: usize = self.blocks.iter().map(HBlock::storage_bytes).sum();
        let n = self.size() as f64;
        let (mut sum_ak, mut sum_hat, mut count) = (0usize, 0usize, 0usize);
        for b in &self.blocks {
            if let BlockData::LowRank { aca, base_rank } = &b.data {
                sum_ak += base_rank;
                sum_hat += aca.rank();
                count += 1;
            }
        }
        let avg = |s: usize| if count == 0 { 0.0 } else { s as f64 / count as f64 };
        StorageStats {
            bytes,
            compression_percent: 100.0 * bytes as f64 / (8.0 * n * n),
            avg_rank_ak: avg(sum_ak),
            avg_rank_ahat: avg(sum_hat),
            entries: self.entries(),
        }
    }

    /// True when every admissible block has reached a terminal status.
    pub fn is_fully_refined(&self) -> bool {
        !self.blocks.iter().any(HBlock::is_active)
    }
}

impl<T: Scalar> HBlock<T> {
    fn is_wk_nonzero(&self) -> bool {
        let s = self.split();
        !s.dense && s.top > s.base
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ClusterTree;
    use crate::kernel::{assemble_dense, LaplaceSlp, QuadratureOrders};
    use crate::mesh::generate_icosphere;
    use rand::{Rng, SeedableRng};

    fn setup(level: usize) -> (Arc<BlockPartition<f64>>, LaplaceSlp<f64>) {
        let m = generate_icosphere::<f64>(level, 1.0).unwrap();
        // A wide admissibility parameter yields low-rank blocks on coarse meshes.
        let p = BlockPartition::build(ClusterTree::build(&m, 15), 2.0);
        (Arc::new(p), LaplaceSlp::new(&m, QuadratureOrders::default()).unwrap())
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn wk_is_difference_of_modes() {
        let (p, op) = setup(2);
        let h = HMatrix::initial(p, &op, 2, 2, 1e-14, 0.8);
        let x = random_vec(320, 1);
        let ak = h.matvec(&x, MatvecMode::Ak).unwrap();
        let ah = h.matvec(&x, MatvecMode::Ahat).unwrap();
        let wk = h.matvec(&x, MatvecMode::Wk).unwrap();
        for i in 0..320 {
            assert!((ak[i] - ah[i] - wk[i]).abs() < 1e-12);
        }
        assert!(crate::scalar::norm2(&wk) > 0.0);
    }

    #[test]
    fn converged_matrix_has_zero_wk() {
        let (p, op) = setup(2);
        let h = HMatrix::assemble_aca(p, &op, 1e-6, 0.8);
        let x = random_vec(320, 2);
        assert!(h.matvec(&x, MatvecMode::Wk).unwrap().iter().all(|&v| v == 0.0));
        let (c, eta) = h.estimator_contributions(&x).unwrap();
        assert_eq!(eta, 0.0);
        assert!(c.iter().all(|&v| v == 0.0));
        assert_eq!(h.frobenius_norm(MatvecMode::Wk), 0.0);
    }

    #[test]
    fn level_matvecs_sum_to_full() {
        let (p, op) = setup(3);
        let h = HMatrix::initial(p.clone(), &op, 3, 2, 1e-14, 0.8);
        let x = random_vec(1280, 3);
        let full = h.matvec(&x, MatvecMode::Ahat).unwrap();
        let mut sum = vec![0.0; 1280];
        for level in 0..p.stats().depth {
            let part = h.matvec_level(&x, MatvecMode::Ahat, level).unwrap();
            for (s, v) in sum.iter_mut().zip(part) {
                *s += v;
            }
        }
        for (a, b) in full.iter().zip(&sum) {
            assert!((a - b).abs() < 1e-13 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let (p, op) = setup(1);
        let h = HMatrix::assemble_aca(p, &op, 1e-6, 0.8);
        assert!(matches!(
            h.matvec(&[1.0; 3], MatvecMode::Ak),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn single_block_dense_partition() {
        let m = generate_icosphere::<f64>(0, 1.0).unwrap();
        let p = Arc::new(BlockPartition::build(ClusterTree::build(&m, 50), 0.8));
        let op = LaplaceSlp::new(&m, QuadratureOrders::default()).unwrap();
        let h = HMatrix::assemble_aca(p, &op, 1e-6, 0.8);
        let s = h.storage_stats();
        assert_eq!(s.compression_percent, 100.0);
        assert_eq!(s.entries, 400);
        let dense = assemble_dense(&op).unwrap();
        let x = random_vec(20, 4);
        assert_eq!(h.matvec(&x, MatvecMode::Ahat).unwrap(), dense.matvec(&x));
    }

    #[test]
    fn frobenius_bounds_columns_of_wk() {
        let (p, op) = setup(2);
        let h = HMatrix::initial(p, &op, 1, 2, 1e-14, 0.8);
        let f = h.frobenius_norm(MatvecMode::Wk);
        for j in (0..320).step_by(7) {
            let mut e = vec![0.0; 320];
            e[j] = 1.0;
            let col = h.matvec(&e, MatvecMode::Wk).unwrap();
            assert!(crate::scalar::norm2(&col) <= f * (1.0 + 1e-12));
        }
    }

    #[test]
    fn split_invariant_for_active_blocks() {
        let (p, op) = setup(3);
        let mut h = HMatrix::initial(p, &op, 2, 2, 1e-14, 0.8);
        let active: Vec<usize> = (0..h.blocks().len()).filter(|&i| h.blocks()[i].is_active()).collect();
        h.refine_blocks(&active[..active.len() / 2], &op, 1e-14, 0.8);
        for b in h.blocks() {
            if let BlockData::LowRank { aca, base_rank } = &b.data {
                if aca.status() == AcaStatus::Active {
                    assert_eq!(aca.rank() - base_rank, 2);
                } else {
                    assert_eq!(aca.rank(), *base_rank);
                }
            }
        }
    }
}
