//! Cluster tree over the panel index set and the block partition of
//! `I x I` induced by the admissibility condition.

use std::collections::HashMap;
use std::ops::Range;

use crate::geometry::{BoundingBox, Vec3};
use crate::mesh::TriMesh;
use crate::scalar::Scalar;

/// Node of a [`ClusterTree`]; its index set is `tree.indices(node)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterNode<T> {
    /// Positions in the tree's permutation array.
    pub range: Range<usize>,
    /// Bounding box of the union of the supports of the node's panels.
    pub bbox: BoundingBox<T>,
    pub level: usize,
    pub children: Vec<usize>,
}

impl<T> ClusterNode<T> {
    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Binary geometric cluster tree. Node 0 is the root and holds all indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterTree<T> {
    nodes: Vec<ClusterNode<T>>,
    perm: Vec<usize>,
    leaf_size: usize,
}

impl<T: Scalar> ClusterTree<T> {
    /// Splits clusters at the median panel centroid along the longest
    /// bounding-box axis until they hold at most `leaf_size` panels.
    pub fn build(mesh: &TriMesh<T>, leaf_size: usize) -> Self {
        assert!(leaf_size > 0, "leaf size must be positive");
        let n = mesh.num_triangles();
        assert!(n > 0, "cannot cluster an empty mesh");
        let third = T::one() / T::lit(3.0);
        let mut centroids = Vec::with_capacity(n);
        let mut boxes = Vec::with_capacity(n);
        for t in mesh.triangles() {
            let [a, b, c] = t.map(|k| mesh.vertices()[k]);
            centroids.push((a + b + c).scale(third));
            let mut bb = BoundingBox::empty();
            bb.include(a);
            bb.include(b);
            bb.include(c);
            boxes.push(bb);
        }
        Self::from_supports(&centroids, &boxes, leaf_size)
    }

    /// Builds the tree from per-index reference points and support boxes.
    pub fn from_supports(centroids: &[Vec3<T>], boxes: &[BoundingBox<T>], leaf_size: usize) -> Self {
        let n = centroids.len();
        let mut tree = Self {
            nodes: Vec::new(),
            perm: (0..n).collect(),
            leaf_size,
        };
        let mut stack = vec![(0..n, 0usize, None::<usize>)];
        // Depth-first with the left child processed first, so node ids follow
        // pre-order.
        while let Some((range, level, parent)) = stack.pop() {
            let bbox = tree.perm[range.clone()]
                .iter()
                .fold(BoundingBox::empty(), |b, &i| b.merge(&boxes[i]));
            let id = tree.nodes.len();
            tree.nodes.push(ClusterNode {
                range: range.clone(),
                bbox,
                level,
                children: Vec::new(),
            });
            if let Some(p) = parent {
                tree.nodes[p].children.push(id);
            }
            if range.len() <= leaf_size {
                continue;
            }
            let axis = bbox.longest_axis();
            tree.perm[range.clone()].sort_by(|&a, &b| {
                centroids[a][axis]
                    .partial_cmp(&centroids[b][axis])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.cmp(&b))
            });
            let mid = range.start + range.len() / 2;
            stack.push((mid..range.end, level + 1, Some(id)));
            stack.push((range.start..mid, level + 1, Some(id)));
        }
        tree
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[ClusterNode<T>] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &ClusterNode<T> {
        &self.nodes[id]
    }

    /// Panel indices of a cluster.
    pub fn indices(&self, id: usize) -> &[usize] {
        &self.perm[self.nodes[id].range.clone()]
    }

    /// Permutation mapping tree order to panel indices.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn leaf_size(&self) -> usize {
        self.leaf_size
    }

    pub fn num_indices(&self) -> usize {
        self.perm.len()
    }

    /// Largest node level.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf())
    }
}

/// `min(diam X_t, diam X_s) < beta * dist(X_t, X_s)` evaluated on bounding
/// boxes (box diagonal and box gap). Boxes enclose the supports, so the
/// test never accepts a pair the exact sets would reject.
pub fn is_admissible<T: Scalar>(bt: &BoundingBox<T>, bs: &BoundingBox<T>, beta: T) -> bool {
    bt.diameter().min(bs.diameter()) < beta * bt.distance(bs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Admissible,
    NonAdmissible,
}

/// Leaf `t x s` of the block cluster tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub row: usize,
    pub col: usize,
    pub kind: BlockKind,
    pub level: usize,
}

impl Block {
    pub fn is_admissible(&self) -> bool {
        self.kind == BlockKind::Admissible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartitionStats {
    /// Number of block levels `L`.
    pub depth: usize,
    pub sparsity: usize,
    pub sparsity_rows: usize,
    pub sparsity_cols: usize,
    pub admissible: usize,
    pub non_admissible: usize,
}

/// Partition `P = P_adm ∪ P_non-adm` of `I x I`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartition<T> {
    tree: ClusterTree<T>,
    blocks: Vec<Block>,
    beta: T,
    stats: PartitionStats,
}

impl<T: Scalar> BlockPartition<T> {
    /// Descends the row and column trees together until a pair is
    /// admissible or both clusters are leaves; if only one is a leaf the
    /// other keeps descending.
    pub fn build(tree: ClusterTree<T>, beta: T) -> Self {
        let mut blocks = Vec::new();
        let mut stack = vec![(tree.root(), tree.root(), 0usize)];
        while let Some((t, s, level)) = stack.pop() {
            let (nt, ns) = (tree.node(t), tree.node(s));
            if is_admissible(&nt.bbox, &ns.bbox, beta) {
                blocks.push(Block {
                    row: t,
                    col: s,
                    kind: BlockKind::Admissible,
                    level,
                });
                continue;
            }
            if nt.is_leaf() && ns.is_leaf() {
                blocks.push(Block {
                    row: t,
                    col: s,
                    kind: BlockKind::NonAdmissible,
                    level,
                });
                continue;
            }
            let rows: Vec<usize> = if nt.is_leaf() { vec![t] } else { nt.children.clone() };
            let cols: Vec<usize> = if ns.is_leaf() { vec![s] } else { ns.children.clone() };
            // Reverse push keeps the pop order row-major.
            for &r in rows.iter().rev() {
                for &c in cols.iter().rev() {
                    stack.push((r, c, level + 1));
                }
            }
        }
        let stats = compute_stats(&blocks);
        Self {
            tree,
            blocks,
            beta,
            stats,
        }
    }

    pub fn tree(&self) -> &ClusterTree<T> {
        &self.tree
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn size(&self) -> usize {
        self.tree.num_indices()
    }

    pub fn stats(&self) -> PartitionStats {
        self.stats
    }

    pub fn row_indices(&self, b: &Block) -> &[usize] {
        self.tree.indices(b.row)
    }

    pub fn col_indices(&self, b: &Block) -> &[usize] {
        self.tree.indices(b.col)
    }
}

fn compute_stats(blocks: &[Block]) -> PartitionStats {
    let mut per_row: HashMap<usize, usize> = HashMap::new();
    let mut per_col: HashMap<usize, usize> = HashMap::new();
    for b in blocks {
        *per_row.entry(b.row).or_default() += 1;
        *per_col.entry(b.col).or_default() += 1;
    }
    let sparsity_rows = per_row.values().copied().max().unwrap_or(0);
    let sparsity_cols = per_col.values().copied().max().unwrap_or(0);
    let admissible = blocks.iter().filter(|b| b.is_admissible()).count();
    PartitionStats {
        depth: blocks.iter().map(|b| b.level).max().map_or(0, |l| l + 1),
        sparsity: sparsity_rows.max(sparsity_cols),
        sparsity_rows,
        sparsity_cols,
        admissible,
        non_admissible: blocks.len() - admissible,
    }
}

/// Free-function form of [`BlockPartition::stats`].
pub fn partition_stats<T: Scalar>(p: &BlockPartition<T>) -> PartitionStats {
    p.stats()
}
