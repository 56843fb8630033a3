//! Hierarchical matrices with adaptive cross approximation for the
//! Laplace single-layer operator, and the BACA refinement loop that
//! couples low-rank accuracy to an iterative solver.

pub mod aca;
pub mod baca;
pub mod cluster;
pub mod error;
pub mod geometry;
pub mod hmatrix;
pub mod kernel;
pub mod mesh;
pub mod oracle;
pub mod pipeline;
pub mod quadrature;
pub mod scalar;
pub mod solver;

pub use aca::{AcaBlockState, AcaStatus};
pub use cluster::{Block, BlockKind, BlockPartition, ClusterTree, PartitionStats};
pub use error::{Error, Result};
pub use geometry::{BoundingBox, Vec3};
pub use baca::{baca_solve, BacaParams, BacaResult, BacaTrace};
pub use hmatrix::{HMatrix, MatvecMode, RankSplit, StorageStats};
pub use kernel::{DenseMatrix, DirichletProblem, LaplaceSlp, QuadratureOrders};
pub use mesh::{Surface, TriMesh};
pub use oracle::EntryOracle;
pub use pipeline::{RunSummary, Setup};
pub use scalar::Scalar;

pub type TriMesh64 = TriMesh<f64>;
pub type ClusterTree64 = ClusterTree<f64>;
pub type BlockPartition64 = BlockPartition<f64>;
pub type LaplaceSlp64 = LaplaceSlp<f64>;
pub type DenseMatrix64 = DenseMatrix<f64>;
pub type HMatrix64 = HMatrix<f64>;
pub type HMatrix32 = HMatrix<f32>;
pub type Setup64 = Setup<f64>;
pub type BacaParams64 = BacaParams<f64>;
