//! Galerkin discretisation of the 3D Laplace single-layer operator with
//! piecewise-constant basis functions, and the Dirichlet model problem.

mod dense;
mod potential;
mod problem;
mod slp;

pub use dense::{assemble_dense, DenseMatrix, MAX_DENSE_SIZE};
pub use potential::triangle_potential;
pub use problem::{
    assemble_rhs, exact_neumann, panel_means_of_exact, relative_l2_error, winding_number,
    DirichletProblem,
};
pub use slp::{LaplaceSlp, QuadratureOrders};

use crate::geometry::Vec3;
use crate::scalar::Scalar;

/// Fundamental solution `S(x) = 1 / (4π |x|)`.
pub fn fundamental_solution<T: Scalar>(x: Vec3<T>) -> T {
    T::one() / (T::lit(4.0) * T::PI() * x.norm())
}
