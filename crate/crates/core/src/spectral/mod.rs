//! Laplacians, their low eigenpairs, and heat kernel signatures.

mod eigen;
mod hks;
mod laplacian;
mod sparse;

pub use eigen::{default_eigen_count, eigendecompose, EigenBasis, DENSE_LIMIT, MAX_EIGENPAIRS};
pub use hks::{compute_hks, DescriptorField, TimeSteps};
pub use laplacian::{build_laplacian, cotangent_stiffness, gaussian_knn_stiffness, LaplacianPair};
pub use sparse::SparseSymmetric;

use crate::error::Result;
use crate::geom::Shape;

/// Laplacian, eigenbasis and HKS for one shape.
pub fn shape_descriptors(shape: &Shape, steps: &TimeSteps) -> Result<DescriptorField> {
    steps.validate()?;
    let lap = build_laplacian(shape)?;
    let basis = eigendecompose(&lap, default_eigen_count(shape.len()))?;
    compute_hks(&basis, &steps.times())
}
