use super::SparseSymmetric;
use crate::error::{Error, Result};
use crate::geom::{cross, dot, norm, sub, Adjacency, Point3, Shape, ShapeKind};

/// Discrete Laplace-Beltrami operator as a stiffness/mass pair,
/// `c S φ = λ M φ` with `c = eigenvalue_scale`.
#[derive(Debug, Clone)]
pub struct LaplacianPair {
    /// Positive semidefinite, rows sum to zero.
    pub stiffness: SparseSymmetric,
    /// Lumped (diagonal) mass.
    pub mass: Vec<f64>,
    /// Gaussian bandwidth used for point clouds.
    pub bandwidth: Option<f64>,
    /// 1 for meshes. For point clouds, the factor that turns the Gaussian
    /// graph spectrum into a Laplace-Beltrami spectrum in normalized units.
    pub eigenvalue_scale: f64,
}

impl LaplacianPair {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }
}

pub fn build_laplacian(shape: &Shape) -> Result<LaplacianPair> {
    match shape.kind() {
        ShapeKind::Mesh => Ok(LaplacianPair {
            stiffness: cotangent_stiffness(shape.positions(), shape.triangles()),
            mass: shape.vertex_areas().to_vec(),
            bandwidth: None,
            eigenvalue_scale: 1.0,
        }),
        ShapeKind::PointCloud => {
            let (stiffness, h) = gaussian_knn_stiffness(shape.adjacency())?;
            Ok(LaplacianPair {
                stiffness,
                mass: shape.vertex_areas().to_vec(),
                bandwidth: Some(h),
                eigenvalue_scale: 1.0 / knn_second_moment(shape.adjacency(), h),
            })
        }
    }
}

/// `½ Σ w d²` over the graph's edges. A smooth `f` gives
/// `(S f)_i ≈ ¼ Σ_j w_ij d_ij² (-Δf)_i`, so dividing the Gaussian stiffness by
/// this moment makes it approximate Laplace-Beltrami on a unit-mass cloud.
/// The moment carries the cloud's length scale, so it is kept out of the
/// (scale-free) stiffness matrix.
pub fn knn_second_moment(adj: &Adjacency, h: f64) -> f64 {
    0.5 * adj
        .edges()
        .map(|(_, _, d)| (-d * d / (2.0 * h * h)).exp() * d * d)
        .sum::<f64>()
}

/// Cotangent weights: edge `(j, k)` opposite angle `α` in a triangle gets
/// `cot α / 2` from that triangle.
pub fn cotangent_stiffness(positions: &[Point3], triangles: &[[usize; 3]]) -> SparseSymmetric {
    let n = positions.len();
    let mut entries = Vec::with_capacity(triangles.len() * 6);
    for t in triangles {
        for c in 0..3 {
            let (i, j, k) = (t[c], t[(c + 1) % 3], t[(c + 2) % 3]);
            let u = sub(&positions[j], &positions[i]);
            let v = sub(&positions[k], &positions[i]);
            let w = 0.5 * dot(&u, &v) / norm(&cross(&u, &v));
            entries.push((j, k, -w));
            entries.push((j, j, w));
            entries.push((k, k, w));
        }
    }
    SparseSymmetric::from_entries(n, entries)
}

/// Degree-minus-weight Laplacian with `w = exp(-d² / (2h²))` on the graph's
/// edges, `h` the mean edge length. Returns the matrix and `h`.
pub fn gaussian_knn_stiffness(adj: &Adjacency) -> Result<(SparseSymmetric, f64)> {
    let n = adj.len();
    if let Some(v) = (0..n).find(|&v| adj.degree(v) == 0) {
        return Err(Error::IsolatedVertex(v));
    }
    let edges: Vec<(usize, usize, f64)> = adj.edges().collect();
    let h = edges.iter().map(|e| e.2).sum::<f64>() / edges.len() as f64;
    let denom = 2.0 * h * h;
    let mut entries = Vec::with_capacity(edges.len() * 3);
    for &(a, b, d) in &edges {
        let w = (-d * d / denom).exp();
        entries.push((a, b, -w));
        entries.push((a, a, w));
        entries.push((b, b, w));
    }
    Ok((SparseSymmetric::from_entries(n, entries), h))
}
