//! Surface representations shared by every stage of the pipeline.
//!
//! A [`Shape`] is either a triangle mesh or a point cloud. Both carry a
//! symmetric vertex adjacency with Euclidean edge lengths (mesh edges, or the
//! union of directed k-nearest-neighbour edges) and per-vertex area weights
//! that sum to one.

mod geodesic;
pub mod io;
mod knn;
mod sampling;

pub use geodesic::{geodesic_distances, multi_source_dijkstra, relax_distances};
pub use knn::{bridge_components, knn_edges, NearestVertexIndex};
pub use sampling::{sample_point_cloud, SampledCloud};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neighbour count used to connect point clouds.
pub const DEFAULT_KNN: usize = 6;

/// Triangles smaller than this fraction of the total area are dropped at load.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-12;

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Mesh,
    PointCloud,
}

/// Symmetric adjacency in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    lengths: Vec<f64>,
}

impl Adjacency {
    /// Builds a symmetric adjacency from undirected weighted edges.
    /// Self-loops are ignored and duplicate edges keep their first length.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(a, b, len) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} vertices");
            if a == b {
                continue;
            }
            lists[a].push((b, len));
            lists[b].push((a, len));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::new();
        let mut lengths = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by_key(|&mut (v, _)| v);
            for &(v, len) in list.iter() {
                neighbors.push(v);
                lengths.push(len);
            }
            offsets.push(neighbors.len());
        }
        Adjacency {
            offsets,
            neighbors,
            lengths,
        }
    }

    /// Unit-length edges; handy for abstract graphs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let weighted: Vec<_> = edges.iter().map(|&(a, b)| (a, b, 1.0)).collect();
        Self::from_weighted_edges(n, &weighted)
    }

    /// Edges with lengths taken from vertex positions.
    pub fn from_positions(positions: &[Point3], edges: &[(usize, usize)]) -> Self {
        let weighted: Vec<_> = edges
            .iter()
            .map(|&(a, b)| (a, b, distance(&positions[a], &positions[b])))
            .collect();
        Self::from_weighted_edges(positions.len(), &weighted)
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Neighbours of `v` paired with edge lengths.
    pub fn weighted_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.lengths[range].iter().copied())
    }

    /// Each undirected edge once, as `(a, b, length)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.len()).flat_map(move |a| {
            self.weighted_neighbors(a)
                .filter(move |&(b, _)| a < b)
                .map(move |(b, len)| (a, b, len))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Connectivity {
    Triangles(Vec<[usize; 3]>),
    Knn { k: usize, edges: Vec<(usize, usize)> },
}

/// A validated, normalized surface.
///
/// Meshes are rescaled to unit total area. Point clouds are rescaled to a unit
/// bounding-box diagonal; their Laplacian is scale free, so this only fixes
/// the units of geodesic distances. The applied factor is kept in
/// [`Shape::scale`].
#[derive(Debug, Clone)]
pub struct Shape {
    positions: Vec<Point3>,
    connectivity: Connectivity,
    adjacency: Adjacency,
    vertex_area: Vec<f64>,
    kind: ShapeKind,
    scale: f64,
}

impl Shape {
    /// Builds a mesh, dropping degenerate triangles and rescaling to unit area.
    pub fn mesh(mut positions: Vec<Point3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::NoTriangles);
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInput(format!(
                    "triangle {t} references vertex {bad}, mesh has {n} vertices"
                )));
            }
        }
        let areas: Vec<f64> = triangles
            .iter()
            .map(|t| triangle_area(&positions[t[0]], &positions[t[1]], &positions[t[2]]))
            .collect();
        let total: f64 = areas.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NoTriangles);
        }
        let min_area = DEGENERATE_AREA_FRACTION * total;
        let triangles: Vec<[usize; 3]> = triangles
            .into_iter()
            .zip(&areas)
            .filter(|(t, &a)| a >= min_area && t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .map(|(t, _)| t)
            .collect();
        if triangles.is_empty() {
            return Err(Error::NoTriangles);
        }

        let total: f64 = triangles
            .iter()
            .map(|t| triangle_area(&positions[t[0]], &positions[t[1]], &positions[t[2]]))
            .sum();
        let scale = 1.0 / total.sqrt();
        for p in &mut positions {
            for c in p.iter_mut() {
                *c *= scale;
            }
        }

        let vertex_area = mesh_vertex_areas(&positions, &triangles);
        if let Some(v) = vertex_area.iter().position(|&a| a <= 0.0) {
            return Err(Error::IsolatedVertex(v));
        }
        let edges = triangle_edges(&triangles);
        let adjacency = Adjacency::from_positions(&positions, &edges);

        Ok(Shape {
            positions,
            connectivity: Connectivity::Triangles(triangles),
            adjacency,
            vertex_area,
            kind: ShapeKind::Mesh,
            scale,
        })
    }

    /// Builds a point cloud connected by the symmetrized `k`-NN graph, with
    /// separate components joined by their shortest connecting edges.
    pub fn point_cloud(mut positions: Vec<Point3>, k: usize) -> Result<Self> {
        let n = positions.len();
        if k == 0 {
            return Err(Error::InvalidInput("k must be positive".into()));
        }
        if n < k + 1 {
            return Err(Error::TooFewPoints {
                found: n,
                needed: k + 1,
            });
        }
        if positions.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite point coordinate".into()));
        }
        let diag = bbox_diagonal(&positions);
        if diag <= 0.0 {
            return Err(Error::InvalidInput("all points coincide".into()));
        }
        let scale = 1.0 / diag;
        for p in &mut positions {
            for c in p.iter_mut() {
                *c *= scale;
            }
        }
        let mut edges = knn_edges(&positions, k);
        bridge_components(&positions, &mut edges);
        let adjacency = Adjacency::from_positions(&positions, &edges);
        debug_assert!((0..n).all(|v| adjacency.degree(v) >= 1));
        let vertex_area = vec![1.0 / n as f64; n];
        Ok(Shape {
            positions,
            connectivity: Connectivity::Knn { k, edges },
            adjacency,
            vertex_area,
            kind: ShapeKind::PointCloud,
            scale,
        })
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn connectivity(&self) -> &Connectivity {
        &self.connectivity
    }

    /// Triangles of a mesh; empty for point clouds.
    pub fn triangles(&self) -> &[[usize; 3]] {
        match &self.connectivity {
            Connectivity::Triangles(t) => t,
            Connectivity::Knn { .. } => &[],
        }
    }

    pub fn adjacency(&self) -> &Adjacency {
        &self.adjacency
    }

    /// Per-vertex area fractions, summing to one.
    pub fn vertex_areas(&self) -> &[f64] {
        &self.vertex_area
    }

    /// Factor that was applied to the input coordinates.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(&self.positions)
    }
}

/// One third of the incident triangle areas per vertex, normalized to sum 1.
pub fn mesh_vertex_areas(positions: &[Point3], triangles: &[[usize; 3]]) -> Vec<f64> {
    let mut areas = vec![0.0; positions.len()];
    for t in triangles {
        let a = triangle_area(&positions[t[0]], &positions[t[1]], &positions[t[2]]) / 3.0;
        for &v in t {
            areas[v] += a;
        }
    }
    let total: f64 = areas.iter().sum();
    if total > 0.0 {
        for a in &mut areas {
            *a /= total;
        }
    }
    areas
}

pub(crate) fn triangle_edges(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    triangles
        .iter()
        .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
        .collect()
}

pub fn triangle_area(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    0.5 * norm(&cross(&sub(b, a), &sub(c, a)))
}

pub fn bbox_diagonal(points: &[Point3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for i in 0..3 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if points.is_empty() {
        return 0.0;
    }
    norm(&sub(&hi, &lo))
}

pub(crate) fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &Point3, b: &Point3) -> f64 {
    norm(&sub(a, b))
}

/// Dense vertex-to-vertex map from a source shape onto a target shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthMap {
    pub target_index: Vec<usize>,
}

impl GroundTruthMap {
    pub fn identity(n: usize) -> Self {
        GroundTruthMap {
            target_index: (0..n).collect(),
        }
    }

    pub fn validate(&self, n_source: usize, n_target: usize) -> Result<()> {
        if self.target_index.len() != n_source {
            return Err(Error::InvalidInput(format!(
                "ground truth has {} entries, source shape has {n_source} vertices",
                self.target_index.len()
            )));
        }
        if let Some((i, &t)) = self
            .target_index
            .iter()
            .enumerate()
            .find(|(_, &t)| t >= n_target)
        {
            return Err(Error::InvalidInput(format!(
                "ground truth line {} maps to {t}, target has {n_target} vertices",
                i + 1
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn regular_tetrahedron() -> Shape {
        let p = vec![
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ];
        let t = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        Shape::mesh(p, t).unwrap()
    }

    #[test]
    fn tetrahedron_vertex_areas_are_quarters() {
        let s = regular_tetrahedron();
        for &a in s.vertex_areas() {
            assert_relative_eq!(a, 0.25, epsilon = 1e-12);
        }
        let total: f64 = s
            .triangles()
            .iter()
            .map(|t| triangle_area(&s.positions()[t[0]], &s.positions()[t[1]], &s.positions()[t[2]]))
            .sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_equilateral_triangle_has_equal_thirds() {
        let h = 3f64.sqrt() / 2.0;
        let s = Shape::mesh(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, h, 0.0]], vec![[0, 1, 2]])
            .unwrap();
        for &a in s.vertex_areas() {
            assert_relative_eq!(a, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_triangle_square_shares_area_on_diagonal() {
        // unit square split along 0-2: both faces have area 0.5
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let s = Shape::mesh(p, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let a = s.vertex_areas();
        assert_relative_eq!(a[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(a[2], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(a[1], 1.0 / 6.0, epsilon = 1e-12);
        assert_relative_eq!(a[3], 1.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_triangles_are_dropped() {
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [2.0, 0.0, 0.0]];
        // second triangle is collinear
        let s = Shape::mesh(p.clone(), vec![[0, 1, 2], [0, 1, 3], [1, 2, 1]]);
        // vertex 3 only appears in the dropped triangle
        assert!(matches!(s, Err(Error::IsolatedVertex(3))));
        let s = Shape::mesh(p[..3].to_vec(), vec![[0, 1, 2], [0, 1, 1]]).unwrap();
        assert_eq!(s.triangles().len(), 1);
    }

    #[test]
    fn no_valid_triangles_is_an_error() {
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        assert!(matches!(Shape::mesh(p, vec![[0, 1, 2]]), Err(Error::NoTriangles)));
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert!(matches!(Shape::mesh(p, vec![[0, 1, 5]]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn point_cloud_needs_k_plus_one_points() {
        let p = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let err = Shape::point_cloud(p, DEFAULT_KNN).unwrap_err();
        assert!(matches!(err, Error::TooFewPoints { found: 3, needed: 7 }));
        assert!(err.to_string().contains("fewer than k+1 points"));
    }

    #[test]
    fn point_cloud_is_symmetric_with_uniform_areas() {
        let p: Vec<Point3> = (0..500)
            .map(|i| {
                let t = i as f64 * 0.1;
                [t.cos() * (1.0 + 0.001 * i as f64), t.sin(), 0.01 * i as f64]
            })
            .collect();
        let s = Shape::point_cloud(p, 6).unwrap();
        assert_relative_eq!(s.bbox_diagonal(), 1.0, epsilon = 1e-12);
        for &a in s.vertex_areas() {
            assert_relative_eq!(a, 0.002, epsilon = 1e-15);
        }
        let adj = s.adjacency();
        for v in 0..s.len() {
            assert!(adj.degree(v) >= 6);
            for &u in adj.neighbors(v) {
                assert!(adj.neighbors(u).contains(&v));
            }
        }
    }

    #[test]
    fn adjacency_dedups_and_ignores_loops() {
        let adj = Adjacency::from_edges(3, &[(0, 1), (1, 0), (1, 1), (1, 2)]);
        assert_eq!(adj.neighbors(1), &[0, 2]);
        assert_eq!(adj.edge_count(), 2);
        assert_eq!(adj.edges().collect::<Vec<_>>(), vec![(0, 1, 1.0), (1, 2, 1.0)]);
    }

    #[test]
    fn ground_truth_validation() {
        let gt = GroundTruthMap {
            target_index: vec![0, 1, 4],
        };
        assert!(gt.validate(3, 5).is_ok());
        assert!(gt.validate(3, 4).is_err());
        assert!(gt.validate(2, 5).is_err());
    }
}
