use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{triangle_area, NearestVertexIndex, Point3, Shape, ShapeKind, DEFAULT_KNN};
use crate::error::{Error, Result};

/// A point cloud drawn from a mesh, with per-sample provenance.
#[derive(Debug, Clone)]
pub struct SampledCloud {
    pub cloud: Shape,
    /// Sample positions in the mesh's (normalized) coordinates, noise included.
    pub raw_positions: Vec<Point3>,
    /// Triangle each sample was drawn from.
    pub source_triangle: Vec<usize>,
    /// Mesh vertex nearest to each (noisy) sample.
    pub nearest_vertex: Vec<usize>,
}

/// Draws `n_points` area-uniform samples from a mesh and jitters each
/// coordinate by up to `noise_frac` times the mesh's bounding-box diagonal.
pub fn sample_point_cloud(
    mesh: &Shape,
    n_points: usize,
    noise_frac: f64,
    seed: u64,
) -> Result<SampledCloud> {
    if mesh.kind() != ShapeKind::Mesh {
        return Err(Error::InvalidInput("sampling requires a triangle mesh".into()));
    }
    if n_points < DEFAULT_KNN + 1 {
        return Err(Error::TooFewPoints {
            found: n_points,
            needed: DEFAULT_KNN + 1,
        });
    }
    if !(0.0..=0.5).contains(&noise_frac) {
        return Err(Error::InvalidInput(format!(
            "noise fraction {noise_frac} outside [0, 0.5]"
        )));
    }

    let pos = mesh.positions();
    let tris = mesh.triangles();
    let mut cumulative = Vec::with_capacity(tris.len());
    let mut acc = 0.0;
    for t in tris {
        acc += triangle_area(&pos[t[0]], &pos[t[1]], &pos[t[2]]);
        cumulative.push(acc);
    }
    let total = acc;
    let amplitude = noise_frac * mesh.bbox_diagonal();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw_positions = Vec::with_capacity(n_points);
    let mut source_triangle = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let r = rng.random::<f64>() * total;
        let t = cumulative.partition_point(|&c| c <= r).min(tris.len() - 1);
        let [a, b, c] = tris[t].map(|v| pos[v]);
        let s = rng.random::<f64>().sqrt();
        let u = rng.random::<f64>();
        let (wa, wb, wc) = (1.0 - s, s * (1.0 - u), s * u);
        let mut p = [0.0; 3];
        for i in 0..3 {
            p[i] = wa * a[i] + wb * b[i] + wc * c[i];
        }
        // drawn even at zero noise so equal seeds share base samples across noise levels
        for c in &mut p {
            *c += amplitude * rng.random_range(-1.0..=1.0);
        }
        raw_positions.push(p);
        source_triangle.push(t);
    }

    let index = NearestVertexIndex::new(pos);
    let nearest_vertex = raw_positions.iter().map(|p| index.nearest(p)).collect();
    let cloud = Shape::point_cloud(raw_positions.clone(), DEFAULT_KNN)?;
    Ok(SampledCloud {
        cloud,
        raw_positions,
        source_triangle,
        nearest_vertex,
    })
}
