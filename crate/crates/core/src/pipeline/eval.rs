use serde::{Deserialize, Serialize};

use crate::geom::{GroundTruthMap, NearestVertexIndex, Point3};

/// How vertices of unmatched regions enter the accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnmatchedPolicy {
    /// They count as wrong.
    #[default]
    CountWrong,
    /// They are left out of numerator and denominator.
    Exclude,
}

/// Area-weighted fraction of source vertices whose ground-truth image lies in
/// a region matched to the vertex's own region. `target[v]` is the image of
/// source vertex `v`, or `None` when it has no counterpart; such vertices are
/// left out. `sets[r]` lists the target regions matched to source region `r`.
pub fn region_accuracy(
    labels_a: &[usize],
    labels_b: &[usize],
    sets: &[Vec<usize>],
    target: &[Option<usize>],
    areas_a: &[f64],
    policy: UnmatchedPolicy,
) -> f64 {
    assert_eq!(labels_a.len(), target.len());
    assert_eq!(labels_a.len(), areas_a.len());
    let mut hit = 0.0;
    let mut total = 0.0;
    for v in 0..labels_a.len() {
        let Some(t) = target[v] else { continue };
        let set = &sets[labels_a[v]];
        if set.is_empty() && policy == UnmatchedPolicy::Exclude {
            continue;
        }
        total += areas_a[v];
        if set.contains(&labels_b[t]) {
            hit += areas_a[v];
        }
    }
    if total > 0.0 {
        hit / total
    } else {
        0.0
    }
}

pub fn ground_truth_targets(gt: &GroundTruthMap) -> Vec<Option<usize>> {
    gt.target_index.iter().map(|&t| Some(t)).collect()
}

/// Maps each target-mesh vertex to the sample of a cloud drawn from that mesh
/// nearest to it, among the samples whose nearest mesh vertex it is. Vertices
/// no sample landed on get `None`.
pub fn vertex_to_sample(mesh_positions: &[Point3], samples: &[Point3], nearest_vertex: &[usize]) -> Vec<Option<usize>> {
    let mut best: Vec<Option<(f64, usize)>> = vec![None; mesh_positions.len()];
    for (s, &v) in nearest_vertex.iter().enumerate() {
        let d = crate::geom::distance(&mesh_positions[v], &samples[s]);
        if best[v].is_none_or(|(bd, _)| d < bd) {
            best[v] = Some((d, s));
        }
    }
    best.into_iter().map(|b| b.map(|(_, s)| s)).collect()
}

/// Composes a vertex map with a per-target-vertex transfer.
pub fn compose(first: &[Option<usize>], second: &[Option<usize>]) -> Vec<Option<usize>> {
    first.iter().map(|t| t.and_then(|t| second[t])).collect()
}

/// Nearest source vertex for each query point.
pub fn nearest_vertices(positions: &[Point3], queries: &[Point3]) -> Vec<usize> {
    let index = NearestVertexIndex::new(positions);
    queries.iter().map(|q| index.nearest(q)).collect()
}
