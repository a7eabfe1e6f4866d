use serde::{Deserialize, Serialize};

use super::graph::{build_shape_graph, ShapeGraph, DEFAULT_MIN_REGION_FRACTION};
use super::kmeans::{kmeans, KMeansOptions, KMeansResult};
use crate::error::{Error, Result};
use crate::geom::Adjacency;
use crate::spectral::DescriptorField;

/// How two graphs' node degrees are compared when choosing `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DegreeComparison {
    /// L1 distance between degree histograms plus the node-count difference.
    #[default]
    Histogram,
    /// L1 distance between descending degree lists, zero-padded.
    SortedList,
}

/// Count of nodes per degree, indexed by degree.
pub fn degree_histogram(g: &ShapeGraph) -> Vec<usize> {
    let degrees = g.degrees();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let mut h = vec![0; max + 1];
    degrees.into_iter().for_each(|d| h[d] += 1);
    h
}

pub fn degree_histogram_distance(a: &ShapeGraph, b: &ShapeGraph) -> usize {
    let (ha, hb) = (degree_histogram(a), degree_histogram(b));
    let len = ha.len().max(hb.len());
    let l1: usize = (0..len)
        .map(|i| ha.get(i).copied().unwrap_or(0).abs_diff(hb.get(i).copied().unwrap_or(0)))
        .sum();
    l1 + a.node_count().abs_diff(b.node_count())
}

pub fn sorted_degree_distance(a: &ShapeGraph, b: &ShapeGraph) -> usize {
    let sorted = |g: &ShapeGraph| {
        let mut d = g.degrees();
        d.sort_unstable_by(|x, y| y.cmp(x));
        d
    };
    let (da, db) = (sorted(a), sorted(b));
    let len = da.len().max(db.len());
    (0..len)
        .map(|i| da.get(i).copied().unwrap_or(0).abs_diff(db.get(i).copied().unwrap_or(0)))
        .sum()
}

pub fn graph_distance(a: &ShapeGraph, b: &ShapeGraph, how: DegreeComparison) -> usize {
    match how {
        DegreeComparison::Histogram => degree_histogram_distance(a, b),
        DegreeComparison::SortedList => sorted_degree_distance(a, b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub kmeans: KMeansOptions,
    pub min_region_fraction: f64,
    pub comparison: DegreeComparison,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        SegmentationParams {
            k_min: 5,
            k_max: 10,
            seed: 0,
            kmeans: KMeansOptions::default(),
            min_region_fraction: DEFAULT_MIN_REGION_FRACTION,
            comparison: DegreeComparison::Histogram,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_min < 2 || self.k_max > 20 || self.k_min > self.k_max {
            return Err(Error::InvalidInput(format!(
                "cluster range {}..={} must lie within 2..=20",
                self.k_min, self.k_max
            )));
        }
        if !(0.0..0.5).contains(&self.min_region_fraction) {
            return Err(Error::InvalidInput(format!(
                "minimum region fraction {} outside [0, 0.5)",
                self.min_region_fraction
            )));
        }
        Ok(())
    }
}

/// One side of a joint segmentation input.
#[derive(Debug, Clone, Copy)]
pub struct SegmentationInput<'a> {
    pub adjacency: &'a Adjacency,
    pub areas: &'a [f64],
    pub descriptors: &'a DescriptorField,
}

/// k-means on the merged descriptor sets, split back per shape.
#[derive(Debug, Clone, PartialEq)]
pub struct JointClustering {
    pub k: usize,
    pub dims: usize,
    pub centroids: Vec<f64>,
    pub inertia: f64,
    pub nearest_a: Vec<usize>,
    pub second_a: Vec<usize>,
    pub nearest_b: Vec<usize>,
    pub second_b: Vec<usize>,
}

pub fn joint_kmeans(
    a: &DescriptorField,
    b: &DescriptorField,
    k: usize,
    seed: u64,
    opts: &KMeansOptions,
) -> Result<JointClustering> {
    if a.dims() != b.dims() {
        return Err(Error::InvalidInput(format!(
            "descriptor dimensions differ: {} vs {}",
            a.dims(),
            b.dims()
        )));
    }
    let mut points = Vec::with_capacity(a.values().len() + b.values().len());
    points.extend_from_slice(a.values());
    points.extend_from_slice(b.values());
    let KMeansResult {
        k,
        dims,
        centroids,
        mut nearest,
        mut second,
        inertia,
    } = kmeans(&points, a.dims(), k, seed, opts)?;
    let nearest_b = nearest.split_off(a.len());
    let second_b = second.split_off(a.len());
    Ok(JointClustering {
        k,
        dims,
        centroids,
        inertia,
        nearest_a: nearest,
        second_a: second,
        nearest_b,
        second_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KCandidate {
    pub k: usize,
    pub distance: usize,
    pub nodes_a: usize,
    pub nodes_b: usize,
}

#[derive(Debug, Clone)]
pub struct JointSegmentation {
    pub k: usize,
    pub distance: usize,
    pub clustering: JointClustering,
    pub graph_a: ShapeGraph,
    pub graph_b: ShapeGraph,
    /// Every evaluated `k`, ascending.
    pub candidates: Vec<KCandidate>,
}

/// Clusters, then builds both shape graphs for one `k`.
pub fn segment_with_k(
    a: SegmentationInput<'_>,
    b: SegmentationInput<'_>,
    k: usize,
    params: &SegmentationParams,
) -> Result<(JointClustering, ShapeGraph, ShapeGraph)> {
    let clustering = joint_kmeans(a.descriptors, b.descriptors, k, params.seed, &params.kmeans)?;
    let graph_a = build_shape_graph(
        a.adjacency,
        a.areas,
        &clustering.nearest_a,
        &clustering.second_a,
        params.min_region_fraction,
    );
    let graph_b = build_shape_graph(
        b.adjacency,
        b.areas,
        &clustering.nearest_b,
        &clustering.second_b,
        params.min_region_fraction,
    );
    Ok((clustering, graph_a, graph_b))
}

/// Tries each `k` in range and keeps the pair of graphs whose degree
/// statistics agree best, preferring smaller `k` on ties.
pub fn select_k(
    a: SegmentationInput<'_>,
    b: SegmentationInput<'_>,
    params: &SegmentationParams,
) -> Result<JointSegmentation> {
    params.validate()?;
    let mut best: Option<JointSegmentation> = None;
    let mut candidates = Vec::new();
    for k in params.k_min..=params.k_max {
        let (clustering, graph_a, graph_b) = segment_with_k(a, b, k, params)?;
        let distance = graph_distance(&graph_a, &graph_b, params.comparison);
        candidates.push(KCandidate {
            k,
            distance,
            nodes_a: graph_a.node_count(),
            nodes_b: graph_b.node_count(),
        });
        if best.as_ref().map_or(true, |s| distance < s.distance) {
            best = Some(JointSegmentation {
                k,
                distance,
                clustering,
                graph_a,
                graph_b,
                candidates: Vec::new(),
            });
        }
        if distance == 0 {
            // cannot be beaten by a larger k
            break;
        }
    }
    let mut best = best.expect("non-empty k range");
    best.candidates = candidates;
    Ok(best)
}
