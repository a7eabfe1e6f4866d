//! Joint segmentation of two shapes into comparable region graphs.

mod graph;
mod kmeans;
mod rank;
mod select;

pub use graph::{build_shape_graph, merge_small_regions, RegionNode, ShapeGraph, DEFAULT_MIN_REGION_FRACTION};
pub use kmeans::{kmeans, KMeansOptions, KMeansResult};
pub use rank::{align_ranks, area_cdf, QuantileTable, RankAligner};
pub use select::{
    degree_histogram, degree_histogram_distance, graph_distance, joint_kmeans, segment_with_k, select_k,
    sorted_degree_distance, DegreeComparison, JointClustering, JointSegmentation, KCandidate,
    SegmentationInput, SegmentationParams,
};
