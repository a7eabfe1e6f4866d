use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Adjacency, Shape};

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    dist: f64,
    vertex: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties on vertex index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path distance over the shape's edge graph from the nearest source.
/// Unreachable vertices get `f64::INFINITY`.
pub fn geodesic_distances(shape: &Shape, sources: &[usize]) -> Vec<f64> {
    multi_source_dijkstra(shape.adjacency(), sources)
}

pub fn multi_source_dijkstra(adj: &Adjacency, sources: &[usize]) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    relax_distances(adj, &mut dist, sources);
    dist
}

/// Lowers `dist` in place to account for additional zero-distance sources.
/// Only vertices whose distance actually decreases are revisited.
pub fn relax_distances(adj: &Adjacency, dist: &mut [f64], new_sources: &[usize]) {
    let mut heap = BinaryHeap::new();
    for &s in new_sources {
        if dist[s] > 0.0 {
            dist[s] = 0.0;
            heap.push(Frontier { dist: 0.0, vertex: s });
        }
    }
    while let Some(Frontier { dist: d, vertex: v }) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for (u, len) in adj.weighted_neighbors(v) {
            let nd = d + len;
            if nd < dist[u] {
                dist[u] = nd;
                heap.push(Frontier { dist: nd, vertex: u });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_graph_distances_count_up() {
        let edges: Vec<_> = (0..5).map(|i| (i, i + 1)).collect();
        let adj = Adjacency::from_edges(6, &edges);
        assert_eq!(multi_source_dijkstra(&adj, &[0]), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn all_sources_gives_zeros() {
        let adj = Adjacency::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(multi_source_dijkstra(&adj, &[0, 1, 2, 3]), vec![0.0; 4]);
    }

    #[test]
    fn disconnected_vertices_are_infinite() {
        let adj = Adjacency::from_edges(4, &[(0, 1), (2, 3)]);
        let d = multi_source_dijkstra(&adj, &[0]);
        assert_eq!(d[1], 1.0);
        assert!(d[2].is_infinite() && d[3].is_infinite());
    }

    #[test]
    fn incremental_relaxation_matches_fresh_run() {
        let edges: Vec<_> = (0..9).map(|i| (i, i + 1)).collect();
        let adj = Adjacency::from_edges(10, &edges);
        let mut d = multi_source_dijkstra(&adj, &[0]);
        relax_distances(&adj, &mut d, &[9]);
        assert_eq!(d, multi_source_dijkstra(&adj, &[0, 9]));
    }
}
