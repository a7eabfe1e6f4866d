use std::collections::VecDeque;

use crate::segment::ShapeGraph;

/// Marks an unreachable pair in a distance table.
pub const UNREACHABLE: usize = usize::MAX;

/// Connectivity of a shape graph, all that matching looks at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeGraph {
    neighbors: Vec<Vec<usize>>,
}

impl NodeGraph {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes");
            if a != b {
                neighbors[a].push(b);
                neighbors[b].push(a);
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        NodeGraph { neighbors }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        NodeGraph::new(n, &edges)
    }

    /// Star with `leaves` leaves around node 0.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        NodeGraph::new(leaves + 1, &edges)
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for (a, nb) in self.neighbors.iter().enumerate() {
            e.extend(nb.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        e
    }

    /// Hop counts from `source`, [`UNREACHABLE`] where there is no path.
    pub fn bfs(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHABLE; self.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.neighbors[v] {
                if dist[u] == UNREACHABLE {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Row-major all-pairs hop counts.
    pub fn distance_table(&self) -> Vec<usize> {
        (0..self.len()).flat_map(|v| self.bfs(v)).collect()
    }

    /// Renumbers nodes: node `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let edges: Vec<_> = self.edges().into_iter().map(|(a, b)| (perm[a], perm[b])).collect();
        NodeGraph::new(self.len(), &edges)
    }
}

impl From<&ShapeGraph> for NodeGraph {
    fn from(g: &ShapeGraph) -> Self {
        NodeGraph::new(g.node_count(), &g.edges)
    }
}

/// Entry `r` counts the nodes `r + 1` hops from `node`; unreachable nodes are
/// left out.
pub fn node_histogram(g: &NodeGraph, node: usize) -> Vec<usize> {
    histogram_from_distances(&g.bfs(node))
}

fn histogram_from_distances(dist: &[usize]) -> Vec<usize> {
    let ecc = dist.iter().filter(|&&d| d != UNREACHABLE).max().copied().unwrap_or(0);
    let mut h = vec![0; ecc];
    for &d in dist {
        if d != UNREACHABLE && d > 0 {
            h[d - 1] += 1;
        }
    }
    h
}

pub fn node_histograms(g: &NodeGraph) -> Vec<Vec<usize>> {
    (0..g.len()).map(|v| node_histogram(g, v)).collect()
}

/// Euclidean distance between histograms, the shorter one zero-padded.
pub fn unary_cost(a: &[usize], b: &[usize]) -> f64 {
    let len = a.len().max(b.len());
    let at = |h: &[usize], i: usize| h.get(i).copied().unwrap_or(0) as f64;
    (0..len)
        .map(|i| (at(a, i) - at(b, i)).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_and_star_histograms() {
        let p3 = NodeGraph::path(3);
        assert_eq!(node_histogram(&p3, 1), vec![2]);
        assert_eq!(node_histogram(&p3, 0), vec![1, 1]);
        let s4 = NodeGraph::star(4);
        assert_eq!(node_histogram(&s4, 0), vec![4]);
        assert_eq!(node_histogram(&s4, 3), vec![1, 3]);
    }

    #[test]
    fn unreachable_nodes_are_left_out() {
        let g = NodeGraph::new(5, &[(0, 1), (1, 2), (3, 4)]);
        assert_eq!(node_histogram(&g, 0), vec![1, 1]);
        assert_eq!(node_histogram(&g, 3), vec![1]);
        assert_eq!(g.bfs(0)[4], UNREACHABLE);
    }

    #[test]
    fn padded_cost() {
        assert_eq!(unary_cost(&[1, 1], &[1, 1]), 0.0);
        assert!((unary_cost(&[2], &[1, 1]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(unary_cost(&[], &[3, 4]), 5.0);
    }
}
