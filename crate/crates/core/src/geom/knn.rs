use std::num::NonZero;

use kiddo::{ImmutableKdTree, SquaredEuclidean};

use super::Point3;

/// Undirected edges of the union of directed `k`-nearest-neighbour edges,
/// each reported once with `a < b`, in sorted order.
pub fn knn_edges(points: &[Point3], k: usize) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 || k == 0 {
        return Vec::new();
    }
    let k = k.min(n - 1);
    let tree = ImmutableKdTree::<f64, 3>::new_from_slice(points)
        .expect("kd-tree construction from finite points");
    let want = NonZero::new(k + 1).expect("k + 1 > 0");
    let mut edges = Vec::with_capacity(n * k);
    for (i, p) in points.iter().enumerate() {
        let mut found: Vec<(f64, usize)> = tree
            .query(p)
            .nearest_n::<SquaredEuclidean<f64>>(want)
            .execute()
            .into_iter()
            .map(|r| (r.distance, r.item as usize))
            .collect();
        // order ties by index so duplicate points resolve deterministically
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut taken = 0;
        for &(_, j) in &found {
            if j == i || taken == k {
                continue;
            }
            edges.push((i.min(j), i.max(j)));
            taken += 1;
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

/// Adds the shortest edge from the component of vertex 0 to any other
/// component until the graph is connected. Returns the added edges.
pub fn bridge_components(points: &[Point3], edges: &mut Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for &(a, b) in edges.iter() {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut added = Vec::new();
    loop {
        let root = find(&mut parent, 0);
        let (inside, outside): (Vec<usize>, Vec<usize>) = (0..n).partition(|&v| find(&mut parent, v) == root);
        if outside.is_empty() {
            break;
        }
        let main: Vec<Point3> = inside.iter().map(|&v| points[v]).collect();
        let index = NearestVertexIndex::new(&main);
        let mut best = (f64::INFINITY, 0, 0);
        for &v in &outside {
            let u = inside[index.nearest(&points[v])];
            let d = super::distance(&points[u], &points[v]);
            if d < best.0 {
                best = (d, u, v);
            }
        }
        let (_, u, v) = best;
        let rv = find(&mut parent, v);
        parent[rv] = root.min(rv);
        parent[root] = root.min(rv);
        added.push((u.min(v), u.max(v)));
    }
    edges.extend_from_slice(&added);
    edges.sort_unstable();
    added
}

/// Nearest-point lookup over a fixed vertex set.
pub struct NearestVertexIndex {
    tree: ImmutableKdTree<f64, 3>,
}

impl NearestVertexIndex {
    pub fn new(points: &[Point3]) -> Self {
        assert!(!points.is_empty(), "nearest-vertex index needs at least one point");
        NearestVertexIndex {
            tree: ImmutableKdTree::new_from_slice(points)
                .expect("kd-tree construction from finite points"),
        }
    }

    pub fn nearest(&self, query: &Point3) -> usize {
        self.tree
            .query(query)
            .nearest_one::<SquaredEuclidean<f64>>()
            .execute()
            .item as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_knn(points: &[Point3], k: usize) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let mut d: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, q)| (super::super::distance(p, q), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(_, j) in d.iter().take(k) {
                edges.push((i.min(j), i.max(j)));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    #[test]
    fn matches_brute_force_on_irregular_points() {
        let pts: Vec<Point3> = (0..200)
            .map(|i| {
                let x = i as f64;
                [(x * 0.7).sin() * 3.0, (x * 1.3).cos() * 2.0, (x * 0.37).sin() * (x * 0.11).cos()]
            })
            .collect();
        assert_eq!(knn_edges(&pts, 6), brute_knn(&pts, 6));
    }

    #[test]
    fn nearest_vertex_lookup() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let idx = NearestVertexIndex::new(&pts);
        assert_eq!(idx.nearest(&[0.9, 0.1, 0.0]), 1);
        assert_eq!(idx.nearest(&[0.0, 1.5, 0.3]), 2);
    }

    #[test]
    fn separate_clusters_are_bridged_by_their_closest_pair() {
        let mut pts: Vec<Point3> = (0..8).map(|i| [i as f64 * 0.1, 0.0, 0.0]).collect();
        pts.extend((0..8).map(|i| [5.0 + i as f64 * 0.1, 0.0, 0.0]));
        pts.extend((0..8).map(|i| [0.0, 9.0 + i as f64 * 0.1, 0.0]));
        let mut edges = knn_edges(&pts, 3);
        let added = bridge_components(&pts, &mut edges);
        assert_eq!(added, vec![(7, 8), (0, 16)]);
        let adj = crate::geom::Adjacency::from_edges(pts.len(), &edges);
        let d = crate::geom::multi_source_dijkstra(&adj, &[0]);
        assert!(d.iter().all(|x| x.is_finite()));
        assert!(bridge_components(&pts, &mut edges).is_empty());
    }
}
