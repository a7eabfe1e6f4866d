use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Adjacency;

/// Regions below this fraction of total area are absorbed by a neighbor.
pub const DEFAULT_MIN_REGION_FRACTION: f64 = 0.0025;

/// One connected region of a cluster, with its expanded region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionNode {
    pub centroid_id: usize,
    /// Sorted vertex indices.
    pub vertices: Vec<usize>,
    /// Sorted vertex indices of the expanded region, a superset of `vertices`.
    pub expanded: Vec<usize>,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeGraph {
    pub nodes: Vec<RegionNode>,
    /// Pairs `(a, b)` with `a < b`, sorted.
    pub edges: Vec<(usize, usize)>,
    pub vertex_to_node: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    centroid_id: usize,
    size: usize,
    area: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    nodes: Vec<NodeJson>,
    edges: Vec<[usize; 2]>,
}

impl ShapeGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            nb[a].push(b);
            nb[b].push(a);
        }
        nb.iter_mut().for_each(|l| l.sort_unstable());
        nb
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for &(a, b) in &self.edges {
            d[a] += 1;
            d[b] += 1;
        }
        d
    }

    /// Graph with unit-length edges between adjacent nodes.
    pub fn adjacency(&self) -> Adjacency {
        Adjacency::from_edges(self.nodes.len(), &self.edges)
    }

    pub fn to_json(&self) -> String {
        let g = GraphJson {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| NodeJson {
                    id,
                    centroid_id: n.centroid_id,
                    size: n.vertices.len(),
                    area: n.area,
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string_pretty(&g).expect("graph serializes")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// One node id per line, in vertex order.
    pub fn write_vertex_labels(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.vertex_to_node
            .iter()
            .try_for_each(|n| writeln!(w, "{n}"))
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Connected components of the subgraph induced by `member`, labels in order
/// of first vertex. Non-members get `usize::MAX`.
fn components(adj: &Adjacency, member: impl Fn(usize) -> bool, same: impl Fn(usize, usize) -> bool) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX || !member(s) {
            continue;
        }
        comp[s] = count;
        stack.push(s);
        while let Some(v) = stack.pop() {
            for &u in adj.neighbors(v) {
                if comp[u] == usize::MAX && member(u) && same(v, u) {
                    comp[u] = count;
                    stack.push(u);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Relabels connected regions smaller than `min_fraction` of the total area
/// with the label of the neighboring region sharing the most edges (ties:
/// larger region, then lower index). Smallest regions go first.
pub fn merge_small_regions(
    adj: &Adjacency,
    areas: &[f64],
    labels: &[usize],
    min_fraction: f64,
) -> Vec<usize> {
    let mut labels = labels.to_vec();
    let total: f64 = areas.iter().sum();
    let threshold = min_fraction * total;
    if threshold <= 0.0 {
        return labels;
    }
    loop {
        let (comp, count) = components(adj, |_| true, |a, b| labels[a] == labels[b]);
        let mut comp_area = vec![0.0; count];
        let mut comp_label = vec![0; count];
        let mut members = vec![Vec::new(); count];
        for v in 0..adj.len() {
            comp_area[comp[v]] += areas[v];
            comp_label[comp[v]] = labels[v];
            members[comp[v]].push(v);
        }
        let mut order: Vec<usize> = (0..count).filter(|&c| comp_area[c] < threshold).collect();
        order.sort_by(|&a, &b| comp_area[a].total_cmp(&comp_area[b]).then(a.cmp(&b)));
        let mut parent: Vec<usize> = (0..count).collect();
        let mut merged_any = false;
        for c in order {
            let root = find(&mut parent, c);
            if comp_area[root] >= threshold {
                continue;
            }
            let mut shared: BTreeMap<usize, usize> = BTreeMap::new();
            for &v in &members[c] {
                for &u in adj.neighbors(v) {
                    let r = find(&mut parent, comp[u]);
                    if r != root {
                        *shared.entry(r).or_default() += 1;
                    }
                }
            }
            // members of comps already merged into `root` count too
            for other in 0..count {
                if other != c && find(&mut parent, other) == root {
                    for &v in &members[other] {
                        for &u in adj.neighbors(v) {
                            let r = find(&mut parent, comp[u]);
                            if r != root {
                                *shared.entry(r).or_default() += 1;
                            }
                        }
                    }
                }
            }
            let target = shared.iter().max_by(|a, b| {
                a.1.cmp(b.1)
                    .then(comp_area[*a.0].total_cmp(&comp_area[*b.0]))
                    .then(b.0.cmp(a.0))
            });
            if let Some((&t, _)) = target {
                parent[root] = t;
                comp_area[t] += comp_area[root];
                merged_any = true;
            }
        }
        if !merged_any {
            return labels;
        }
        for v in 0..adj.len() {
            let r = find(&mut parent, comp[v]);
            labels[v] = comp_label[r];
        }
    }
}

/// Builds the region graph of one shape from per-vertex nearest and
/// second-nearest centroid labels.
///
/// Nodes are connected regions of equal (merged) label, ordered by their
/// lowest vertex. A node's expanded region is the connected component
/// containing it within the vertices whose label or second label is the
/// node's centroid. Nodes are adjacent when expanded regions intersect.
pub fn build_shape_graph(
    adj: &Adjacency,
    areas: &[f64],
    nearest: &[usize],
    second: &[usize],
    min_region_fraction: f64,
) -> ShapeGraph {
    let n = adj.len();
    assert!(areas.len() == n && nearest.len() == n && second.len() == n);
    let labels = merge_small_regions(adj, areas, nearest, min_region_fraction);

    let (region, count) = components(adj, |_| true, |a, b| labels[a] == labels[b]);
    let mut nodes: Vec<RegionNode> = (0..count)
        .map(|_| RegionNode {
            centroid_id: 0,
            vertices: Vec::new(),
            expanded: Vec::new(),
            area: 0.0,
        })
        .collect();
    for v in 0..n {
        let node = &mut nodes[region[v]];
        node.centroid_id = labels[v];
        node.vertices.push(v);
        node.area += areas[v];
    }

    // expanded components, computed once per centroid label
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, node) in nodes.iter().enumerate() {
        by_label.entry(node.centroid_id).or_default().push(i);
    }
    // (label, component) pairs each vertex belongs to
    let mut memberships: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (&label, node_ids) in &by_label {
        let in_set = |v: usize| labels[v] == label || second[v] == label;
        let (comp, comp_count) = components(adj, in_set, |_, _| true);
        let mut comp_vertices = vec![Vec::new(); comp_count];
        for v in 0..n {
            if comp[v] != usize::MAX {
                comp_vertices[comp[v]].push(v);
            }
        }
        let mut nodes_of_comp = vec![Vec::new(); comp_count];
        for &i in node_ids {
            let c = comp[nodes[i].vertices[0]];
            nodes_of_comp[c].push(i);
            nodes[i].expanded = comp_vertices[c].clone();
        }
        for (c, verts) in comp_vertices.iter().enumerate() {
            for &v in verts {
                memberships[v].extend_from_slice(&nodes_of_comp[c]);
            }
        }
    }

    let mut edges = BTreeSet::new();
    for list in &memberships {
        for (x, &a) in list.iter().enumerate() {
            for &b in &list[x + 1..] {
                if a != b {
                    edges.insert((a.min(b), a.max(b)));
                }
            }
        }
    }
    ShapeGraph {
        nodes,
        edges: edges.into_iter().collect(),
        vertex_to_node: region,
    }
}
