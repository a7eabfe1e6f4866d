//! Turns symmetric match sets into a one-to-one region correspondence.
//!
//! One group of symmetric matches is resolved arbitrarily; every further
//! choice goes to the region closest to what is already resolved, on the
//! assumption that geodesic distances between nearby regions survive the
//! deformation. The result may be a global mirror flip of the truth.

use serde::{Deserialize, Serialize};

use crate::geom::{multi_source_dijkstra, relax_distances, Adjacency};
use crate::matching::SymmetricMatching;

/// One shape as the symmetry breaker sees it.
#[derive(Debug, Clone, Copy)]
pub struct RegionLayout<'a> {
    pub adjacency: &'a Adjacency,
    /// Vertex indices of each region.
    pub regions: &'a [Vec<usize>],
    /// Region areas, used to break ties between seed groups.
    pub areas: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneToOneMatching {
    /// `(a, b)` pairs sorted by `a`.
    pub pairs: Vec<(usize, usize)>,
    pub unresolved_a: Vec<usize>,
    pub unresolved_b: Vec<usize>,
    /// The arbitrarily resolved pair everything else was grown from.
    pub seed: Option<(usize, usize)>,
}

impl OneToOneMatching {
    pub fn image_of(&self, a: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == a).map(|p| p.1)
    }
}

/// Connected components of the bipartite match graph restricted to pairs that
/// are not already one-to-one, as sorted `(A nodes, B nodes)`.
fn symmetric_groups(sets_a: &[Vec<usize>], sets_b: &[Vec<usize>], skip_a: &[bool]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (n_a, n_b) = (sets_a.len(), sets_b.len());
    let mut seen_a = vec![false; n_a];
    let mut seen_b = vec![false; n_b];
    let mut groups = Vec::new();
    for start in 0..n_a {
        if seen_a[start] || skip_a[start] || sets_a[start].is_empty() {
            continue;
        }
        let (mut ga, mut gb) = (Vec::new(), Vec::new());
        let mut stack = vec![(true, start)];
        seen_a[start] = true;
        while let Some((is_a, v)) = stack.pop() {
            if is_a {
                ga.push(v);
                for &b in &sets_a[v] {
                    if !seen_b[b] {
                        seen_b[b] = true;
                        stack.push((false, b));
                    }
                }
            } else {
                gb.push(v);
                for &a in &sets_b[v] {
                    if !seen_a[a] {
                        seen_a[a] = true;
                        stack.push((true, a));
                    }
                }
            }
        }
        ga.sort_unstable();
        gb.sort_unstable();
        groups.push((ga, gb));
    }
    groups
}

/// Mean over the region's vertices of the distance to the nearest source.
fn mean_distance(dist: &[f64], region: &[usize]) -> f64 {
    if region.is_empty() {
        return f64::INFINITY;
    }
    region.iter().map(|&v| dist[v]).sum::<f64>() / region.len() as f64
}

fn argmin_by_distance(candidates: impl Iterator<Item = usize>, dist: &[f64], regions: &[Vec<usize>]) -> Option<usize> {
    candidates
        .map(|r| (mean_distance(dist, &regions[r]), r))
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
        .map(|(_, r)| r)
}

/// Commits `i -> j` and drops every competing match of either region.
fn fix(
    i: usize,
    j: usize,
    sets_a: &mut [Vec<usize>],
    sets_b: &mut [Vec<usize>],
    resolved_a: &mut [Option<usize>],
    resolved_b: &mut [bool],
) {
    for &other in &sets_a[i] {
        if other != j {
            sets_b[other].retain(|&x| x != i);
        }
    }
    for &other in &sets_b[j] {
        if other != i {
            sets_a[other].retain(|&x| x != j);
        }
    }
    sets_a[i] = vec![j];
    sets_b[j] = vec![i];
    resolved_a[i] = Some(j);
    resolved_b[j] = true;
}

pub fn break_symmetry(sym: &SymmetricMatching, a: RegionLayout, b: RegionLayout) -> OneToOneMatching {
    assert_eq!(a.regions.len(), sym.n_a);
    assert_eq!(b.regions.len(), sym.n_b);
    let mut sets_a = sym.sets_a();
    let mut sets_b = sym.sets_b();
    let (n_a, n_b) = (sym.n_a, sym.n_b);
    let mut resolved_a: Vec<Option<usize>> = vec![None; n_a];
    let mut resolved_b = vec![false; n_b];
    for i in 0..n_a {
        if let [j] = sets_a[i][..] {
            if sets_b[j] == [i] {
                resolved_a[i] = Some(j);
                resolved_b[j] = true;
            }
        }
    }
    let is_resolved: Vec<bool> = resolved_a.iter().map(Option::is_some).collect();

    let groups = symmetric_groups(&sets_a, &sets_b, &is_resolved);
    let group_area = |g: &(Vec<usize>, Vec<usize>)| -> f64 {
        g.0.iter().map(|&r| a.areas[r]).sum::<f64>() + g.1.iter().map(|&r| b.areas[r]).sum::<f64>()
    };
    let seed_group = groups
        .iter()
        .filter(|g| g.0.len() > 1 && g.1.len() > 1)
        .min_by(|x, y| {
            (x.0.len() + x.1.len())
                .cmp(&(y.0.len() + y.1.len()))
                .then(group_area(x).total_cmp(&group_area(y)))
                .then(x.0[0].cmp(&y.0[0]))
        });


    let (seed, sources_a, sources_b): (Option<(usize, usize)>, Vec<usize>, Vec<usize>) = match seed_group {
        Some((ga, gb)) => {
            let (i, j) = (ga[0], gb[0]);
            fix(i, j, &mut sets_a, &mut sets_b, &mut resolved_a, &mut resolved_b);
            (Some((i, j)), a.regions[i].clone(), b.regions[j].clone())
        }
        None => {
            let va = (0..n_a).filter(|&i| is_resolved[i]).flat_map(|i| a.regions[i].iter().copied()).collect();
            let wb = (0..n_a)
                .filter_map(|i| resolved_a[i])
                .flat_map(|j| b.regions[j].iter().copied())
                .collect();
            (None, va, wb)
        }
    };

    let pending = |sets_a: &[Vec<usize>], sets_b: &[Vec<usize>], resolved_a: &[Option<usize>]| -> Vec<usize> {
        (0..n_a)
            .filter(|&i| resolved_a[i].is_none() && !sets_a[i].is_empty())
            .filter(|&i| sets_a[i].len() > 1 || sets_b[sets_a[i][0]].len() > 1)
            .collect()
    };

    if seed.is_none() && sources_a.is_empty() {
        // nothing to grow from
        return OneToOneMatching {
            pairs: (0..n_a).filter_map(|i| resolved_a[i].map(|j| (i, j))).collect(),
            unresolved_a: (0..n_a).filter(|&i| resolved_a[i].is_none()).collect(),
            unresolved_b: (0..n_b).filter(|&j| !resolved_b[j]).collect(),
            seed,
        };
    }
    {
        let mut dist_a = multi_source_dijkstra(a.adjacency, &sources_a);
        let mut dist_b = multi_source_dijkstra(b.adjacency, &sources_b);
        loop {
            let todo = pending(&sets_a, &sets_b, &resolved_a);
            let Some(i) = argmin_by_distance(todo.into_iter(), &dist_a, a.regions) else {
                break;
            };
            let j = argmin_by_distance(sets_a[i].clone().into_iter(), &dist_b, b.regions)
                .expect("pending regions have candidates");
            fix(i, j, &mut sets_a, &mut sets_b, &mut resolved_a, &mut resolved_b);
            relax_distances(a.adjacency, &mut dist_a, &a.regions[i]);
            relax_distances(b.adjacency, &mut dist_b, &b.regions[j]);
        }
    }

    // whatever is now uncontested one-to-one is accepted as well
    for i in 0..n_a {
        if resolved_a[i].is_none() {
            if let [j] = sets_a[i][..] {
                if sets_b[j] == [i] {
                    resolved_a[i] = Some(j);
                    resolved_b[j] = true;
                }
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n_a).filter_map(|i| resolved_a[i].map(|j| (i, j))).collect();
    OneToOneMatching {
        unresolved_a: (0..n_a).filter(|&i| resolved_a[i].is_none()).collect(),
        unresolved_b: (0..n_b).filter(|&j| !resolved_b[j]).collect(),
        pairs,
        seed,
    }
}
