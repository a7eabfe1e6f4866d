use serde::{Deserialize, Serialize};

use super::MatchingParams;

/// Positions kept from likelihoods sorted high to low: everything before the
/// first value below `gap_ratio` times its predecessor. `None` when that gap
/// comes after `max_order` values, or when nothing has positive likelihood.
pub fn gap_cut(sorted: &[f64], gap_ratio: f64, max_order: usize) -> Option<usize> {
    if sorted.first().is_none_or(|&v| !(v > 0.0)) {
        return None;
    }
    let gap = (1..sorted.len())
        .find(|&i| sorted[i] < gap_ratio * sorted[i - 1])
        .unwrap_or(sorted.len());
    (gap <= max_order).then_some(gap)
}

/// Candidates picked for one node, by index into `likelihoods`. Ties sort by
/// index.
pub fn select_candidates(likelihoods: &[f64], gap_ratio: f64, max_order: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..likelihoods.len()).collect();
    order.sort_by(|&a, &b| likelihoods[b].total_cmp(&likelihoods[a]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| likelihoods[i]).collect();
    match gap_cut(&sorted, gap_ratio, max_order) {
        Some(g) => {
            let mut picked = order[..g].to_vec();
            picked.sort_unstable();
            picked
        }
        None => Vec::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub a: usize,
    pub b: usize,
    pub likelihood: f64,
}

/// Many-to-many region matching in which symmetric regions share match sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatching {
    pub n_a: usize,
    pub n_b: usize,
    /// Sorted by `(a, b)`.
    pub pairs: Vec<MatchPair>,
}

impl SymmetricMatching {
    pub fn from_pairs(n_a: usize, n_b: usize, mut pairs: Vec<MatchPair>) -> Self {
        pairs.sort_by_key(|p| (p.a, p.b));
        pairs.dedup_by_key(|p| (p.a, p.b));
        SymmetricMatching { n_a, n_b, pairs }
    }

    pub fn matches_of_a(&self, a: usize) -> Vec<usize> {
        self.pairs.iter().filter(|p| p.a == a).map(|p| p.b).collect()
    }

    pub fn matches_of_b(&self, b: usize) -> Vec<usize> {
        self.pairs.iter().filter(|p| p.b == b).map(|p| p.a).collect()
    }

    /// Match sets of every node of A.
    pub fn sets_a(&self) -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); self.n_a];
        for p in &self.pairs {
            s[p.a].push(p.b);
        }
        s
    }

    pub fn sets_b(&self) -> Vec<Vec<usize>> {
        let mut s = vec![Vec::new(); self.n_b];
        for p in &self.pairs {
            s[p.b].push(p.a);
        }
        s.iter_mut().for_each(|v| v.sort_unstable());
        s
    }

    pub fn unmatched_a(&self) -> Vec<usize> {
        let sets = self.sets_a();
        (0..self.n_a).filter(|&a| sets[a].is_empty()).collect()
    }

    pub fn unmatched_b(&self) -> Vec<usize> {
        let sets = self.sets_b();
        (0..self.n_b).filter(|&b| sets[b].is_empty()).collect()
    }

    /// Same matching with the roles of the two graphs exchanged.
    pub fn transpose(&self) -> Self {
        let pairs = self
            .pairs
            .iter()
            .map(|p| MatchPair {
                a: p.b,
                b: p.a,
                likelihood: p.likelihood,
            })
            .collect();
        SymmetricMatching::from_pairs(self.n_b, self.n_a, pairs)
    }

    pub fn is_one_to_one(&self) -> bool {
        self.sets_a().iter().all(|s| s.len() <= 1) && self.sets_b().iter().all(|s| s.len() <= 1)
    }
}

/// Gap selection from both sides, keeping pairs chosen in both directions.
/// `x[i·n_b + j]` is the likelihood of matching node `i` of A to node `j` of B.
pub fn discretize(x: &[f64], n_a: usize, n_b: usize, params: &MatchingParams) -> SymmetricMatching {
    assert_eq!(x.len(), n_a * n_b);
    let (ratio, order) = (params.gap_ratio, params.max_symmetry_order);
    let mut from_a = vec![false; n_a * n_b];
    for i in 0..n_a {
        for j in select_candidates(&x[i * n_b..(i + 1) * n_b], ratio, order) {
            from_a[i * n_b + j] = true;
        }
    }
    let mut pairs = Vec::new();
    for j in 0..n_b {
        let column: Vec<f64> = (0..n_a).map(|i| x[i * n_b + j]).collect();
        for i in select_candidates(&column, ratio, order) {
            if from_a[i * n_b + j] {
                pairs.push(MatchPair {
                    a: i,
                    b: j,
                    likelihood: x[i * n_b + j],
                });
            }
        }
    }
    SymmetricMatching::from_pairs(n_a, n_b, pairs)
}
