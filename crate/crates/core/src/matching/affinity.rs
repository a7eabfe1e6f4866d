use super::graph::{node_histograms, unary_cost, NodeGraph, UNREACHABLE};
use super::{MatchingParams, SecondOrderScale};
use crate::error::{Error, Result};

/// Off-diagonal entries above this count as non-zero when scaling.
pub const NNZ_FLOOR: f64 = 1e-12;

/// `exp(-C / σ)` for a unary cost `C`.
pub fn unary_affinity(cost: f64, sigma: f64) -> f64 {
    (-cost / sigma).exp()
}

/// Affinity between candidate matches `(i, j)` and `(k, l)` from hop distances
/// `g_A(i, k)`, `g_B(j, l)` and unary costs `C(i, j)`, `C(k, l)`. A pair that
/// is connected on one side only gets zero.
pub fn pairwise_affinity(dist_a: usize, dist_b: usize, cost_ij: f64, cost_kl: f64, sigma: f64) -> f64 {
    let d_g = match (dist_a == UNREACHABLE, dist_b == UNREACHABLE) {
        (false, false) => (dist_a as f64 - dist_b as f64).abs(),
        (true, true) => 0.0,
        _ => return 0.0,
    };
    (-(d_g + (cost_ij - cost_kl).abs()) / sigma).exp()
}

/// Symmetric `(n_a·n_b)²` affinity matrix; candidate `(i, j)` sits at row
/// `i·n_b + j`. Off-diagonal entries are stored densely over the active
/// (unpruned) candidates only.
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    pub n_a: usize,
    pub n_b: usize,
    /// Unary affinity of every candidate.
    pub unary: Vec<f64>,
    /// Candidates whose unary affinity passed the pruning threshold, ascending.
    pub active: Vec<usize>,
    /// Row-major `active.len()²` block, diagonal included.
    pub block: Vec<f64>,
    /// Off-diagonal non-zeros before scaling.
    pub nnz: usize,
    /// Factor applied to the off-diagonal entries.
    pub scale: f64,
}

impl AffinityMatrix {
    pub fn dim(&self) -> usize {
        self.n_a * self.n_b
    }

    pub fn pruned(&self) -> usize {
        self.dim() - self.active.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if r == c {
            return self.unary[r];
        }
        match (self.active.binary_search(&r), self.active.binary_search(&c)) {
            (Ok(p), Ok(q)) => self.block[p * self.active.len() + q],
            _ => 0.0,
        }
    }

    /// Full dense copy, row-major. Meant for small matrices.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for r in 0..n {
            m[r * n + r] = self.unary[r];
        }
        let k = self.active.len();
        for (p, &r) in self.active.iter().enumerate() {
            for (q, &c) in self.active.iter().enumerate() {
                m[r * n + c] = self.block[p * k + q];
            }
        }
        m
    }
}

pub fn assemble_affinity(a: &NodeGraph, b: &NodeGraph, params: &MatchingParams) -> Result<AffinityMatrix> {
    params.validate()?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("cannot match an empty graph".into()));
    }
    for g in [a, b] {
        if g.len() > params.max_nodes {
            return Err(Error::GraphTooLarge {
                nodes: g.len(),
                limit: params.max_nodes,
            });
        }
    }
    let (n_a, n_b) = (a.len(), b.len());
    let ha = node_histograms(a);
    let hb = node_histograms(b);
    let cost: Vec<f64> = (0..n_a * n_b)
        .map(|r| unary_cost(&ha[r / n_b], &hb[r % n_b]))
        .collect();
    let unary: Vec<f64> = cost.iter().map(|&c| unary_affinity(c, params.sigma)).collect();
    let active: Vec<usize> = (0..n_a * n_b)
        .filter(|&r| unary[r] >= params.prune_below)
        .collect();
    let da = a.distance_table();
    let db = b.distance_table();

    let k = active.len();
    let mut block = vec![0.0; k * k];
    let mut nnz = 0;
    for p in 0..k {
        let (i, j) = (active[p] / n_b, active[p] % n_b);
        block[p * k + p] = unary[active[p]];
        for q in p + 1..k {
            let (ki, l) = (active[q] / n_b, active[q] % n_b);
            let v = pairwise_affinity(
                da[i * n_a + ki],
                db[j * n_b + l],
                cost[active[p]],
                cost[active[q]],
                params.sigma,
            );
            if v > NNZ_FLOOR {
                nnz += 2;
            }
            block[p * k + q] = v;
            block[q * k + p] = v;
        }
    }
    let scale = match params.second_order_scale {
        SecondOrderScale::InverseNnz => 1.0 / nnz.max(1) as f64,
        SecondOrderScale::Factor(f) => f,
    };
    for p in 0..k {
        for q in 0..k {
            if p != q {
                block[p * k + q] *= scale;
            }
        }
    }
    Ok(AffinityMatrix {
        n_a,
        n_b,
        unary,
        active,
        block,
        nnz,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_affinity_of_padded_histograms() {
        let c = unary_cost(&[2], &[1, 1]);
        assert!((unary_affinity(c, 0.5) - (-2f64.sqrt() / 0.5).exp()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_substitution() {
        assert_eq!(pairwise_affinity(2, 2, 0.7, 0.7, 0.5), 1.0);
        let v = pairwise_affinity(1, 3, 0.3, 0.3, 0.5);
        assert!((v - (-4f64).exp()).abs() < 1e-15);
        assert!((v - 0.0183).abs() < 1e-4);
        assert_eq!(pairwise_affinity(UNREACHABLE, 1, 0.0, 0.0, 0.5), 0.0);
        assert_eq!(pairwise_affinity(UNREACHABLE, UNREACHABLE, 0.0, 0.0, 0.5), 1.0);
    }

    #[test]
    fn single_nodes_give_unit_matrix() {
        let g = NodeGraph::new(1, &[]);
        let m = assemble_affinity(&g, &g, &MatchingParams::default()).unwrap();
        assert_eq!(m.to_dense(), vec![1.0]);
    }

    #[test]
    fn p3_diagonal() {
        let p3 = NodeGraph::path(3);
        let m = assemble_affinity(&p3, &p3, &MatchingParams::default()).unwrap();
        assert_eq!(m.dim(), 9);
        let dense = m.to_dense();
        let ones: Vec<usize> = (0..9).filter(|&r| dense[r * 9 + r] == 1.0).collect();
        // endpoint-endpoint: (0,0) (0,2) (2,0) (2,2); middle-middle: (1,1)
        assert_eq!(ones, vec![0, 2, 4, 6, 8]);
        let off = (-2f64.sqrt() / 0.5).exp();
        assert!((dense[1 * 9 + 1] - off).abs() < 1e-15);
    }

    #[test]
    fn scaling_divides_by_off_diagonal_nonzeros() {
        let p3 = NodeGraph::path(3);
        let m = assemble_affinity(&p3, &p3, &MatchingParams::default()).unwrap();
        // every candidate is active and every off-diagonal entry is positive
        assert_eq!(m.active.len(), 9);
        assert_eq!(m.nnz, 72);
        // (0,0) and (2,2): g_A = g_B = 2, equal costs
        assert!((m.get(0, 8) - 1.0 / 72.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_is_symmetric_and_bounded() {
        let a = NodeGraph::new(7, &[(0, 1), (1, 2), (2, 3), (1, 4), (4, 5), (5, 6)]);
        let b = NodeGraph::new(6, &[(0, 1), (1, 2), (1, 3), (3, 4), (4, 5)]);
        let m = assemble_affinity(&a, &b, &MatchingParams::default()).unwrap();
        let n = m.dim();
        let d = m.to_dense();
        for r in 0..n {
            assert!(d[r * n + r] > 0.0 && d[r * n + r] <= 1.0);
            for c in 0..n {
                assert_eq!(d[r * n + c], d[c * n + r]);
                if r != c {
                    assert!(d[r * n + c] >= 0.0 && d[r * n + c] <= m.scale);
                }
            }
        }
    }

    #[test]
    fn oversized_graphs_are_rejected() {
        let big = NodeGraph::path(61);
        let small = NodeGraph::path(3);
        assert!(matches!(
            assemble_affinity(&big, &small, &MatchingParams::default()),
            Err(Error::GraphTooLarge { nodes: 61, limit: 60 })
        ));
    }
}
