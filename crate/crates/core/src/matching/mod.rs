//! Symmetric matching of shape graphs by spectral relaxation of quadratic
//! assignment.
//!
//! Unary terms compare hop-distance histograms of nodes; pairwise terms
//! compare hop distances and unary costs between two candidate matches. The
//! pairwise terms are scaled down until they only break ties among the unary
//! optima, so the leading eigenvector stays spread evenly over symmetric
//! candidates and a gap search can read off symmetric match sets.

mod affinity;
mod discretize;
mod eigen;
mod graph;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use affinity::{assemble_affinity, pairwise_affinity, unary_affinity, AffinityMatrix, NNZ_FLOOR};
pub use discretize::{discretize, gap_cut, select_candidates, MatchPair, SymmetricMatching};
pub use eigen::{leading_eigenvector, LeadingEigen, DENSE_BLOCK_LIMIT};
pub use graph::{node_histogram, node_histograms, unary_cost, NodeGraph, UNREACHABLE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondOrderScale {
    /// Divide by the number of off-diagonal non-zeros.
    InverseNnz,
    Factor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchingParams {
    pub sigma: f64,
    pub max_symmetry_order: usize,
    pub gap_ratio: f64,
    pub second_order_scale: SecondOrderScale,
    /// Candidates with lower unary affinity take no part in pairwise terms.
    pub prune_below: f64,
    pub max_nodes: usize,
}

impl Default for MatchingParams {
    fn default() -> Self {
        MatchingParams {
            sigma: 0.5,
            max_symmetry_order: 8,
            gap_ratio: 0.9,
            second_order_scale: SecondOrderScale::InverseNnz,
            prune_below: 1e-4,
            max_nodes: 60,
        }
    }
}

impl MatchingParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.max_symmetry_order < 1 {
            return bad("maximum symmetry order must be at least 1".into());
        }
        if !(self.gap_ratio > 0.0 && self.gap_ratio < 1.0) {
            return bad(format!("gap ratio must lie in (0, 1), got {}", self.gap_ratio));
        }
        if let SecondOrderScale::Factor(f) = self.second_order_scale {
            if !(f >= 0.0) || !f.is_finite() {
                return bad(format!("second-order factor must be nonnegative, got {f}"));
            }
        }
        if !(self.prune_below >= 0.0 && self.prune_below < 1.0) {
            return bad(format!("pruning threshold must lie in [0, 1), got {}", self.prune_below));
        }
        Ok(())
    }
}

/// Matching plus the quantities it was read from.
#[derive(Debug, Clone)]
pub struct GraphMatch {
    pub matching: SymmetricMatching,
    /// Likelihood of every candidate, `i·n_b + j`.
    pub likelihoods: Vec<f64>,
    pub eigenvalue: f64,
    pub residual: f64,
    pub nnz: usize,
    pub scale: f64,
    pub pruned: usize,
}

pub fn match_graphs(a: &NodeGraph, b: &NodeGraph, params: &MatchingParams) -> Result<GraphMatch> {
    let m = assemble_affinity(a, b, params)?;
    let lead = leading_eigenvector(&m)?;
    let matching = discretize(&lead.vector, a.len(), b.len(), params);
    Ok(GraphMatch {
        matching,
        likelihoods: lead.vector,
        eigenvalue: lead.value,
        residual: lead.residual,
        nnz: m.nnz,
        scale: m.scale,
        pruned: m.pruned(),
    })
}

#[derive(Serialize)]
struct MatchingDump<'a> {
    pairs: &'a [MatchPair],
    unmatched_a: Vec<usize>,
    unmatched_b: Vec<usize>,
    params: &'a MatchingParams,
    nnz_floor: f64,
}

/// JSON dump of a matching with the parameters that produced it.
pub fn matching_json(m: &SymmetricMatching, params: &MatchingParams) -> String {
    let dump = MatchingDump {
        pairs: &m.pairs,
        unmatched_a: m.unmatched_a(),
        unmatched_b: m.unmatched_b(),
        params,
        nnz_floor: NNZ_FLOOR,
    };
    serde_json::to_string_pretty(&dump).expect("matching serializes")
}

#[cfg(test)]
mod tests;
