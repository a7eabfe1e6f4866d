use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::{region_accuracy, UnmatchedPolicy};
use super::{Correspondence, PipelineConfig, PreparedShape};
use crate::error::{Error, Result};
use crate::matching::SymmetricMatching;
use crate::symmetry::OneToOneMatching;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportMode {
    Pair,
    SelfSymmetry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub symmetric: f64,
    pub one_to_one: Option<f64>,
    /// Source area that had a ground-truth counterpart.
    pub evaluated_area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KChoice {
    pub k: usize,
    pub distance: usize,
    pub nodes_a: usize,
    pub nodes_b: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchDiagnostics {
    pub eigenvalue: f64,
    pub residual: f64,
    pub nnz: usize,
    pub scale: f64,
    pub pruned: usize,
}

/// A region of a self-matched shape and the regions it maps to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfGroup {
    pub region: usize,
    pub matches: Vec<usize>,
    /// True when the region only maps to itself.
    pub self_pair: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceReport {
    pub mode: ReportMode,
    pub inputs: Vec<String>,
    pub config: PipelineConfig,
    pub k: usize,
    pub degree_distance: usize,
    pub k_candidates: Vec<KChoice>,
    pub segments_a: usize,
    pub segments_b: usize,
    pub labels_a: Vec<usize>,
    pub labels_b: Vec<usize>,
    pub region_areas_a: Vec<f64>,
    pub region_areas_b: Vec<f64>,
    pub vertex_areas_a: Vec<f64>,
    pub vertex_areas_b: Vec<f64>,
    pub symmetric: SymmetricMatching,
    pub one_to_one: Option<OneToOneMatching>,
    pub self_groups: Option<Vec<SelfGroup>>,
    pub diagnostics: MatchDiagnostics,
    pub accuracy: Option<Accuracy>,
}

impl CorrespondenceReport {
    pub(super) fn from_pair(
        inputs: Vec<String>,
        config: &PipelineConfig,
        a: &PreparedShape,
        b: &PreparedShape,
        c: &Correspondence,
        accuracy: Option<Accuracy>,
    ) -> Self {
        let seg = &c.segmentation;
        let gm = &c.graph_match;
        CorrespondenceReport {
            mode: ReportMode::Pair,
            inputs,
            config: *config,
            k: seg.k,
            degree_distance: seg.distance,
            k_candidates: seg
                .candidates
                .iter()
                .map(|k| KChoice {
                    k: k.k,
                    distance: k.distance,
                    nodes_a: k.nodes_a,
                    nodes_b: k.nodes_b,
                })
                .collect(),
            segments_a: seg.graph_a.node_count(),
            segments_b: seg.graph_b.node_count(),
            labels_a: seg.graph_a.vertex_to_node.clone(),
            labels_b: seg.graph_b.vertex_to_node.clone(),
            region_areas_a: seg.graph_a.nodes.iter().map(|n| n.area).collect(),
            region_areas_b: seg.graph_b.nodes.iter().map(|n| n.area).collect(),
            vertex_areas_a: a.shape.vertex_areas().to_vec(),
            vertex_areas_b: b.shape.vertex_areas().to_vec(),
            symmetric: gm.matching.clone(),
            one_to_one: c.one_to_one.clone(),
            self_groups: None,
            diagnostics: MatchDiagnostics {
                eigenvalue: gm.eigenvalue,
                residual: gm.residual,
                nnz: gm.nnz,
                scale: gm.scale,
                pruned: gm.pruned,
            },
            accuracy,
        }
    }

    pub(super) fn from_self(
        input: String,
        config: &PipelineConfig,
        shape: &PreparedShape,
        c: &Correspondence,
        groups: &[Vec<usize>],
    ) -> Self {
        let mut report = Self::from_pair(vec![input], config, shape, shape, c, None);
        report.mode = ReportMode::SelfSymmetry;
        report.config.symmetric_only = true;
        report.self_groups = Some(
            groups
                .iter()
                .enumerate()
                .map(|(r, m)| SelfGroup {
                    region: r,
                    matches: m.clone(),
                    self_pair: m.as_slice() == [r],
                })
                .collect(),
        );
        report
    }

    /// Match sets per source region: one-to-one when available and
    /// `prefer_one_to_one`, symmetric otherwise.
    pub fn match_sets(&self, prefer_one_to_one: bool) -> Vec<Vec<usize>> {
        match (&self.one_to_one, prefer_one_to_one) {
            (Some(m), true) => {
                let mut sets = vec![Vec::new(); self.segments_a];
                for &(a, b) in &m.pairs {
                    sets[a].push(b);
                }
                sets
            }
            _ => self.symmetric.sets_a(),
        }
    }

    /// Matched region pairs: one-to-one pairs, or every symmetric pair.
    pub fn matched_pairs(&self, one_to_one: bool) -> Vec<(usize, usize)> {
        match (&self.one_to_one, one_to_one) {
            (Some(m), true) => m.pairs.clone(),
            _ => self.symmetric.pairs.iter().map(|p| (p.a, p.b)).collect(),
        }
    }

    pub fn evaluate(&self, target: &[Option<usize>], policy: UnmatchedPolicy) -> Result<Accuracy> {
        if target.len() != self.labels_a.len() {
            return Err(Error::InvalidInput(format!(
                "ground truth has {} entries, source shape has {} vertices",
                target.len(),
                self.labels_a.len()
            )));
        }
        if let Some(t) = target.iter().flatten().find(|&&t| t >= self.labels_b.len()) {
            return Err(Error::InvalidInput(format!(
                "ground truth maps to {t}, target has {} vertices",
                self.labels_b.len()
            )));
        }
        let acc = |sets: &[Vec<usize>]| {
            region_accuracy(&self.labels_a, &self.labels_b, sets, target, &self.vertex_areas_a, policy)
        };
        Ok(Accuracy {
            symmetric: acc(&self.match_sets(false)),
            one_to_one: self.one_to_one.as_ref().map(|_| acc(&self.match_sets(true))),
            evaluated_area: target
                .iter()
                .zip(&self.vertex_areas_a)
                .filter(|(t, _)| t.is_some())
                .map(|(_, a)| a)
                .sum(),
        })
    }

    /// Colors for both shapes: A by region index, B by the color of the
    /// matched A region (lowest index when several), black when unmatched.
    pub fn vertex_colors(&self) -> (Vec<[u8; 3]>, Vec<[u8; 3]>) {
        let mut b_color = vec![BLACK; self.segments_b];
        let pairs = self.matched_pairs(true);
        for (a, b) in pairs.into_iter().rev() {
            b_color[b] = palette_color(a);
        }
        let ca = self.labels_a.iter().map(|&r| palette_color(r)).collect();
        let cb = self.labels_b.iter().map(|&r| b_color[r]).collect();
        (ca, cb)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: CorrespondenceReport = serde_json::from_str(text)?;
        report.check()?;
        Ok(report)
    }

    fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidInput(format!("inconsistent report: {what}")));
        if self.labels_a.len() != self.vertex_areas_a.len() || self.labels_b.len() != self.vertex_areas_b.len() {
            return bad("label and area lengths differ");
        }
        if self.labels_a.iter().any(|&l| l >= self.segments_a) || self.labels_b.iter().any(|&l| l >= self.segments_b) {
            return bad("label out of range");
        }
        if self.symmetric.n_a != self.segments_a || self.symmetric.n_b != self.segments_b {
            return bad("matching size differs from segment counts");
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: Vec<StageTime>,
    pub total_seconds: f64,
}

impl Timings {
    pub fn stage(&self, name: &str) -> Option<f64> {
        self.stages.iter().find(|s| s.stage == name).map(|s| s.seconds)
    }

    pub fn stage_sum(&self) -> f64 {
        self.stages.iter().map(|s| s.seconds).sum()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("timings serialize");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

const BLACK: [u8; 3] = [0, 0, 0];

pub const PALETTE: [[u8; 3]; 20] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [174, 199, 232],
    [255, 187, 120],
    [152, 223, 138],
    [255, 152, 150],
    [197, 176, 213],
    [196, 156, 148],
    [247, 182, 210],
    [199, 199, 199],
    [219, 219, 141],
    [158, 218, 229],
];

pub fn palette_color(region: usize) -> [u8; 3] {
    PALETTE[region % PALETTE.len()]
}
