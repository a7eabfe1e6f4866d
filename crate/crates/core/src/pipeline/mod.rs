//! End-to-end runs: descriptors, joint segmentation, graph matching and
//! symmetry breaking, with evaluation and file output.

mod constraints;
mod eval;
mod report;
mod sweep;

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::io::{write_colored_ply, write_index_file};
use crate::geom::io::load_shape;
use crate::geom::{GroundTruthMap, Shape};
use crate::matching::{match_graphs, GraphMatch, MatchingParams, NodeGraph, SymmetricMatching};
use crate::segment::{align_ranks, select_k, JointSegmentation, SegmentationInput, SegmentationParams};
use crate::spectral::{shape_descriptors, DescriptorField, TimeSteps};
use crate::symmetry::{break_symmetry, OneToOneMatching, RegionLayout};

pub use constraints::{export_indicator_constraints, read_indicator_constraints, IndicatorConstraints};
pub use eval::{
    compose, ground_truth_targets, nearest_vertices, region_accuracy, vertex_to_sample, UnmatchedPolicy,
};
pub use report::{
    palette_color, Accuracy, CorrespondenceReport, KChoice, MatchDiagnostics, ReportMode, SelfGroup, StageTime, Timings,
    PALETTE,
};
pub use sweep::{
    cell, run_robustness_sweep, summarize, sweep_csv, trials_csv, write_sweep_csv, SweepCell, SweepConfig, SweepMode,
    SweepPair, SweepRow,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub time_steps: TimeSteps,
    pub segmentation: SegmentationParams,
    pub matching: MatchingParams,
    /// Stop after symmetric matching.
    pub symmetric_only: bool,
    pub unmatched: UnmatchedPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            time_steps: TimeSteps::DEFAULT,
            segmentation: SegmentationParams {
                seed: 42,
                ..SegmentationParams::default()
            },
            matching: MatchingParams::default(),
            symmetric_only: false,
            unmatched: UnmatchedPolicy::CountWrong,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.time_steps.validate()?;
        self.segmentation.validate()?;
        self.matching.validate()
    }
}

/// Wall-clock time per named stage.
#[derive(Debug, Default)]
pub struct StageClock {
    stages: Vec<StageTime>,
}

impl StageClock {
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage));
        let seconds = start.elapsed().as_secs_f64();
        match self.stages.iter_mut().find(|s| s.stage == stage) {
            Some(s) => s.seconds += seconds,
            None => self.stages.push(StageTime { stage: stage.to_string(), seconds }),
        }
        out
    }

    pub fn stages(&self) -> &[StageTime] {
        &self.stages
    }

    pub fn into_timings(self, total: f64) -> Timings {
        Timings {
            stages: self.stages,
            total_seconds: total,
        }
    }
}

/// A shape with its heat kernel signatures.
#[derive(Debug, Clone)]
pub struct PreparedShape {
    pub shape: Shape,
    pub descriptors: DescriptorField,
}

impl PreparedShape {
    pub fn new(shape: Shape, steps: &TimeSteps) -> Result<Self> {
        let descriptors = shape_descriptors(&shape, steps)?;
        Ok(PreparedShape { shape, descriptors })
    }
}

#[derive(Debug, Clone)]
pub struct Correspondence {
    pub segmentation: JointSegmentation,
    pub graph_match: GraphMatch,
    pub one_to_one: Option<OneToOneMatching>,
}

impl Correspondence {
    pub fn labels_a(&self) -> &[usize] {
        &self.segmentation.graph_a.vertex_to_node
    }

    pub fn labels_b(&self) -> &[usize] {
        &self.segmentation.graph_b.vertex_to_node
    }

    pub fn symmetric(&self) -> &SymmetricMatching {
        &self.graph_match.matching
    }

    /// Match set per region of A for the one-to-one result.
    pub fn one_to_one_sets(&self) -> Option<Vec<Vec<usize>>> {
        self.one_to_one.as_ref().map(|m| {
            let mut sets = vec![Vec::new(); self.symmetric().n_a];
            for &(a, b) in &m.pairs {
                sets[a].push(b);
            }
            sets
        })
    }
}

/// Aligns, segments, matches and (unless disabled) breaks symmetries.
pub fn correspond(
    a: &PreparedShape,
    b: &PreparedShape,
    config: &PipelineConfig,
    clock: &mut StageClock,
) -> Result<Correspondence> {
    config.validate()?;
    let aligned = clock.time("align", || {
        align_ranks(&a.descriptors, a.shape.vertex_areas(), &b.descriptors, b.shape.vertex_areas())
    })?;
    let segmentation = clock.time("segment", || {
        select_k(
            SegmentationInput {
                adjacency: a.shape.adjacency(),
                areas: a.shape.vertex_areas(),
                descriptors: &a.descriptors,
            },
            SegmentationInput {
                adjacency: b.shape.adjacency(),
                areas: b.shape.vertex_areas(),
                descriptors: &aligned,
            },
            &config.segmentation,
        )
    })?;
    let graph_a = NodeGraph::from(&segmentation.graph_a);
    let graph_b = NodeGraph::from(&segmentation.graph_b);
    let graph_match = clock.time("match", || match_graphs(&graph_a, &graph_b, &config.matching))?;
    let one_to_one = if config.symmetric_only {
        None
    } else {
        Some(clock.time("symmetry", || {
            let regions_a = region_vertices(&segmentation, true);
            let regions_b = region_vertices(&segmentation, false);
            let areas_a: Vec<f64> = segmentation.graph_a.nodes.iter().map(|n| n.area).collect();
            let areas_b: Vec<f64> = segmentation.graph_b.nodes.iter().map(|n| n.area).collect();
            Ok(break_symmetry(
                &graph_match.matching,
                RegionLayout {
                    adjacency: a.shape.adjacency(),
                    regions: &regions_a,
                    areas: &areas_a,
                },
                RegionLayout {
                    adjacency: b.shape.adjacency(),
                    regions: &regions_b,
                    areas: &areas_b,
                },
            ))
        })?)
    };
    Ok(Correspondence {
        segmentation,
        graph_match,
        one_to_one,
    })
}

fn region_vertices(seg: &JointSegmentation, first: bool) -> Vec<Vec<usize>> {
    let g = if first { &seg.graph_a } else { &seg.graph_b };
    g.nodes.iter().map(|n| n.vertices.clone()).collect()
}

/// Everything one `match` run produces.
#[derive(Debug, Clone)]
pub struct MatchRun {
    pub report: CorrespondenceReport,
    pub timings: Timings,
    pub shape_a: PreparedShape,
    pub shape_b: PreparedShape,
    pub correspondence: Correspondence,
}

pub fn run_match(
    path_a: &Path,
    path_b: &Path,
    config: &PipelineConfig,
    gt: Option<&GroundTruthMap>,
) -> Result<MatchRun> {
    config.validate()?;
    let start = Instant::now();
    let mut clock = StageClock::default();
    let (shape_a, shape_b) = clock.time("load", || Ok((load_shape(path_a, None)?, load_shape(path_b, None)?)))?;
    if let Some(gt) = gt {
        gt.validate(shape_a.len(), shape_b.len())?;
    }
    let (a, b) = clock.time("descriptors", || {
        Ok((
            PreparedShape::new(shape_a, &config.time_steps)?,
            PreparedShape::new(shape_b, &config.time_steps)?,
        ))
    })?;
    let c = correspond(&a, &b, config, &mut clock)?;
    let inputs = vec![display_name(path_a), display_name(path_b)];
    let mut report = CorrespondenceReport::from_pair(inputs, config, &a, &b, &c, None);
    if let Some(gt) = gt {
        report.accuracy = Some(report.evaluate(&ground_truth_targets(gt), config.unmatched)?);
    }
    let timings = clock.into_timings(start.elapsed().as_secs_f64());
    Ok(MatchRun {
        report,
        timings,
        shape_a: a,
        shape_b: b,
        correspondence: c,
    })
}

/// Self-symmetry result: the shape matched against itself.
#[derive(Debug, Clone)]
pub struct SelfRun {
    pub report: CorrespondenceReport,
    pub timings: Timings,
    pub shape: PreparedShape,
    pub correspondence: Correspondence,
    /// Match set of every region, never empty.
    pub groups: Vec<Vec<usize>>,
}

/// Regions matched to themselves or to their symmetric counterparts; regions
/// left unmatched are assigned to themselves.
pub fn self_symmetry(shape: PreparedShape, config: &PipelineConfig, clock: &mut StageClock) -> Result<(Correspondence, Vec<Vec<usize>>, PreparedShape)> {
    let cfg = PipelineConfig {
        symmetric_only: true,
        ..*config
    };
    let c = correspond(&shape, &shape, &cfg, clock)?;
    let groups = self_match_sets(c.symmetric());
    Ok((c, groups, shape))
}

/// Match sets of a self-matching with unmatched regions mapped to themselves.
pub fn self_match_sets(m: &SymmetricMatching) -> Vec<Vec<usize>> {
    m.sets_a()
        .into_iter()
        .enumerate()
        .map(|(r, set)| if set.is_empty() { vec![r] } else { set })
        .collect()
}

pub fn run_self_symmetry(path: &Path, config: &PipelineConfig) -> Result<SelfRun> {
    config.validate()?;
    let start = Instant::now();
    let mut clock = StageClock::default();
    let shape = clock.time("load", || load_shape(path, None))?;
    let prepared = clock.time("descriptors", || PreparedShape::new(shape, &config.time_steps))?;
    let (c, groups, prepared) = self_symmetry(prepared, config, &mut clock)?;
    let report = CorrespondenceReport::from_self(display_name(path), config, &prepared, &c, &groups);
    let timings = clock.into_timings(start.elapsed().as_secs_f64());
    Ok(SelfRun {
        report,
        timings,
        shape: prepared,
        correspondence: c,
        groups,
    })
}

fn display_name(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Writes `report.json`, `timings.json`, per-vertex labels and colored PLYs
/// of shape A and (in pair mode) shape B.
pub fn write_outputs(
    dir: &Path,
    report: &CorrespondenceReport,
    timings: &Timings,
    shape_a: &Shape,
    shape_b: Option<&Shape>,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    report.write(&dir.join("report.json"))?;
    timings.write(&dir.join("timings.json"))?;
    write_index_file(&dir.join("labels_a.txt"), &report.labels_a)?;
    let (colors_a, colors_b) = report.vertex_colors();
    write_colored_ply(&dir.join("regions_a.ply"), shape_a.positions(), shape_a.triangles(), &colors_a)?;
    if let Some(b) = shape_b {
        write_index_file(&dir.join("labels_b.txt"), &report.labels_b)?;
        write_colored_ply(&dir.join("regions_b.ply"), b.positions(), b.triangles(), &colors_b)?;
    }
    Ok(())
}
