//! Robustness to sampling density and noise.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::eval::{compose, region_accuracy, vertex_to_sample};
use super::{correspond, PipelineConfig, PreparedShape, StageClock};
use crate::error::{Error, Result};
use crate::geom::{sample_point_cloud, GroundTruthMap, SampledCloud, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Mesh A against a cloud sampled from mesh B.
    MeshToCloud,
    /// Clouds sampled from both meshes.
    CloudToCloud,
}

impl SweepMode {
    pub fn name(self) -> &'static str {
        match self {
            SweepMode::MeshToCloud => "mesh_cloud",
            SweepMode::CloudToCloud => "cloud_cloud",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub densities: Vec<usize>,
    /// Noise amplitude as a fraction of the bounding-box diagonal.
    pub noises: Vec<f64>,
    pub repeats: usize,
    pub modes: Vec<SweepMode>,
    pub seed: u64,
    /// Worker threads; trials are independent.
    pub threads: usize,
    pub pipeline: PipelineConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            densities: vec![6000, 3000, 1500, 500],
            noises: vec![0.0, 0.01, 0.02],
            repeats: 4,
            modes: vec![SweepMode::MeshToCloud, SweepMode::CloudToCloud],
            seed: 42,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            pipeline: PipelineConfig::default(),
        }
    }
}

/// Two meshes and the ground-truth map from the first to the second.
#[derive(Debug, Clone)]
pub struct SweepPair {
    pub name: String,
    pub a: Shape,
    pub b: Shape,
    pub gt: GroundTruthMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub pair: String,
    pub mode: SweepMode,
    pub points: usize,
    pub noise: f64,
    pub repeat: usize,
    /// Zero for failed trials.
    pub symmetric: f64,
    pub one_to_one: f64,
    pub error: Option<String>,
}

/// Mean accuracy of one density and noise cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub mode: SweepMode,
    pub points: usize,
    pub noise: f64,
    pub trials: usize,
    pub failures: usize,
    pub symmetric: f64,
    pub one_to_one: f64,
}

#[derive(Debug, Clone, Copy)]
struct Trial {
    pair: usize,
    mode: SweepMode,
    density: usize,
    noise: usize,
    repeat: usize,
}

fn mix(mut h: u64, x: u64) -> u64 {
    h ^= x.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
    h
}

/// Sampling seed shared by both modes, so they see the same clouds.
fn sample_seed(base: u64, t: &Trial, side: u64) -> u64 {
    [t.pair as u64, t.density as u64, t.noise as u64, t.repeat as u64, side]
        .into_iter()
        .fold(base, mix)
}

fn run_trial(
    pair: &SweepPair,
    mesh_a: &PreparedShape,
    t: &Trial,
    cfg: &SweepConfig,
) -> Result<(f64, f64)> {
    let points = cfg.densities[t.density];
    let noise = cfg.noises[t.noise];
    let mut clock = StageClock::default();
    let cloud_b = sample_point_cloud(&pair.b, points, noise, sample_seed(cfg.seed, t, 1))?;
    let b_transfer = vertex_to_sample(pair.b.positions(), &cloud_b.raw_positions, &cloud_b.nearest_vertex);
    let gt: Vec<Option<usize>> = pair.gt.target_index.iter().map(|&v| Some(v)).collect();
    let prepared_b = PreparedShape::new(cloud_b.cloud, &cfg.pipeline.time_steps)?;

    let (source, target, owned);
    match t.mode {
        SweepMode::MeshToCloud => {
            target = compose(&gt, &b_transfer);
            source = mesh_a;
        }
        SweepMode::CloudToCloud => {
            let SampledCloud { cloud, nearest_vertex, .. } =
                sample_point_cloud(&pair.a, points, noise, sample_seed(cfg.seed, t, 0))?;
            let through_mesh: Vec<Option<usize>> = nearest_vertex.iter().map(|&v| gt[v]).collect();
            target = compose(&through_mesh, &b_transfer);
            owned = PreparedShape::new(cloud, &cfg.pipeline.time_steps)?;
            source = &owned;
        }
    }
    let c = correspond(source, &prepared_b, &cfg.pipeline, &mut clock)?;
    let areas = source.shape.vertex_areas();
    let policy = cfg.pipeline.unmatched;
    let symmetric = region_accuracy(c.labels_a(), c.labels_b(), &c.symmetric().sets_a(), &target, areas, policy);
    let one_to_one = match c.one_to_one_sets() {
        Some(sets) => region_accuracy(c.labels_a(), c.labels_b(), &sets, &target, areas, policy),
        None => symmetric,
    };
    Ok((symmetric, one_to_one))
}

/// Runs every pair, mode, density, noise level and repeat. A trial whose
/// pipeline fails scores zero and records its error.
pub fn run_robustness_sweep(pairs: &[SweepPair], cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.pipeline.validate()?;
    if cfg.densities.is_empty() || cfg.noises.is_empty() || cfg.repeats == 0 || cfg.modes.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one density, noise, repeat and mode".into()));
    }
    for p in pairs {
        p.gt.validate(p.a.len(), p.b.len())?;
    }
    let meshes: Vec<PreparedShape> = pairs
        .iter()
        .map(|p| PreparedShape::new(p.a.clone(), &cfg.pipeline.time_steps))
        .collect::<Result<_>>()?;

    let mut trials = Vec::new();
    for pair in 0..pairs.len() {
        for &mode in &cfg.modes {
            for density in 0..cfg.densities.len() {
                for noise in 0..cfg.noises.len() {
                    for repeat in 0..cfg.repeats {
                        trials.push(Trial {
                            pair,
                            mode,
                            density,
                            noise,
                            repeat,
                        });
                    }
                }
            }
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; trials.len()]);
    std::thread::scope(|s| {
        for _ in 0..cfg.threads.clamp(1, trials.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(t) = trials.get(i) else { break };
                let outcome = run_trial(&pairs[t.pair], &meshes[t.pair], t, cfg);
                let (symmetric, one_to_one, error) = match outcome {
                    Ok((s, o)) => (s, o, None),
                    Err(e) => (0.0, 0.0, Some(e.to_string())),
                };
                let row = SweepRow {
                    pair: pairs[t.pair].name.clone(),
                    mode: t.mode,
                    points: cfg.densities[t.density],
                    noise: cfg.noises[t.noise],
                    repeat: t.repeat,
                    symmetric,
                    one_to_one,
                    error,
                };
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    Ok(results.into_inner().unwrap().into_iter().map(|r| r.expect("every trial ran")).collect())
}

/// Averages over pairs and repeats, in first-appearance order.
pub fn summarize(rows: &[SweepRow]) -> Vec<SweepCell> {
    let mut cells: Vec<SweepCell> = Vec::new();
    for r in rows {
        let cell = match cells
            .iter_mut()
            .find(|c| c.mode == r.mode && c.points == r.points && c.noise == r.noise)
        {
            Some(c) => c,
            None => {
                cells.push(SweepCell {
                    mode: r.mode,
                    points: r.points,
                    noise: r.noise,
                    trials: 0,
                    failures: 0,
                    symmetric: 0.0,
                    one_to_one: 0.0,
                });
                cells.last_mut().unwrap()
            }
        };
        cell.trials += 1;
        cell.failures += r.error.is_some() as usize;
        cell.symmetric += r.symmetric;
        cell.one_to_one += r.one_to_one;
    }
    for c in &mut cells {
        c.symmetric /= c.trials as f64;
        c.one_to_one /= c.trials as f64;
    }
    cells
}

pub fn cell<'a>(cells: &'a [SweepCell], mode: SweepMode, points: usize, noise: f64) -> Option<&'a SweepCell> {
    cells.iter().find(|c| c.mode == mode && c.points == points && c.noise == noise)
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut s = String::from("mode,points,noise,trials,failures,symmetric_accuracy,one_to_one_accuracy\n");
    for c in cells {
        writeln!(
            s,
            "{},{},{},{},{},{:.6},{:.6}",
            c.mode.name(),
            c.points,
            c.noise,
            c.trials,
            c.failures,
            c.symmetric,
            c.one_to_one
        )
        .unwrap();
    }
    s
}

pub fn trials_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("pair,mode,points,noise,repeat,symmetric_accuracy,one_to_one_accuracy,error\n");
    for r in rows {
        let err = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            s,
            "{},{},{},{},{},{:.6},{:.6},{}",
            r.pair,
            r.mode.name(),
            r.points,
            r.noise,
            r.repeat,
            r.symmetric,
            r.one_to_one,
            err
        )
        .unwrap();
    }
    s
}

pub fn write_sweep_csv(path: &Path, cells: &[SweepCell]) -> Result<()> {
    std::fs::write(path, sweep_csv(cells)).map_err(|e| Error::io(path, e))
}
