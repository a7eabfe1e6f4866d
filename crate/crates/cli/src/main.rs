use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use shapematch::geom::io::{load_shape, read_ground_truth, write_index_file, write_off, write_xyz};
use shapematch::geom::{sample_point_cloud, GroundTruthMap, ShapeKind};
use shapematch::pipeline::{
    export_indicator_constraints, ground_truth_targets, run_match, run_robustness_sweep, run_self_symmetry, summarize,
    sweep_csv, trials_csv, write_outputs, CorrespondenceReport, IndicatorConstraints, PipelineConfig, SweepConfig, SweepMode,
    SweepPair, UnmatchedPolicy,
};
use shapematch::matching::MatchingParams;
use shapematch::segment::SegmentationParams;
use shapematch::spectral::TimeSteps;
use shapematch::{synthetic, Error, Result};

#[derive(Parser)]
#[command(name = "shapematch", version, about = "Region-level correspondence between non-rigid shapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match the regions of two shapes.
    Match {
        a: PathBuf,
        b: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        /// Ground-truth vertex map from A to B, one target index per line.
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Match a shape against itself to find its intrinsic symmetries.
    #[command(name = "self")]
    SelfSymmetry {
        a: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Score an existing report against a ground-truth map.
    Eval {
        report: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        /// Leave unmatched regions out instead of counting them wrong.
        #[arg(long)]
        exclude_unmatched: bool,
    },
    /// Draw a noisy point cloud from a mesh.
    Sample {
        mesh: PathBuf,
        #[arg(long)]
        points: usize,
        /// Noise amplitude as a fraction of the bounding-box diagonal.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "cloud.xyz")]
        out: PathBuf,
        /// Also write the mesh vertex nearest to each sample.
        #[arg(long)]
        nearest: Option<PathBuf>,
    },
    /// Sampling and noise robustness sweep over a list of mesh pairs.
    Sweep {
        /// Lines of `A B [GT]`; paths are relative to the list file. Without
        /// GT the meshes must share vertex indexing.
        pairlist: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [6000, 3000, 1500, 500])]
        densities: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.01, 0.02])]
        noises: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        repeats: usize,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [ModeArg::MeshCloud, ModeArg::CloudCloud])]
        modes: Vec<ModeArg>,
        /// Worker threads, default one per CPU.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value = "sweep")]
        out: PathBuf,
    },
    /// Write region indicator functions of matched pairs for a functional-map solver.
    ExportConstraints {
        report: PathBuf,
        /// Use the one-to-one matching instead of the symmetric one.
        #[arg(long)]
        one_to_one: bool,
        #[arg(long, default_value = "constraints")]
        out: PathBuf,
    },
    /// Generate a synthetic articulated mesh.
    Synth {
        #[arg(value_enum)]
        figure: Figure,
        #[arg(long, default_value_t = 2500)]
        vertices: usize,
        /// Articulation amount in radians.
        #[arg(long, default_value_t = 0.0)]
        pose: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    MeshCloud,
    CloudCloud,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    Humanoid,
    Quadruped,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, default_value_t = 15)]
    t_steps: usize,
    #[arg(long, default_value_t = 0.03)]
    t_min: f64,
    #[arg(long, default_value_t = 0.25)]
    t_max: f64,
    #[arg(long, default_value_t = 5)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 8)]
    max_sym: usize,
    #[arg(long, default_value_t = 0.9)]
    gap: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Skip symmetry breaking.
    #[arg(long)]
    symmetric_only: bool,
    /// Leave unmatched regions out of accuracies instead of counting them wrong.
    #[arg(long)]
    exclude_unmatched: bool,
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        let d = PipelineConfig::default();
        PipelineConfig {
            time_steps: TimeSteps {
                count: self.t_steps,
                t_min: self.t_min,
                t_max: self.t_max,
            },
            segmentation: SegmentationParams {
                k_min: self.k_min,
                k_max: self.k_max,
                seed: self.seed,
                ..d.segmentation
            },
            matching: MatchingParams {
                sigma: self.sigma,
                max_symmetry_order: self.max_sym,
                gap_ratio: self.gap,
                ..d.matching
            },
            symmetric_only: self.symmetric_only,
            unmatched: policy(self.exclude_unmatched),
        }
    }
}

fn policy(exclude: bool) -> UnmatchedPolicy {
    if exclude {
        UnmatchedPolicy::Exclude
    } else {
        UnmatchedPolicy::CountWrong
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    print_text(&(serde_json::to_string_pretty(value)? + "\n"));
    Ok(())
}

// a closed pipe (`| head`) is not an error
fn print_text(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Match { a, b, opts, gt, out } => {
            let gt = gt.map(|p| read_ground_truth(&p)).transpose()?;
            let run = run_match(&a, &b, &opts.config(), gt.as_ref())?;
            write_outputs(&out, &run.report, &run.timings, &run.shape_a.shape, Some(&run.shape_b.shape))?;
            eprintln!(
                "k = {}, {} + {} regions, {} symmetric matches",
                run.report.k,
                run.report.segments_a,
                run.report.segments_b,
                run.report.symmetric.pairs.len()
            );
            if let Some(acc) = &run.report.accuracy {
                print_json(acc)?;
            }
            Ok(())
        }
        Command::SelfSymmetry { a, opts, out } => {
            let run = run_self_symmetry(&a, &opts.config())?;
            write_outputs(&out, &run.report, &run.timings, &run.shape.shape, None)?;
            print_json(&run.report.self_groups)
        }
        Command::Eval {
            report,
            gt,
            exclude_unmatched,
        } => {
            let report = CorrespondenceReport::read(&report)?;
            let gt = read_ground_truth(&gt)?;
            gt.validate(report.labels_a.len(), report.labels_b.len())?;
            let acc = report.evaluate(&ground_truth_targets(&gt), policy(exclude_unmatched))?;
            print_json(&acc)
        }
        Command::Sample {
            mesh,
            points,
            noise,
            seed,
            out,
            nearest,
        } => {
            let mesh = load_shape(&mesh, Some(ShapeKind::Mesh))?;
            let s = sample_point_cloud(&mesh, points, noise, seed)?;
            write_xyz(&out, &s.raw_positions)?;
            if let Some(p) = nearest {
                write_index_file(&p, &s.nearest_vertex)?;
            }
            Ok(())
        }
        Command::Sweep {
            pairlist,
            opts,
            densities,
            noises,
            repeats,
            modes,
            threads,
            out,
        } => {
            let pairs = read_pair_list(&pairlist)?;
            let mut cfg = SweepConfig {
                densities,
                noises,
                repeats,
                modes: modes
                    .into_iter()
                    .map(|m| match m {
                        ModeArg::MeshCloud => SweepMode::MeshToCloud,
                        ModeArg::CloudCloud => SweepMode::CloudToCloud,
                    })
                    .collect(),
                seed: opts.seed,
                pipeline: opts.config(),
                ..SweepConfig::default()
            };
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let rows = run_robustness_sweep(&pairs, &cfg)?;
            let cells = summarize(&rows);
            std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
            write_text(&out.join("sweep.csv"), &sweep_csv(&cells))?;
            write_text(&out.join("trials.csv"), &trials_csv(&rows))?;
            print_text(&sweep_csv(&cells));
            Ok(())
        }
        Command::ExportConstraints { report, one_to_one, out } => {
            let report = CorrespondenceReport::read(&report)?;
            let c = IndicatorConstraints::from_report(&report, one_to_one)?;
            export_indicator_constraints(&out, &c)?;
            eprintln!("{} region pairs written to {}", c.len(), out.display());
            Ok(())
        }
        Command::Synth {
            figure,
            vertices,
            pose,
            out,
        } => {
            let g = match figure {
                Figure::Humanoid => synthetic::humanoid_geometry(vertices, pose),
                Figure::Quadruped => synthetic::quadruped_geometry(vertices, pose),
            };
            write_off(&out, &g.positions, &g.triangles)
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn read_pair_list(path: &Path) -> Result<Vec<SweepPair>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: "expected `A B [GT]`".into(),
            });
        }
        let a = load_shape(base.join(fields[0]), Some(ShapeKind::Mesh))?;
        let b = load_shape(base.join(fields[1]), Some(ShapeKind::Mesh))?;
        let gt = match fields.get(2) {
            Some(g) => read_ground_truth(&base.join(g))?,
            None => GroundTruthMap::identity(a.len()),
        };
        pairs.push(SweepPair {
            name: format!("{}~{}", fields[0], fields[1]),
            a,
            b,
            gt,
        });
    }
    if pairs.is_empty() {
        return Err(Error::InvalidInput(format!("{} lists no pairs", path.display())));
    }
    Ok(pairs)
}
