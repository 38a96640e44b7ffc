//! `qgraph`: batch front end for spectra, eigensolutions and spectral
//! certificates on metric graphs.

mod commands;
mod config;
mod solution;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgraph::schnol::{ProfileKind, Thresholds};
use qgraph::table::Format;

use commands::Command;
use config::{parse_point, Bundle, Failure, RegionSpec};

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Quantum graph spectra and spectral certificates")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct Common {
    /// Graph specification (JSON).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Experiment bundle (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Measure perturbation μ (JSON).
    #[arg(long)]
    measure: Option<PathBuf>,
    /// Target cell width of the uniform mesh.
    #[arg(long = "mesh-h")]
    mesh_h: Option<f64>,
    /// Length at which half-infinite leads are cut.
    #[arg(long = "truncate-L")]
    truncate_l: Option<f64>,
    /// Directory for output files (`config.json` plus per-command results).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the eigensolver start block.
    #[arg(long)]
    seed: Option<u64>,
    /// Table format: `csv` or `jsonlines`.
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Validate inputs and print the resolved configuration only.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Debug, Args)]
struct SolutionArgs {
    /// Energy λ of the generalized eigenfunction.
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Seeds for the shooting method (JSON list).
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Exact solution written by `solve` (`solution.json`).
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Eigenvalues nearest a shift, as a table `index, eigenvalue, residual`.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Number of eigenvalues.
        #[arg(long)]
        count: Option<usize>,
        /// Eigenvalues nearest this value (default below the spectrum).
        #[arg(long, allow_negative_numbers = true)]
        shift: Option<f64>,
    },
    /// Exact generalized eigensolution from seeds, with its weak residual.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        /// Number of tent test functions.
        #[arg(long)]
        probes: Option<usize>,
        /// Samples per edge in the solution table.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Weyl-sequence certificate built from balls around a center.
    Schnol {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        /// Center `x₀`: a vertex label or `edge@offset`.
        #[arg(long, value_parser = parse_point)]
        center: Option<qgraph::metric_graph::PointSpec>,
        /// Cutoff width `b`.
        #[arg(long)]
        b: Option<f64>,
        /// Growth allowance: radii with `J(r + b) ≤ e^δ J(r)` qualify.
        #[arg(long)]
        delta: Option<f64>,
        /// Cutoff profile: `linear` or `smooth`.
        #[arg(long, value_parser = parse_profile)]
        profile: Option<ProfileKind>,
        /// Largest radius considered (default: the truncation horizon).
        #[arg(long)]
        radius_budget: Option<f64>,
        /// Largest final collar/core ratio for a certified verdict.
        #[arg(long)]
        ratio_threshold: Option<f64>,
        /// Largest final Weyl residual for a certified verdict.
        #[arg(long)]
        residual_threshold: Option<f64>,
    },
    /// Energy on `E` against the mass on its `b`-neighborhood.
    Caccioppoli {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solution: SolutionArgs,
        /// Center of the ball `E`.
        #[arg(long, value_parser = parse_point)]
        center: Option<qgraph::metric_graph::PointSpec>,
        /// Radius of the ball `E`.
        #[arg(long)]
        radius: Option<f64>,
        /// Cutoff width `b`.
        #[arg(long)]
        b: Option<f64>,
        /// `q` in `μ₋ ≤ q ℰ + C_q ‖·‖²` (with `--cq`).
        #[arg(long)]
        q: Option<f64>,
        /// `C_q` in the form bound (with `--q`).
        #[arg(long)]
        cq: Option<f64>,
    },
    /// Path distance between two points (vertex labels or `edge@offset`).
    Distance {
        #[command(flatten)]
        common: Common,
        /// First point.
        #[arg(value_parser = parse_point, allow_hyphen_values = true)]
        from: qgraph::metric_graph::PointSpec,
        /// Second point.
        #[arg(value_parser = parse_point, allow_hyphen_values = true)]
        to: qgraph::metric_graph::PointSpec,
    },
    /// Form bound `κ, c_κ` of the negative part of μ.
    Formbound {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: qgraph::Error| e.to_string())
}

fn parse_profile(s: &str) -> Result<ProfileKind, String> {
    match s {
        "linear" => Ok(ProfileKind::Linear),
        "smooth" => Ok(ProfileKind::Smooth),
        _ => Err(format!("unknown profile '{s}' (expected linear or smooth)")),
    }
}

impl Common {
    fn flags(&self) -> Bundle {
        Bundle {
            graph_file: self.graph.clone(),
            measure_file: self.measure.clone(),
            mesh_h: self.mesh_h,
            truncate_l: self.truncate_l,
            seed: self.seed,
            format: self.format,
            ..Bundle::default()
        }
    }
}

impl SolutionArgs {
    fn apply(&self, b: &mut Bundle) {
        b.lambda = self.lambda;
        b.seeds_file = self.seeds.clone();
        b.solution_file = self.solution.clone();
    }
}

/// The command, its shared flags and the flag overlay.
fn plan(sub: &Sub) -> (Command, &Common, Bundle) {
    match sub {
        Sub::Spectrum {
            common,
            count,
            shift,
        } => {
            let mut b = common.flags();
            b.count = *count;
            b.shift = *shift;
            (Command::Spectrum, common, b)
        }
        Sub::Solve {
            common,
            solution,
            probes,
            samples,
        } => {
            let mut b = common.flags();
            solution.apply(&mut b);
            b.probes = *probes;
            b.samples = *samples;
            (Command::Solve, common, b)
        }
        Sub::Schnol {
            common,
            solution,
            center,
            b: width,
            delta,
            profile,
            radius_budget,
            ratio_threshold,
            residual_threshold,
        } => {
            let mut b = common.flags();
            solution.apply(&mut b);
            b.center = center.clone();
            b.b = *width;
            b.delta = *delta;
            b.profile = *profile;
            b.radius_budget = *radius_budget;
            if ratio_threshold.is_some() || residual_threshold.is_some() {
                // Partial overrides are completed from the defaults here and
                // from the file in `thresholds_over`.
                b.thresholds = Some(Thresholds {
                    ratio: ratio_threshold.unwrap_or(f64::NAN),
                    residual: residual_threshold.unwrap_or(f64::NAN),
                });
            }
            (Command::Schnol, common, b)
        }
        Sub::Caccioppoli {
            common,
            solution,
            center,
            radius,
            b: width,
            q,
            cq,
        } => {
            let mut b = common.flags();
            solution.apply(&mut b);
            b.center = center.clone();
            b.b = *width;
            b.q = *q;
            b.c_q = *cq;
            b.region = radius.map(|r| RegionSpec::Ball {
                center: None,
                radius: r,
            });
            (Command::Caccioppoli, common, b)
        }
        Sub::Distance { common, from, to } => {
            let mut b = common.flags();
            b.from = Some(from.clone());
            b.to = Some(to.clone());
            (Command::Distance, common, b)
        }
        Sub::Formbound { common } => (Command::Formbound, common, common.flags()),
    }
}

/// Fills unset threshold components from the file, then the defaults.
fn thresholds_over(file: Option<Thresholds>, flags: Option<Thresholds>) -> Option<Thresholds> {
    let flags = flags?;
    let base = file.unwrap_or_default();
    Some(Thresholds {
        ratio: if flags.ratio.is_nan() { base.ratio } else { flags.ratio },
        residual: if flags.residual.is_nan() {
            base.residual
        } else {
            flags.residual
        },
    })
}

fn execute(sub: &Sub) -> Result<commands::Output, Failure> {
    let (command, common, mut flags) = plan(sub);
    let file = match &common.config {
        Some(path) => Bundle::load(path)?,
        None => Bundle::default(),
    };
    flags.thresholds = thresholds_over(file.thresholds, flags.thresholds);
    let bundle = file.overlay(flags);
    let output = commands::run(command, bundle, common.dry_run)?;
    if let (Some(dir), false) = (&common.out, common.dry_run) {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
        for (name, text) in &output.files {
            let path = dir.join(name);
            std::fs::write(&path, text)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("qgraph: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
