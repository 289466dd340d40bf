//! `normalis`: synthetic depth suites, surface-normal estimation and
//! benchmarking from the command line.
//!
//! Exit codes: 0 on success, 1 when a check or benchmark entry fails, 2 on
//! usage or I/O errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use normalis_core::io::DepthFormat;
use normalis_core::{Estimator, GradientKernel};

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "normalis", version, about = "Surface normals from depth images")]
struct Cli {
    /// TOML file with default values for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NORMALIS_JOBS", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic suite with exact ground-truth normals.
    Synth(SynthArgs),
    /// Estimate the normal map of one depth image.
    Estimate(EstimateArgs),
    /// Run estimators over a dataset manifest and write a report.
    Bench(BenchArgs),
    /// Check the closed-form inclination against a brute-force grid.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Output directory; receives depth/, normals/ and manifest.toml.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    spheres: Option<usize>,
    #[arg(long)]
    dihedrals: Option<usize>,
    /// Gaussian depth noise as a fraction of depth, e.g. 0.005.
    #[arg(long, value_name = "FRACTION")]
    noise: Option<f64>,
    #[arg(long)]
    depth_format: Option<DepthFormat>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    focal: Option<f64>,
}

#[derive(Debug, Clone, Args)]
struct EstimatorArgs {
    #[arg(long)]
    kernel: Option<GradientKernel>,
    #[arg(long)]
    neighborhood_radius: Option<usize>,
    /// Window side length for plane-pca.
    #[arg(long)]
    pca_window: Option<usize>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_name = "FILE")]
    depth: PathBuf,
    /// Defaults to png16-millimeters for .png files and pfm-meters otherwise.
    #[arg(long)]
    depth_format: Option<DepthFormat>,
    /// Focal length in pixels, principal point at the image center.
    #[arg(long, conflicts_with = "intrinsics")]
    focal: Option<f64>,
    /// Full intrinsics as `fx,fy,cx,cy`.
    #[arg(long, value_name = "FX,FY,CX,CY", value_parser = parse_intrinsics)]
    intrinsics: Option<[f64; 4]>,
    #[arg(long, default_value_t = Estimator::SnePlus)]
    estimator: Estimator,
    #[command(flatten)]
    estimator_args: EstimatorArgs,
    /// Normal map output; `.pfm` for float, `.png` for 16-bit RGBA.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// 8-bit color preview of the normals.
    #[arg(long, value_name = "PNG")]
    preview: Option<PathBuf>,
    /// Ground-truth normals; prints the angular error when given.
    #[arg(long, value_name = "FILE")]
    gt: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_name = "FILE")]
    manifest: PathBuf,
    /// Comma-separated list; defaults to all estimators.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<Estimator>>,
    #[command(flatten)]
    estimator_args: EstimatorArgs,
    /// Timed runs per image (the median is reported).
    #[arg(long)]
    repetitions: Option<usize>,
    /// Pixels this close to the image edge are not scored.
    #[arg(long)]
    border: Option<usize>,
    #[arg(long, value_name = "FILE")]
    out_csv: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    out_json: Option<PathBuf>,
    /// Directory for per-entry error-map PNGs.
    #[arg(long, value_name = "DIR")]
    emit_error_maps: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid_step: Option<f64>,
}

/// Whether a command that ran to completion met its checks.
#[derive(Debug, PartialEq, Eq)]
enum Status {
    Ok,
    Failed,
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(jobs) = cli.jobs.map(|j| j as usize).or(file.jobs) {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match cli.command {
        Command::Synth(a) => commands::synth(a, &file),
        Command::Estimate(a) => commands::estimate(a, &file),
        Command::Bench(a) => commands::bench(a, &file),
        Command::OracleCheck(a) => commands::oracle_check(a, &file),
    }
}

fn parse_intrinsics(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 comma-separated values, got {}", v.len()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
