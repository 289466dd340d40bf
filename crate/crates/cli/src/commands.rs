use std::path::Path;

use anyhow::{bail, Context};
use normalis_core::harness::{self, normal_to_rgb8, BenchOptions, SuiteConfig};
use normalis_core::io::{self, DepthFormat};
use normalis_core::metrics::{angular_error_map, error_stats};
use normalis_core::synthetic::NoiseSigma;
use normalis_core::{estimate_normals_from_inverse_depth, CameraIntrinsics, Estimator, EstimatorConfig, Neighborhood};

use crate::config::FileConfig;
use crate::{BenchArgs, EstimateArgs, EstimatorArgs, OracleArgs, Status, SynthArgs};

const DEFAULT_TRIALS: usize = 10_000;
const DEFAULT_ORACLE_SEED: u64 = 0;
const DEFAULT_GRID_STEP: f64 = 1e-3;

pub fn synth(a: SynthArgs, file: &FileConfig) -> anyhow::Result<Status> {
    let mut cfg = file.synth.clone().unwrap_or_default();
    if let Some(s) = a.seed.or(file.seed) {
        cfg.seed = s;
    }
    let SuiteConfig {
        planes,
        spheres,
        dihedrals,
        width,
        height,
        focal,
        ..
    } = &mut cfg;
    *planes = a.planes.unwrap_or(*planes);
    *spheres = a.spheres.unwrap_or(*spheres);
    *dihedrals = a.dihedrals.unwrap_or(*dihedrals);
    *width = a.width.unwrap_or(*width);
    *height = a.height.unwrap_or(*height);
    *focal = a.focal.unwrap_or(*focal);
    if let Some(f) = a.noise {
        cfg.noise = Some(NoiseSigma::Relative(f));
    }
    if let Some(f) = a.depth_format {
        cfg.depth_format = f;
    }
    let manifest = harness::generate_suite(&cfg, &a.out)?;
    println!(
        "wrote {} scenes to {}",
        manifest.entries.len(),
        a.out.join("manifest.toml").display()
    );
    Ok(Status::Ok)
}

fn estimator_config(estimator: Estimator, a: &EstimatorArgs, file: &FileConfig) -> anyhow::Result<EstimatorConfig> {
    let mut cfg = EstimatorConfig::new(estimator);
    if let Some(k) = a.kernel.or(file.kernel) {
        cfg.kernel = k;
    }
    if let Some(r) = a.neighborhood_radius.or(file.neighborhood_radius) {
        cfg.neighborhood = Neighborhood::ring(r)?;
    }
    if let Some(w) = a.pca_window.or(file.pca_window) {
        cfg.pca_window = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn infer_format(path: &Path) -> DepthFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("png") => DepthFormat::Png16Millimeters,
        _ => DepthFormat::PfmMeters,
    }
}

pub fn estimate(a: EstimateArgs, file: &FileConfig) -> anyhow::Result<Status> {
    let format = a.depth_format.unwrap_or_else(|| infer_format(&a.depth));
    let input = io::read_depth(&a.depth, format)?;
    let (w, h) = input.dims();
    let k = match (&a.intrinsics, a.focal) {
        (Some(v), _) => CameraIntrinsics::new(v[0], v[1], v[2], v[3], w, h)?,
        (None, Some(f)) => CameraIntrinsics::centered(f, w, h)?,
        (None, None) => bail!("either --focal or --intrinsics is required"),
    };
    let cfg = estimator_config(a.estimator, &a.estimator_args, file)?;
    let normals = estimate_normals_from_inverse_depth(&input.to_inverse_depth(), &k, &cfg)?;
    io::write_normals(&normals, &a.out)?;
    if let Some(p) = &a.preview {
        io::write_rgb8_png(w, h, normal_to_rgb8(&normals), p)?;
    }
    println!("{}: {} of {} pixels valid", a.out.display(), normals.valid_count(), w * h);
    if let Some(p) = &a.gt {
        let gt = io::read_normals(p)?;
        let stats = error_stats(&angular_error_map(&normals, &gt)?)
            .with_context(|| format!("no pixel is valid in both the estimate and {}", p.display()))?;
        println!(
            "ea_mean_deg {:.6} ea_median_deg {:.6} ea_max_deg {:.6} valid_px {}",
            stats.mean, stats.median, stats.max, stats.count
        );
    }
    Ok(Status::Ok)
}

pub fn bench(a: BenchArgs, file: &FileConfig) -> anyhow::Result<Status> {
    let manifest = io::load_manifest(&a.manifest)?;
    let defaults = BenchOptions::default();
    let args = &a.estimator_args;
    let opts = BenchOptions {
        estimators: a.estimators.or_else(|| file.estimators.clone()).unwrap_or(defaults.estimators),
        kernel: args.kernel.or(file.kernel).unwrap_or(defaults.kernel),
        neighborhood_radius: args
            .neighborhood_radius
            .or(file.neighborhood_radius)
            .unwrap_or(defaults.neighborhood_radius),
        pca_window: args.pca_window.or(file.pca_window).unwrap_or(defaults.pca_window),
        repetitions: a.repetitions.or(file.repetitions).unwrap_or(defaults.repetitions),
        border: a.border.or(file.border).unwrap_or(defaults.border),
        error_map_dir: a.emit_error_maps,
    };
    if opts.repetitions == 0 {
        bail!("--repetitions must be at least 1");
    }
    let report = harness::run_benchmark(&manifest, &opts)?;
    if let Some(p) = &a.out_csv {
        report.save_csv(p)?;
    }
    if let Some(p) = &a.out_json {
        report.save_json(p)?;
    }
    let na = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    println!("{:<14} {:>7} {:>6} {:>12} {:>12} {:>10}", "estimator", "entries", "failed", "ea_mean_deg", "band_deg", "ms/image");
    for agg in &report.aggregates {
        println!(
            "{:<14} {:>7} {:>6} {:>12} {:>12} {:>10}",
            agg.estimator.name(),
            agg.entries,
            agg.failed,
            na(agg.ea_mean_deg),
            na(agg.band_mean_deg),
            na(agg.median_ms_per_image)
        );
    }
    for row in report.rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} / {}: {}", row.entry_id, row.estimator, row.status());
    }
    Ok(if report.has_failures() { Status::Failed } else { Status::Ok })
}

pub fn oracle_check(a: OracleArgs, file: &FileConfig) -> anyhow::Result<Status> {
    let trials = a.trials.map(|t| t as usize).or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        bail!("trials must be at least 1");
    }
    let seed = a.seed.or(file.seed).unwrap_or(DEFAULT_ORACLE_SEED);
    let step = a.grid_step.or(file.grid_step).unwrap_or(DEFAULT_GRID_STEP);
    let summary = harness::run_oracle_check(trials, seed, step)?;
    println!("{summary}");
    Ok(if summary.passed() { Status::Ok } else { Status::Failed })
}
