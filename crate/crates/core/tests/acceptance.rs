//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p normalis-core --test acceptance`. Set
//! `NORMALIS_DIODE_MANIFEST` to a manifest of a real-data subset to include the
//! estimator-ordering check on it; otherwise that check is skipped.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::Vector3;
use normalis_core::candidates::{candidates_at, AxialCandidate, CandidateContext, Neighborhood, Thresholds};
use normalis_core::estimators::axial_optimal_inclination;
use normalis_core::gradient::compute_gradients;
use normalis_core::harness::{generate_suite, random_plane, run_benchmark, run_oracle_check, BenchOptions, SuiteConfig};
use normalis_core::io::{self, DepthInput, FloatImage};
use normalis_core::metrics::{angular_error_map, error_stats, fscore, iou, ConfusionCounts};
use normalis_core::synthetic::{add_noise, ground_truth_normals, render_depth, NoiseSpec, SceneSpec, Sphere};
use normalis_core::{
    estimate_normals, estimate_normals_from_inverse_depth, CameraIntrinsics, DepthImage, Estimator,
    EstimatorConfig, NormalMap, PointCloud,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
    Report(String),
}

type Check = fn() -> Result<Outcome, Box<dyn std::error::Error>>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

/// Largest angle between two normal maps over pixels at least `border` from the edge.
fn max_angle_rad(a: &NormalMap, b: &NormalMap, border: usize) -> f64 {
    let (w, h) = a.dims();
    let mut worst: f64 = 0.0;
    for v in border..h - border {
        for u in border..w - border {
            match (a.get(u, v), b.get(u, v)) {
                (Some(x), Some(y)) => worst = worst.max(x.cross(&y).norm().atan2(x.dot(&y))),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

fn inclination_oracle() -> Result<Outcome, Box<dyn std::error::Error>> {
    let start = Instant::now();
    let s = run_oracle_check(10_000, 20_240_601, 1e-3)?;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "10000 sets, max |dtheta| {:.3e} rad, min objective margin {:.3e}, {} violations, {secs:.2} s",
        s.max_theta_deviation, s.min_objective_margin, s.violations
    );
    Ok(verdict(s.passed() && s.max_theta_deviation <= 1e-3 && s.min_objective_margin >= -1e-9 && secs < 10.0, detail))
}

fn exact_planes() -> Result<Outcome, Box<dyn std::error::Error>> {
    let k = CameraIntrinsics::centered(100.0, 160, 120)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = EstimatorConfig::new(Estimator::SnePlus);
    let (mut worst_mean, mut worst_max): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let scene = SceneSpec::Plane(random_plane(&mut rng, 75f64.to_radians(), 5.0));
        let depth = render_depth(&scene, &k)?;
        let gt = ground_truth_normals(&scene, &k)?;
        let est = estimate_normals(&depth, &k, &cfg)?;
        let map = angular_error_map(&est, &gt)?.restricted(|u, v| u >= 2 && v >= 2 && u + 2 < 160 && v + 2 < 120);
        let stats = error_stats(&map)?;
        worst_mean = worst_mean.max(stats.mean);
        worst_max = worst_max.max(stats.max);
    }
    Ok(verdict(
        worst_mean < 0.2 && worst_max < 1.0,
        format!("100 planes up to 75 deg, worst per-plane mean {worst_mean:.3e} deg, max {worst_max:.3e} deg"),
    ))
}

fn axial_invariance() -> Result<Outcome, Box<dyn std::error::Error>> {
    let k = CameraIntrinsics::centered(100.0, 160, 120)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let scenes = [
        SceneSpec::Sphere(Sphere {
            center: Vector3::new(0.2, -0.1, 6.0),
            radius: 3.0,
        }),
        SceneSpec::Plane(random_plane(&mut rng, 1.2, 4.0)),
    ];
    let neighborhood = Neighborhood::ring(1)?;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for (i, scene) in scenes.iter().enumerate() {
        // Noise makes the candidates disagree, so the check is not vacuous.
        let depth = add_noise(&render_depth(scene, &k)?, &NoiseSpec::relative(0.01, i as u64))?;
        let points = PointCloud::from_depth(&depth, &k)?;
        let grads = compute_gradients(&depth.to_inverse_depth(), Default::default())?;
        let ctx = CandidateContext {
            points: &points,
            grads: &grads,
            intrinsics: &k,
            neighborhood: &neighborhood,
            thresholds: Thresholds::default(),
        };
        while checked < 500 * (i + 1) {
            let (u, v) = (rng.random_range(0..160), rng.random_range(0..120));
            let Some(px) = candidates_at(u, v, &ctx) else { continue };
            if px.frontoparallel || px.candidates.is_empty() {
                continue;
            }
            let flipped: Vec<AxialCandidate> = px
                .candidates
                .iter()
                .map(|c| if rng.random_bool(0.5) { c.negated() } else { *c })
                .collect();
            let axis = |c: &[AxialCandidate]| -> Result<Vector3<f64>, normalis_core::Error> {
                let t = axial_optimal_inclination(c)?.theta;
                Ok(Vector3::new(t.sin() * px.azimuth.cos(), t.sin() * px.azimuth.sin(), t.cos()))
            };
            let (a, b) = (axis(&px.candidates)?, axis(&flipped)?);
            worst = worst.max(a.cross(&b).norm().atan2(a.dot(&b).abs()));
            checked += 1;
        }
    }
    Ok(verdict(worst < 1e-9, format!("{checked} pixels, max axis change {worst:.3e} rad")))
}

fn ridge_band() -> Result<Outcome, Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let cfg = SuiteConfig {
        seed: 2024,
        planes: 0,
        dihedrals: 20,
        noise: Some(normalis_core::synthetic::NoiseSigma::Relative(0.005)),
        ..SuiteConfig::default()
    };
    let manifest = generate_suite(&cfg, dir.path())?;
    let opts = BenchOptions {
        estimators: vec![Estimator::SnePlus, Estimator::Sne],
        repetitions: 1,
        ..BenchOptions::default()
    };
    let report = run_benchmark(&manifest, &opts)?;
    if report.has_failures() {
        return Ok(Outcome::Fail("benchmark rows failed".into()));
    }
    let summary = report.summary();
    let band = |e: Estimator| summary[e.name()].band_mean_deg.unwrap_or(f64::NAN);
    let (plus, base) = (band(Estimator::SnePlus), band(Estimator::Sne));
    Ok(verdict(
        plus <= base,
        format!("20 dihedrals, sigma 0.5%: band mean sne-plus {plus:.4} deg, sne {base:.4} deg"),
    ))
}

fn real_data_ordering() -> Result<Outcome, Box<dyn std::error::Error>> {
    let Ok(path) = std::env::var("NORMALIS_DIODE_MANIFEST") else {
        return Ok(Outcome::Skip("NORMALIS_DIODE_MANIFEST not set".into()));
    };
    let manifest = io::load_manifest(Path::new(&path))?;
    let opts = BenchOptions {
        estimators: vec![Estimator::SnePlus, Estimator::ThreeF2NMean, Estimator::PlanePca],
        repetitions: 1,
        ..BenchOptions::default()
    };
    let report = run_benchmark(&manifest, &opts)?;
    let summary = report.summary();
    let mean = |e: Estimator| summary[e.name()].ea_mean_deg.unwrap_or(f64::NAN);
    let (a, b, c) = (mean(Estimator::SnePlus), mean(Estimator::ThreeF2NMean), mean(Estimator::PlanePca));
    Ok(verdict(
        a < b && b < c,
        format!("{} entries: sne-plus {a:.3}, 3f2n-mean {b:.3}, plane-pca {c:.3} deg", manifest.entries.len()),
    ))
}

fn metric_identities() -> Result<Outcome, Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c = ConfusionCounts {
            tp: rng.random_range(0..10_000),
            fp: rng.random_range(0..10_000),
            fn_: rng.random_range(0..10_000),
            tn: rng.random_range(0..10_000),
        };
        if c.tp + c.fp + c.fn_ == 0 {
            continue;
        }
        // both scores are percentages
        let j = iou(&c)? / 100.0;
        worst = worst.max((fscore(&c)? / 100.0 - 2.0 * j / (1.0 + j)).abs());
    }
    let perfect = ConfusionCounts { tp: 50, fp: 0, fn_: 0, tn: 50 };
    let disjoint = ConfusionCounts { tp: 0, fp: 30, fn_: 20, tn: 50 };
    let p = (fscore(&perfect)?, iou(&perfect)?);
    let d = (fscore(&disjoint)?, iou(&disjoint)?);
    Ok(verdict(
        worst <= 1e-12 && p == (100.0, 100.0) && d == (0.0, 0.0),
        format!("max |Fsc - 2J/(1+J)| {worst:.3e}, perfect {}/{}, disjoint {}/{}", p.0, p.1, d.0, d.1),
    ))
}

fn scale_invariance() -> Result<Outcome, Box<dyn std::error::Error>> {
    let k = CameraIntrinsics::centered(100.0, 160, 120)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let depth = render_depth(&SceneSpec::Plane(random_plane(&mut rng, 1.2, 5.0)), &k)?;
        for e in Estimator::ALL {
            let cfg = EstimatorConfig::new(e);
            let base = estimate_normals(&depth, &k, &cfg)?;
            for s in [0.5, 2.0, 10.0] {
                worst = worst.max(max_angle_rad(&base, &estimate_normals(&depth.scaled(s), &k, &cfg)?, 0));
            }
            let disparity = depth.to_disparity(k.fx, 0.54);
            let from_disp = estimate_normals_from_inverse_depth(&disparity.as_inverse_depth(), &k, &cfg)?;
            worst = worst.max(max_angle_rad(&base, &from_disp, 0));
        }
    }
    Ok(verdict(worst < 1e-6, format!("10 planes x 5 estimators, max deviation {worst:.3e} rad")))
}

fn format_round_trips() -> Result<Outcome, Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let (w, h) = (37, 23);
    let data: Vec<f32> = (0..w * h * 3).map(|_| f32::from_bits(rng.random::<u32>() & 0xff7f_ffff)).collect();
    let img = FloatImage::new(w, h, 3, data)?;
    let pfm_path = dir.path().join("x.pfm");
    io::write_pfm(&img, &pfm_path)?;
    let back = io::read_pfm(&pfm_path)?;
    let pfm_exact = back.data.iter().zip(&img.data).all(|(a, b)| a.to_bits() == b.to_bits()) && back.width == w && back.height == h;

    let k = CameraIntrinsics::centered(100.0, 160, 120)?;
    let depth = render_depth(&SceneSpec::Plane(random_plane(&mut rng, 1.0, 5.0)), &k)?;
    let depth = DepthImage::from_fn(160, 120, |u, v| depth.get(u, v).filter(|&z| z < 60.0));
    let png_path = dir.path().join("d.png");
    io::write_depth(&DepthInput::Depth(depth.clone()), &png_path, io::DepthFormat::Png16Millimeters)?;
    let DepthInput::Depth(d2) = io::read_depth(&png_path, io::DepthFormat::Png16Millimeters)? else {
        unreachable!()
    };
    let mut depth_err: f64 = 0.0;
    let mut mask_same = true;
    for v in 0..120 {
        for u in 0..160 {
            match (depth.get(u, v), d2.get(u, v)) {
                (Some(a), Some(b)) => depth_err = depth_err.max((a - b).abs()),
                (None, None) => {}
                _ => mask_same = false,
            }
        }
    }

    let scene = SceneSpec::Sphere(Sphere {
        center: Vector3::new(0.0, 0.0, 6.0),
        radius: 3.0,
    });
    let normals = ground_truth_normals(&scene, &k)?;
    let npath = dir.path().join("n.png");
    io::write_normals(&normals, &npath)?;
    let n2 = io::read_normals(&npath)?;
    let normal_err = max_angle_rad(&normals, &n2, 0).to_degrees();

    Ok(verdict(
        pfm_exact && mask_same && depth_err <= 5e-4 && normal_err <= 0.01,
        format!(
            "pfm bit-exact {pfm_exact}, png16 depth max {:.3} mm, normal png max {normal_err:.2e} deg",
            depth_err * 1e3
        ),
    ))
}

fn throughput() -> Result<Outcome, Box<dyn std::error::Error>> {
    let k = CameraIntrinsics::new(721.5, 721.5, 609.6, 172.9, 1242, 375)?;
    let scene = SceneSpec::Plane(normalis_core::synthetic::Plane::through(
        Vector3::new(0.0, -1.0, -0.05),
        Vector3::new(0.0, 1.65, 10.0),
    ));
    let depth = render_depth(&scene, &k)?;
    let cfg = EstimatorConfig::default();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build()?;
    let mut times = pool.install(|| -> Result<Vec<f64>, normalis_core::Error> {
        estimate_normals(&depth, &k, &cfg)?;
        (0..5)
            .map(|_| {
                let t = Instant::now();
                estimate_normals(&depth, &k, &cfg)?;
                Ok(t.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    })?;
    times.sort_by(f64::total_cmp);
    let ms = times[2];
    let target = if ms <= 30.0 { "within" } else { "over" };
    Ok(Outcome::Report(format!("sne-plus 1242x375 single thread: median {ms:.1} ms ({target} 30 ms target)")))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("closed-form inclination vs grid oracle", inclination_oracle),
        ("exact plane recovery", exact_planes),
        ("axial sign invariance", axial_invariance),
        ("ridge-band advantage over sne", ridge_band),
        ("real-data estimator ordering", real_data_ordering),
        ("metric identities", metric_identities),
        ("scale and disparity invariance", scale_invariance),
        ("format round trips", format_round_trips),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let (tag, detail) = match check() {
            Ok(Outcome::Pass(d)) => ("PASS", d),
            Ok(Outcome::Fail(d)) => {
                failed += 1;
                ("FAIL", d)
            }
            Ok(Outcome::Skip(d)) => ("SKIP", d),
            Ok(Outcome::Report(d)) => ("INFO", d),
            Err(e) => {
                failed += 1;
                ("FAIL", format!("error: {e}"))
            }
        };
        println!("[{tag}] {}. {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance check(s) failed");
        ExitCode::FAILURE
    }
}
