use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::io::{self, DatasetManifest, DepthFormat, DepthInput, ManifestEntry, RidgeBand};
use crate::synthetic::{add_noise, ground_truth_normals, render_depth, Dihedral, NoiseSigma, NoiseSpec, Plane, SceneSpec, Sphere};

/// What `normalis synth` renders. Every field has a default, so an empty
/// config file yields the 100-plane suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub focal: f64,
    pub planes: usize,
    pub max_inclination_deg: f64,
    /// Depth at which every plane, sphere center and ridge meets the
    /// principal ray region.
    pub depth: f64,
    pub spheres: usize,
    pub sphere_radius: f64,
    pub dihedrals: usize,
    /// Angle between the two half-plane normals.
    pub fold_deg: f64,
    pub band_halfwidth: f64,
    pub noise: Option<NoiseSigma>,
    pub depth_format: DepthFormat,
    /// Stereo baseline in meters, for `pfm-disparity` output.
    pub baseline: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            width: 160,
            height: 120,
            focal: 100.0,
            planes: 100,
            max_inclination_deg: 75.0,
            depth: 5.0,
            spheres: 0,
            sphere_radius: 2.0,
            dihedrals: 0,
            fold_deg: 90.0,
            band_halfwidth: 2.0,
            noise: None,
            depth_format: DepthFormat::PfmMeters,
            baseline: 0.54,
        }
    }
}

impl SuiteConfig {
    pub fn intrinsics(&self) -> Result<CameraIntrinsics> {
        CameraIntrinsics::centered(self.focal, self.width, self.height)
    }

    pub fn scene_count(&self) -> usize {
        self.planes + self.spheres + self.dihedrals
    }
}

/// Plane through `(0, 0, depth)` whose normal is at most `max_inclination`
/// radians from the optical axis, facing the camera.
pub fn random_plane(rng: &mut impl Rng, max_inclination: f64, depth: f64) -> Plane {
    let theta = rng.random_range(0.0..=max_inclination);
    let phi = rng.random_range(0.0..TAU);
    let n = Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), -theta.cos());
    Plane::through(n, Vector3::new(0.0, 0.0, depth))
}

fn random_sphere(rng: &mut impl Rng, cfg: &SuiteConfig) -> Sphere {
    let r = cfg.sphere_radius * rng.random_range(0.75..1.25);
    let spread = 0.2 * cfg.depth;
    Sphere {
        center: Vector3::new(
            rng.random_range(-spread..spread),
            rng.random_range(-spread..spread),
            cfg.depth + r,
        ),
        radius: r,
    }
}

fn random_dihedral(rng: &mut impl Rng, cfg: &SuiteConfig, k: &CameraIntrinsics) -> Result<Dihedral> {
    let w = cfg.width as f64;
    let column = rng.random_range(0.35 * w..0.65 * w).round();
    let lean = rng.random_range(-0.5..0.5);
    let half = 0.5 * cfg.fold_deg.to_radians();
    let jitter = rng.random_range(-0.2..0.2);
    let (first, second) = if rng.random_bool(0.5) { (-half, half) } else { (half, -half) };
    Dihedral::vertical_ridge(k, column, cfg.depth, lean, first + jitter, second + jitter)
}

/// Renders the configured suite into `out_dir` (depth images, ground-truth
/// normals as 3-channel PFM, and `manifest.toml`) and returns the manifest.
pub fn generate_suite(cfg: &SuiteConfig, out_dir: &Path) -> Result<DatasetManifest> {
    if cfg.scene_count() == 0 {
        return Err(Error::InvalidInput("suite config requests zero scenes".into()));
    }
    if !(cfg.depth > 0.0 && cfg.baseline > 0.0) {
        return Err(Error::InvalidInput("depth and baseline must be positive".into()));
    }
    let k = cfg.intrinsics()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_incl = cfg.max_inclination_deg.to_radians();

    let mut scenes: Vec<(String, SceneSpec)> = Vec::with_capacity(cfg.scene_count());
    for i in 0..cfg.planes {
        scenes.push((format!("plane-{i:03}"), SceneSpec::Plane(random_plane(&mut rng, max_incl, cfg.depth))));
    }
    for i in 0..cfg.spheres {
        scenes.push((format!("sphere-{i:03}"), SceneSpec::Sphere(random_sphere(&mut rng, cfg))));
    }
    for i in 0..cfg.dihedrals {
        scenes.push((format!("dihedral-{i:03}"), SceneSpec::Dihedral(random_dihedral(&mut rng, cfg, &k)?)));
    }

    let depth_dir = out_dir.join("depth");
    let normal_dir = out_dir.join("normals");
    for d in [&depth_dir, &normal_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }

    let mut entries = Vec::with_capacity(scenes.len());
    for (index, (id, scene)) in scenes.into_iter().enumerate() {
        let mut depth = render_depth(&scene, &k)?;
        if let Some(sigma) = cfg.noise {
            let spec = NoiseSpec {
                sigma,
                seed: cfg.seed ^ index as u64,
            };
            depth = add_noise(&depth, &spec)?;
        }
        let normals = ground_truth_normals(&scene, &k)?;
        let input = match cfg.depth_format {
            DepthFormat::PfmDisparity => DepthInput::Disparity(depth.to_disparity(k.fx, cfg.baseline)),
            _ => DepthInput::Depth(depth),
        };
        let depth_rel = PathBuf::from("depth").join(format!("{id}.{}", cfg.depth_format.extension()));
        let normal_rel = PathBuf::from("normals").join(format!("{id}.pfm"));
        io::write_depth(&input, &out_dir.join(&depth_rel), cfg.depth_format)?;
        io::write_normals(&normals, &out_dir.join(&normal_rel))?;
        entries.push(ManifestEntry {
            id,
            depth_path: depth_rel,
            depth_format: cfg.depth_format,
            intrinsics: k,
            gt_normal_path: Some(normal_rel),
            gt_mask_path: None,
            ridge: scene.ridge().map(|s| RidgeBand::from_split(s, cfg.band_halfwidth)),
            scene: Some(scene),
        });
    }
    let manifest = DatasetManifest {
        root: out_dir.to_path_buf(),
        entries,
    };
    io::write_manifest(&manifest, &out_dir.join("manifest.toml"))?;
    Ok(manifest)
}
