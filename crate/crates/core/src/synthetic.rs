//! Analytic scenes rendered through the pinhole model, with exact normals.
//!
//! Rays are cast through integer pixel coordinates, so a plane renders to an
//! inverse depth that is exactly affine in `(u, v)`.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{orient_toward_camera, CameraIntrinsics, DepthImage, NormalMap};

/// Points `q` with `normal·q + offset = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Plane {
    pub fn new(normal: Vector3<f64>, offset: f64) -> Self {
        let len = normal.norm();
        Self {
            normal: normal / len,
            offset: offset / len,
        }
    }

    pub fn through(normal: Vector3<f64>, point: Vector3<f64>) -> Self {
        let n = normal.normalize();
        Self {
            normal: n,
            offset: -n.dot(&point),
        }
    }

    /// Depth where the ray `t·ray` (with `ray.z = 1`) meets the plane.
    #[inline]
    fn hit(&self, ray: &Vector3<f64>) -> Option<f64> {
        let t = -self.offset / self.normal.dot(ray);
        (t.is_finite() && t > 0.0).then_some(t)
    }

    fn validate(&self) -> Result<()> {
        let len = self.normal.norm();
        if !(len.is_finite() && (len - 1.0).abs() < 1e-9 && self.offset.is_finite()) {
            return Err(Error::Scene(format!("plane normal must be unit length, got {:?}", self.normal)));
        }
        if self.offset == 0.0 {
            return Err(Error::Scene("plane passes through the camera center".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vector3<f64>,
    pub radius: f64,
}

impl Sphere {
    fn hit(&self, ray: &Vector3<f64>) -> Option<f64> {
        // |t r - c|^2 = R^2, nearest root; the sphere lies in front of the
        // camera so both roots are positive when they exist.
        let a = ray.norm_squared();
        let b = ray.dot(&self.center);
        let c = self.center.norm_squared() - self.radius * self.radius;
        let disc = b * b - a * c;
        if disc < 0.0 {
            return None;
        }
        // c / (b + sqrt) avoids cancellation for the near root
        let t = c / (b + disc.sqrt());
        (t.is_finite() && t > 0.0).then_some(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitAxis {
    /// The ridge is the image line `u = position`.
    Column,
    /// The ridge is the image line `v = position`.
    Row,
}

/// Image-space line separating the two halves of a [`Dihedral`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub axis: SplitAxis,
    pub position: f64,
}

impl Split {
    /// `true` when pixel `(u, v)` belongs to the first half.
    #[inline]
    pub fn first_side(&self, u: usize, v: usize) -> bool {
        let c = match self.axis {
            SplitAxis::Column => u,
            SplitAxis::Row => v,
        };
        (c as f64) < self.position
    }

    /// Pixel distance from the ridge line.
    #[inline]
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        let c = match self.axis {
            SplitAxis::Column => u,
            SplitAxis::Row => v,
        };
        (c as f64 - self.position).abs()
    }
}

/// Two planes, each governing one side of an image-space split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dihedral {
    pub first: Plane,
    pub second: Plane,
    pub split: Split,
}

impl Dihedral {
    /// Two planes folded about a 3D ridge line that projects onto the image
    /// column `column`, so depth is continuous across the split.
    ///
    /// The ridge passes through the point on pixel `(column, c_y)` at depth
    /// `depth`, leaning by `lean` (z change per unit y) inside the viewing
    /// plane of that column. Each plane's normal is rotated about the ridge
    /// by `first` / `second` radians from the direction facing the camera.
    pub fn vertical_ridge(
        k: &CameraIntrinsics,
        column: f64,
        depth: f64,
        lean: f64,
        first: f64,
        second: f64,
    ) -> Result<Self> {
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(Error::Scene(format!("ridge depth must be positive, got {depth}")));
        }
        let anchor = k.ray(column, k.cy) * depth;
        let s = (column - k.cx) / k.fx;
        let dir = Vector3::new(s * lean, 1.0, lean).normalize();
        let toward = -anchor;
        let e1 = (toward - dir * dir.dot(&toward)).normalize();
        let e2 = dir.cross(&e1);
        let plane = |a: f64| Plane::through(e1 * a.cos() + e2 * a.sin(), anchor);
        Ok(Self {
            first: plane(first),
            second: plane(second),
            split: Split {
                axis: SplitAxis::Column,
                position: column,
            },
        })
    }

    #[inline]
    fn plane_at(&self, u: usize, v: usize) -> &Plane {
        if self.split.first_side(u, v) {
            &self.first
        } else {
            &self.second
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SceneSpec {
    Plane(Plane),
    Sphere(Sphere),
    Dihedral(Dihedral),
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SceneSpec::Plane(p) => p.validate(),
            SceneSpec::Sphere(s) => {
                if !(s.radius > 0.0 && s.radius.is_finite()) {
                    return Err(Error::Scene(format!("sphere radius must be positive, got {}", s.radius)));
                }
                if !(s.center.z - s.radius > 0.0) {
                    return Err(Error::Scene("sphere must lie entirely in front of the camera".into()));
                }
                Ok(())
            }
            SceneSpec::Dihedral(d) => {
                d.first.validate()?;
                d.second.validate()
            }
        }
    }

    /// Ridge split, for scenes that have one.
    pub fn ridge(&self) -> Option<Split> {
        match self {
            SceneSpec::Dihedral(d) => Some(d.split),
            _ => None,
        }
    }

    /// Depth and outward normal (not yet oriented) of the surface hit by the
    /// ray through pixel `(u, v)`.
    fn hit(&self, k: &CameraIntrinsics, u: usize, v: usize) -> Option<(f64, Vector3<f64>)> {
        let ray = k.ray(u as f64, v as f64);
        match self {
            SceneSpec::Plane(p) => p.hit(&ray).map(|z| (z, p.normal)),
            SceneSpec::Sphere(s) => s.hit(&ray).map(|z| (z, (ray * z - s.center) / s.radius)),
            SceneSpec::Dihedral(d) => {
                let p = d.plane_at(u, v);
                p.hit(&ray).map(|z| (z, p.normal))
            }
        }
    }
}

/// Depth along each pixel ray; rays that miss the scene are invalid.
pub fn render_depth(scene: &SceneSpec, k: &CameraIntrinsics) -> Result<DepthImage> {
    scene.validate()?;
    k.validate()?;
    let depth = DepthImage::from_fn(k.width, k.height, |u, v| scene.hit(k, u, v).map(|(z, _)| z));
    if depth.valid_count() == 0 {
        return Err(Error::Scene("no pixel sees the scene in front of the camera".into()));
    }
    Ok(depth)
}

/// Exact camera-facing normals with the same validity as [`render_depth`].
pub fn ground_truth_normals(scene: &SceneSpec, k: &CameraIntrinsics) -> Result<NormalMap> {
    scene.validate()?;
    k.validate()?;
    let normals = NormalMap::from_fn(k.width, k.height, |u, v| {
        let (z, n) = scene.hit(k, u, v)?;
        let q = k.back_project_unchecked(u as f64, v as f64, z);
        orient_toward_camera(&n, &q).ok()
    });
    if normals.valid_count() == 0 {
        return Err(Error::Scene("no pixel sees the scene in front of the camera".into()));
    }
    Ok(normals)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "unit", content = "value", rename_all = "kebab-case")]
pub enum NoiseSigma {
    Meters(f64),
    /// Fraction of the pixel's depth.
    Relative(f64),
}

/// Zero-mean Gaussian noise on depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: NoiseSigma,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn relative(fraction: f64, seed: u64) -> Self {
        Self {
            sigma: NoiseSigma::Relative(fraction),
            seed,
        }
    }

    pub fn meters(sigma: f64, seed: u64) -> Self {
        Self {
            sigma: NoiseSigma::Meters(sigma),
            seed,
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self.sigma, NoiseSigma::Meters(s) | NoiseSigma::Relative(s) if s == 0.0)
    }
}

/// Adds seeded Gaussian noise to every valid pixel. One normal sample is
/// drawn per pixel slot in row-major order, valid or not, so a pixel's noise
/// depends only on the seed and its index. Pixels pushed to `z <= 0` become
/// invalid.
pub fn add_noise(depth: &DepthImage, spec: &NoiseSpec) -> Result<DepthImage> {
    let sigma_ok = match spec.sigma {
        NoiseSigma::Meters(s) | NoiseSigma::Relative(s) => s >= 0.0 && s.is_finite(),
    };
    if !sigma_ok {
        return Err(Error::InvalidInput(format!("noise sigma must be >= 0, got {:?}", spec.sigma)));
    }
    if spec.is_zero() {
        return Ok(depth.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = Vec::with_capacity(depth.values().len());
    for (&z, &ok) in depth.values().iter().zip(depth.mask()) {
        let e: f64 = StandardNormal.sample(&mut rng);
        let sigma = match spec.sigma {
            NoiseSigma::Meters(s) => s,
            NoiseSigma::Relative(f) => f * z,
        };
        values.push(if ok { z + sigma * e } else { 0.0 });
    }
    DepthImage::new(depth.width(), depth.height(), values, depth.mask().to_vec())
}
