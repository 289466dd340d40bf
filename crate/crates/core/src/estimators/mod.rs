//! Per-pixel normal estimators.
//!
//! All gradient-based estimators share the azimuth from the inverse-depth
//! gradient and differ in how they pick the z component from the
//! neighbour candidates:
//!
//! - [`Estimator::SnePlus`]: closed-form axial inclination over unit
//!   candidates; sign-blind.
//! - [`Estimator::Sne`]: aligns every candidate with the first one before
//!   averaging, i.e. assumes any two candidates are less than π/2 apart.
//! - [`Estimator::ThreeF2NMean`] / [`Estimator::ThreeF2NMedian`]: mean or
//!   median of the divided z components.
//! - [`Estimator::PlanePca`]: plane fit over a square window of 3D points.
//!
//! Frontoparallel pixels (zero gradient) report `(0, 0, -1)`.

mod inclination;
mod pca;

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidates::{CandidateContext, Neighborhood, PixelStatus, Thresholds};
use crate::error::{Error, Result};
use crate::geometry::{
    camera::faces_away, check_dims, to_inverse_depth, CameraIntrinsics, DepthImage,
    InverseDepthImage, MaskedImage, NormalMap, PointCloud,
};
use crate::gradient::{compute_gradients, GradientKernel};

pub use inclination::{
    axial_distance, axial_inclination_by_branches, axial_optimal_inclination,
    grid_search_inclination, inclination_objective, InclinationSolution,
};
pub use pca::plane_pca_normal;

const FRONTOPARALLEL: Vector3<f64> = Vector3::new(0.0, 0.0, -1.0);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Estimator {
    #[default]
    #[serde(rename = "sne-plus")]
    SnePlus,
    #[serde(rename = "sne")]
    Sne,
    #[serde(rename = "3f2n-mean")]
    ThreeF2NMean,
    #[serde(rename = "3f2n-median")]
    ThreeF2NMedian,
    #[serde(rename = "plane-pca")]
    PlanePca,
}

impl Estimator {
    pub const ALL: [Estimator; 5] = [
        Self::SnePlus,
        Self::Sne,
        Self::ThreeF2NMean,
        Self::ThreeF2NMedian,
        Self::PlanePca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SnePlus => "sne-plus",
            Self::Sne => "sne",
            Self::ThreeF2NMean => "3f2n-mean",
            Self::ThreeF2NMedian => "3f2n-median",
            Self::PlanePca => "plane-pca",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown estimator '{s}' (expected one of: {})",
                    Self::ALL.map(|e| e.name()).join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    pub estimator: Estimator,
    pub kernel: GradientKernel,
    pub neighborhood: Neighborhood,
    /// Odd side length of the PlanePCA window.
    pub pca_window: usize,
    pub thresholds: Thresholds,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            estimator: Estimator::SnePlus,
            kernel: GradientKernel::Central,
            neighborhood: Neighborhood::default(),
            pca_window: 5,
            thresholds: Thresholds::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn new(estimator: Estimator) -> Self {
        Self {
            estimator,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pca_window < 3 || self.pca_window % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "pca window must be odd and >= 3, got {}",
                self.pca_window
            )));
        }
        if self.neighborhood.is_empty() {
            return Err(Error::InvalidInput("neighborhood must not be empty".into()));
        }
        Ok(())
    }
}

/// Normal map from metric depth.
pub fn estimate_normals(depth: &DepthImage, k: &CameraIntrinsics, cfg: &EstimatorConfig) -> Result<NormalMap> {
    k.validate()?;
    check_dims(k, depth.dims())?;
    estimate_with_points(&to_inverse_depth(depth), &PointCloud::from_depth(depth, k)?, k, cfg)
}

/// Normal map from inverse depth or anything proportional to it (disparity).
/// The proportionality factor cancels, so the output does not depend on it.
pub fn estimate_normals_from_inverse_depth(
    inv: &InverseDepthImage,
    k: &CameraIntrinsics,
    cfg: &EstimatorConfig,
) -> Result<NormalMap> {
    k.validate()?;
    check_dims(k, inv.dims())?;
    estimate_with_points(inv, &PointCloud::from_inverse_depth(inv, k)?, k, cfg)
}

fn estimate_with_points(
    inv: &InverseDepthImage,
    points: &PointCloud,
    k: &CameraIntrinsics,
    cfg: &EstimatorConfig,
) -> Result<NormalMap> {
    cfg.validate()?;
    let (w, h) = inv.dims();

    let mut normals = vec![Vector3::zeros(); w * h];
    let mut valid = vec![false; w * h];

    if cfg.estimator == Estimator::PlanePca {
        let r = cfg.pca_window / 2;
        fill_rows(&mut normals, &mut valid, w, |v, row, row_valid| {
            let mut window = Vec::with_capacity(cfg.pca_window * cfg.pca_window);
            for u in 0..w {
                if let Some(n) = pca_pixel(points, u, v, r, &mut window) {
                    row[u] = n;
                    row_valid[u] = true;
                }
            }
        });
        return Ok(NormalMap::from_unit(MaskedImage::new(w, h, normals, valid)?));
    }

    let grads = compute_gradients(inv, cfg.kernel)?;
    let ctx = CandidateContext {
        points,
        grads: &grads,
        intrinsics: k,
        neighborhood: &cfg.neighborhood,
        thresholds: cfg.thresholds,
    };
    fill_rows(&mut normals, &mut valid, w, |v, row, row_valid| {
        let mut divided = Vec::with_capacity(cfg.neighborhood.len());
        for u in 0..w {
            let n = match cfg.estimator {
                Estimator::SnePlus => sne_plus_pixel(&ctx, u, v),
                Estimator::Sne => sne_pixel(&ctx, u, v, &mut divided),
                Estimator::ThreeF2NMean => three_f2n_pixel(&ctx, u, v, &mut divided, mean),
                Estimator::ThreeF2NMedian => three_f2n_pixel(&ctx, u, v, &mut divided, median),
                Estimator::PlanePca => unreachable!("handled above"),
            };
            if let Some(n) = n {
                row[u] = n;
                row_valid[u] = true;
            }
        }
    });
    Ok(NormalMap::from_unit(MaskedImage::new(w, h, normals, valid)?))
}

fn fill_rows<F>(normals: &mut [Vector3<f64>], valid: &mut [bool], w: usize, f: F)
where
    F: Fn(usize, &mut [Vector3<f64>], &mut [bool]) + Sync,
{
    normals
        .par_chunks_mut(w)
        .zip(valid.par_chunks_mut(w))
        .enumerate()
        .for_each(|(v, (row, row_valid))| f(v, row, row_valid));
}

/// Unit, camera-facing version of `n` as seen from pixel point `q`.
#[inline]
fn facing(n: Vector3<f64>, q: &Vector3<f64>) -> Option<Vector3<f64>> {
    let norm = n.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return None;
    }
    let n = n / norm;
    Some(if faces_away(&n, q) { -n } else { n })
}

#[inline]
fn sne_plus_pixel(ctx: &CandidateContext<'_>, u: usize, v: usize) -> Option<Vector3<f64>> {
    match ctx.axial_moments(u, v) {
        (PixelStatus::Frontoparallel, ..) => Some(FRONTOPARALLEL),
        (PixelStatus::Invalid, ..) | (_, _, _, 0) => None,
        (PixelStatus::Ready { a, b, .. }, s_an, s_d, _) => {
            let (cos_t, sin_t) = inclination::closed_form_axis(s_an, s_d);
            let m = (a * a + b * b).sqrt();
            let n = Vector3::new(sin_t * a / m, sin_t * b / m, cos_t);
            facing(n, &ctx.points.raw(u, v))
        }
    }
}

#[inline]
fn sne_pixel(ctx: &CandidateContext<'_>, u: usize, v: usize, buf: &mut Vec<f64>) -> Option<Vector3<f64>> {
    match ctx.divided_into(u, v, buf) {
        PixelStatus::Invalid => None,
        PixelStatus::Frontoparallel => Some(FRONTOPARALLEL),
        PixelStatus::Ready { a, b, .. } => {
            let mut iter = buf.iter().map(|&nz| Vector3::new(a, b, nz).normalize());
            let first = iter.next()?;
            let sum = iter.fold(first, |acc, n| if n.dot(&first) < 0.0 { acc - n } else { acc + n });
            facing(sum, &ctx.points.raw(u, v))
        }
    }
}

#[inline]
fn three_f2n_pixel(
    ctx: &CandidateContext<'_>,
    u: usize,
    v: usize,
    buf: &mut Vec<f64>,
    reduce: fn(&mut [f64]) -> f64,
) -> Option<Vector3<f64>> {
    match ctx.divided_into(u, v, buf) {
        PixelStatus::Invalid => None,
        PixelStatus::Frontoparallel => Some(FRONTOPARALLEL),
        PixelStatus::Ready { a, b, .. } => {
            if buf.is_empty() {
                return None;
            }
            let nz = reduce(buf);
            facing(Vector3::new(a, b, nz), &ctx.points.raw(u, v))
        }
    }
}

fn pca_pixel(points: &PointCloud, u: usize, v: usize, r: usize, window: &mut Vec<Vector3<f64>>) -> Option<Vector3<f64>> {
    let q = points.get(u, v)?;
    window.clear();
    for wv in v.saturating_sub(r)..=(v + r).min(points.height() - 1) {
        for wu in u.saturating_sub(r)..=(u + r).min(points.width() - 1) {
            if let Some(p) = points.get(wu, wv) {
                window.push(p);
            }
        }
    }
    let (_, n) = pca::pca_axis(window).ok()?;
    facing(n, &q)
}

fn mean(xs: &mut [f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median; the mean of the two middle values for even counts.
pub(crate) fn median(xs: &mut [f64]) -> f64 {
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}
