//! Per-pixel azimuth and axial surface-normal candidates.
//!
//! At pixel `q` the inverse-depth gradient fixes the direction of the
//! normal's projection on the image plane (the azimuth `φ`). Every valid
//! neighbour `p_i` then contributes one candidate that differs only in its
//! z component. Candidates are built in homogeneous form, scaled by `Δz_i`:
//!
//! ```text
//! v_i = (f_x g_u Δz_i,  f_y g_v Δz_i,  -(f_x g_u Δx_i + f_y g_v Δy_i))
//! ```
//!
//! which is defined for `Δz_i = 0` and differs from the divided form only by
//! the sign and scale of `Δz_i`. Each `v_i` is reduced to the pair
//! `(A_i, n_z_i)` of its unit vector: the component along the azimuth and the
//! z component.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, PointCloud};
use crate::gradient::GradientField;

/// Numerical cut-offs below which a pixel or candidate is degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Gradient magnitude (1/m/px) under which a pixel is frontoparallel.
    pub gradient: f64,
    /// Norm under which a homogeneous candidate is dropped.
    pub candidate: f64,
    /// Minimum `|Δz|` (m) for the divided candidate form used by the
    /// sign-sensitive baselines.
    pub depth_step: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            gradient: 1e-12,
            candidate: 1e-12,
            depth_step: 1e-9,
        }
    }
}

/// Pixel offsets of the neighbours `P` around the observed pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhood {
    offsets: Vec<(isize, isize)>,
    radius: usize,
}

fn chebyshev_radius(offsets: &[(isize, isize)]) -> usize {
    offsets
        .iter()
        .map(|&(du, dv)| du.unsigned_abs().max(dv.unsigned_abs()))
        .max()
        .unwrap_or(0)
}

impl Neighborhood {
    /// Square ring at Chebyshev distance exactly `radius`; `radius = 1` is
    /// the 8-connected neighbourhood.
    pub fn ring(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidInput("neighborhood radius must be >= 1".into()));
        }
        let r = radius as isize;
        let offsets = (-r..=r)
            .flat_map(|dv| (-r..=r).map(move |du| (du, dv)))
            .filter(|&(du, dv)| du.abs().max(dv.abs()) == r)
            .collect();
        Ok(Self { offsets, radius })
    }

    pub fn from_offsets(offsets: Vec<(isize, isize)>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidInput("neighborhood must not be empty".into()));
        }
        if offsets.contains(&(0, 0)) {
            return Err(Error::InvalidInput("neighborhood must not contain (0, 0)".into()));
        }
        let radius = chebyshev_radius(&offsets);
        Ok(Self { offsets, radius })
    }

    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    /// Largest Chebyshev distance of any offset.
    pub fn radius(&self) -> usize {
        self.radius
    }
}

impl Default for Neighborhood {
    fn default() -> Self {
        Self::ring(1).expect("radius 1 is valid")
    }
}

/// Unit axial candidate reduced to the half-plane spanned by the azimuth
/// direction and the z axis: `along² + nz² = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxialCandidate {
    /// Signed component along `(cos φ, sin φ, 0)`.
    pub along: f64,
    pub nz: f64,
}

impl AxialCandidate {
    pub fn from_inclination(theta: f64) -> Self {
        Self {
            along: theta.sin(),
            nz: theta.cos(),
        }
    }

    pub fn negated(self) -> Self {
        Self {
            along: -self.along,
            nz: -self.nz,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Azimuth {
    /// Radians in `[0, 2π)`.
    pub phi: f64,
    pub frontoparallel: bool,
}

/// Azimuth of the normal's image-plane projection, `atan2(f_y g_v, f_x g_u)`.
pub fn azimuth(gu: f64, gv: f64, k: &CameraIntrinsics, eps_g: f64) -> Azimuth {
    if gu.hypot(gv) < eps_g {
        return Azimuth {
            phi: 0.0,
            frontoparallel: true,
        };
    }
    Azimuth {
        phi: wrap_tau((k.fy * gv).atan2(k.fx * gu)),
        frontoparallel: false,
    }
}

#[inline]
fn wrap_tau(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PixelCandidates {
    pub azimuth: f64,
    /// Gradient below threshold; `candidates` is empty and the caller should
    /// report the frontoparallel normal.
    pub frontoparallel: bool,
    pub candidates: Vec<AxialCandidate>,
}

/// Everything needed to generate candidates at any pixel of one image.
#[derive(Clone, Copy)]
pub struct CandidateContext<'a> {
    pub points: &'a PointCloud,
    pub grads: &'a GradientField,
    pub intrinsics: &'a CameraIntrinsics,
    pub neighborhood: &'a Neighborhood,
    pub thresholds: Thresholds,
}

/// Outcome of candidate generation at one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum PixelStatus {
    Invalid,
    Frontoparallel,
    /// Scaled gradient `(f_x g_u, f_y g_v)` and the number of valid neighbours.
    Ready { a: f64, b: f64, neighbors: usize },
}

impl<'a> CandidateContext<'a> {
    /// Calls `f` with `p - q` for every valid neighbour `p` of `q = (u, v)`
    /// and returns how many there were.
    #[inline]
    fn for_each_offset(&self, u: usize, v: usize, mut f: impl FnMut(nalgebra::Vector3<f64>)) -> usize {
        let (w, h) = self.points.dims();
        let (values, valid) = (self.points.values(), self.points.mask());
        let i = v * w + u;
        let q = values[i];
        let r = self.neighborhood.radius();
        let mut count = 0;
        if u >= r && v >= r && u + r < w && v + r < h {
            // interior: every offset lands inside the image
            for &(du, dv) in self.neighborhood.offsets() {
                let j = i.wrapping_add_signed(dv * w as isize + du);
                if valid[j] {
                    count += 1;
                    f(values[j] - q);
                }
            }
        } else {
            for &(du, dv) in self.neighborhood.offsets() {
                let (Some(nu), Some(nv)) = (u.checked_add_signed(du), v.checked_add_signed(dv)) else {
                    continue;
                };
                if nu < w && nv < h && valid[nv * w + nu] {
                    count += 1;
                    f(values[nv * w + nu] - q);
                }
            }
        }
        count
    }

    #[inline]
    fn status(&self, u: usize, v: usize) -> PixelStatus {
        if !self.points.is_valid(u, v) {
            return PixelStatus::Invalid;
        }
        let Some([gu, gv]) = self.grads.get(u, v) else {
            return PixelStatus::Invalid;
        };
        if (gu * gu + gv * gv).sqrt() < self.thresholds.gradient {
            return PixelStatus::Frontoparallel;
        }
        PixelStatus::Ready {
            a: self.intrinsics.fx * gu,
            b: self.intrinsics.fy * gv,
            neighbors: 0,
        }
    }

    /// Visits the axial candidates at `(u, v)` unnormalized, as
    /// `(along, nz, squared norm)`. In the gradient frame the homogeneous
    /// candidate is `(m Δz, -(f_x g_u Δx + f_y g_v Δy))` with `m = |(f_x g_u, f_y g_v)|`.
    #[inline]
    fn visit_axial(&self, u: usize, v: usize, mut f: impl FnMut(f64, f64, f64)) -> PixelStatus {
        let (a, b) = match self.status(u, v) {
            PixelStatus::Ready { a, b, .. } => (a, b),
            other => return other,
        };
        let m = (a * a + b * b).sqrt();
        let eps2 = self.thresholds.candidate * self.thresholds.candidate;
        let neighbors = self.for_each_offset(u, v, |r| {
            let along = m * r.z;
            let nz = -(a * r.x + b * r.y);
            let n2 = along * along + nz * nz;
            if n2 >= eps2 {
                f(along, nz, n2);
            }
        });
        if neighbors == 0 {
            return PixelStatus::Invalid;
        }
        PixelStatus::Ready { a, b, neighbors }
    }

    /// Fills `out` with the axial candidates at `(u, v)`.
    pub(crate) fn axial_into(&self, u: usize, v: usize, out: &mut Vec<AxialCandidate>) -> PixelStatus {
        out.clear();
        self.visit_axial(u, v, |along, nz, n2| {
            let inv = 1.0 / n2.sqrt();
            out.push(AxialCandidate {
                along: along * inv,
                nz: nz * inv,
            });
        })
    }

    /// Doubled-angle moment sums `(Σ A n, Σ (n² - A²))` of the unit axial
    /// candidates at `(u, v)` and how many candidates contributed.
    #[inline]
    pub(crate) fn axial_moments(&self, u: usize, v: usize) -> (PixelStatus, f64, f64, usize) {
        let (mut s_an, mut s_d, mut count) = (0.0, 0.0, 0);
        let status = self.visit_axial(u, v, |along, nz, n2| {
            s_an += along * nz / n2;
            s_d += (nz * nz - along * along) / n2;
            count += 1;
        });
        (status, s_an, s_d, count)
    }

    /// Fills `out` with the divided-form z components
    /// `n_z_i = -(f_x g_u Δx_i + f_y g_v Δy_i) / Δz_i`, each paired with the
    /// shared `(f_x g_u, f_y g_v)`. Neighbours with `|Δz_i|` below the
    /// threshold are skipped.
    pub(crate) fn divided_into(&self, u: usize, v: usize, out: &mut Vec<f64>) -> PixelStatus {
        out.clear();
        let (a, b) = match self.status(u, v) {
            PixelStatus::Ready { a, b, .. } => (a, b),
            other => return other,
        };
        let eps = self.thresholds.depth_step;
        let neighbors = self.for_each_offset(u, v, |r| {
            if r.z.abs() >= eps {
                out.push(-(a * r.x + b * r.y) / r.z);
            }
        });
        if neighbors == 0 {
            return PixelStatus::Invalid;
        }
        PixelStatus::Ready { a, b, neighbors }
    }
}

/// Candidates at pixel `(u, v)`; `None` when the pixel, its gradient or all
/// of its neighbours are invalid.
pub fn candidates_at(u: usize, v: usize, ctx: &CandidateContext<'_>) -> Option<PixelCandidates> {
    let mut out = Vec::with_capacity(ctx.neighborhood.len());
    match ctx.axial_into(u, v, &mut out) {
        PixelStatus::Invalid => None,
        PixelStatus::Frontoparallel => Some(PixelCandidates {
            azimuth: 0.0,
            frontoparallel: true,
            candidates: Vec::new(),
        }),
        PixelStatus::Ready { a, b, .. } => Some(PixelCandidates {
            azimuth: wrap_tau(b.atan2(a)),
            frontoparallel: false,
            candidates: out,
        }),
    }
}
