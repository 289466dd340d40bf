use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole intrinsics plus the image size they apply to.
///
/// `cx`/`cy` are the principal point column and row in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    /// Intrinsics with the principal point at the image center.
    pub fn centered(f: f64, width: usize, height: usize) -> Result<Self> {
        Self::new(f, f, width as f64 / 2.0, height as f64 / 2.0, width, height)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0 && self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::InvalidInput(format!(
                "focal lengths must be positive and finite (fx={}, fy={})",
                self.fx, self.fy
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidInput("image size must be non-zero".into()));
        }
        let inside = |c: f64, n: usize| c.is_finite() && c >= 0.0 && c < n as f64;
        if !inside(self.cx, self.width) || !inside(self.cy, self.height) {
            return Err(Error::InvalidInput(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Viewing ray through pixel `(u, v)`, scaled so its z component is 1.
    #[inline]
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Projects a camera-frame point to pixel coordinates, `m = K q / z`.
    #[inline]
    pub fn project(&self, q: &Vector3<f64>) -> (f64, f64) {
        (
            self.fx * q.x / q.z + self.cx,
            self.fy * q.y / q.z + self.cy,
        )
    }

    /// Same as [`back_project`] without the depth check, for hot loops that
    /// already filtered on validity.
    #[inline]
    pub(crate) fn back_project_unchecked(&self, u: f64, v: f64, z: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z)
    }
}

/// Lifts pixel `(u, v)` at depth `z` to the camera-frame point `(x, y, z)`.
pub fn back_project(u: f64, v: f64, z: f64, k: &CameraIntrinsics) -> Result<Vector3<f64>> {
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::InvalidInput(format!(
            "depth must be positive and finite, got {z}"
        )));
    }
    Ok(k.back_project_unchecked(u, v, z))
}

/// Flips `n` so that it faces the camera as seen from surface point `q`, and
/// renormalizes it.
///
/// The result satisfies `n·q < 0`. When `n` is perpendicular to the viewing
/// ray the sign is chosen so that `n_z <= 0`, then `n_y <= 0`, then `n_x >= 0`.
pub fn orient_toward_camera(n: &Vector3<f64>, q: &Vector3<f64>) -> Result<Vector3<f64>> {
    let norm = n.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::InvalidInput(format!(
            "cannot orient a zero or non-finite normal {n:?}"
        )));
    }
    let unit = n / norm;
    Ok(if faces_away(&unit, q) { -unit } else { unit })
}

#[inline]
pub(crate) fn faces_away(n: &Vector3<f64>, q: &Vector3<f64>) -> bool {
    let d = n.dot(q);
    if d != 0.0 {
        return d > 0.0;
    }
    if n.z != 0.0 {
        return n.z > 0.0;
    }
    if n.y != 0.0 {
        return n.y > 0.0;
    }
    n.x < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn kitti_like() -> CameraIntrinsics {
        CameraIntrinsics::new(400.0, 410.0, 320.0, 240.0, 640, 480).unwrap()
    }

    #[test]
    fn principal_ray_back_projects_onto_axis() {
        let k = kitti_like();
        let q = back_project(k.cx, k.cy, 5.0, &k).unwrap();
        assert_eq!(q, Vector3::new(0.0, 0.0, 5.0));
    }

    #[test]
    fn one_focal_length_off_axis_is_unit_tangent() {
        let k = kitti_like();
        let q = back_project(k.cx + k.fx, k.cy, 2.0, &k).unwrap();
        assert_relative_eq!(q, Vector3::new(2.0, 0.0, 2.0), epsilon = 1e-15);
    }

    #[test]
    fn back_projection_matches_matrix_inverse() {
        let k = kitti_like();
        let q = back_project(100.0, 80.0, 3.7, &k).unwrap();
        // m = K q / z  =>  q = z K^-1 m
        let m = Vector3::new(100.0, 80.0, 1.0);
        let oracle = 3.7 * k.matrix().try_inverse().unwrap() * m;
        assert_relative_eq!(q, oracle, max_relative = 1e-12);
        assert_eq!(q.z, 3.7);
    }

    #[test]
    fn rejects_bad_depth() {
        let k = kitti_like();
        assert!(back_project(1.0, 1.0, 0.0, &k).is_err());
        assert!(back_project(1.0, 1.0, -1.0, &k).is_err());
        assert!(back_project(1.0, 1.0, f64::NAN, &k).is_err());
        assert!(back_project(1.0, 1.0, f64::INFINITY, &k).is_err());
    }

    #[test]
    fn rejects_bad_intrinsics() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, -1.0, 1.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 4.0, 1.0, 4, 4).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 1.0, -0.5, 4, 4).is_err());
    }

    #[test]
    fn orient_flips_away_facing_normal() {
        let q = Vector3::new(0.0, 0.0, 5.0);
        let n = orient_toward_camera(&Vector3::new(0.0, 0.0, 1.0), &q).unwrap();
        assert_eq!(n, Vector3::new(0.0, 0.0, -1.0));
        let n = orient_toward_camera(&Vector3::new(0.0, 0.0, -1.0), &q).unwrap();
        assert_eq!(n, Vector3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn orient_renormalizes() {
        let q = Vector3::new(1.0, 2.0, 5.0);
        let n = orient_toward_camera(&Vector3::new(3.0, 0.0, -4.0), &q).unwrap();
        assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn orient_rejects_zero() {
        let q = Vector3::new(0.0, 0.0, 5.0);
        assert!(orient_toward_camera(&Vector3::zeros(), &q).is_err());
    }

    #[test]
    fn orient_tie_breaks_to_nonpositive_z() {
        // Enumerate perpendicular pairs and both signs; the convention must pick
        // the same representative regardless of the input sign.
        let q = Vector3::new(0.3, -0.2, 4.0);
        let a = q.cross(&Vector3::new(1.0, 0.0, 0.0));
        let b = q.cross(&a);
        for t in 0..64 {
            let ang = t as f64 * std::f64::consts::TAU / 64.0;
            let n = a.normalize() * ang.cos() + b.normalize() * ang.sin();
            if n.dot(&q) != 0.0 {
                continue;
            }
            assert_ne!(faces_away(&n, &q), faces_away(&-n, &q));
            let kept = if faces_away(&n, &q) { -n } else { n };
            assert!(kept.z <= 0.0);
        }
        // exact ties constructed on axes
        let q = Vector3::new(0.0, 0.0, 5.0);
        let n = orient_toward_camera(&Vector3::new(0.0, 1.0, 0.0), &q).unwrap();
        assert_eq!(n, Vector3::new(0.0, -1.0, 0.0));
        let n = orient_toward_camera(&Vector3::new(-1.0, 0.0, 0.0), &q).unwrap();
        assert_eq!(n, Vector3::new(1.0, 0.0, 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn vec3(r: f64) -> impl Strategy<Value = Vector3<f64>> {
            (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vector3::new(x, y, z))
        }

        proptest! {
            #[test]
            fn project_inverts_back_project(u in 0.0..640.0f64, v in 0.0..480.0f64, z in 0.5..80.0f64) {
                let k = kitti_like();
                let q = back_project(u, v, z, &k).unwrap();
                let (pu, pv) = k.project(&q);
                let q2 = back_project(pu, pv, z, &k).unwrap();
                prop_assert!((q2 - q).norm() <= 1e-9 * q.norm());
            }

            #[test]
            fn depth_scaling_scales_points(u in 0.0..640.0f64, v in 0.0..480.0f64, z in 0.5..80.0f64, s in 0.01..100.0f64) {
                let k = kitti_like();
                let q = back_project(u, v, z, &k).unwrap();
                let qs = back_project(u, v, s * z, &k).unwrap();
                prop_assert!((qs - q * s).norm() <= 1e-12 * qs.norm());
            }

            #[test]
            fn orient_is_idempotent_and_sign_invariant(n in vec3(1.0), q in vec3(10.0)) {
                prop_assume!(n.norm() > 1e-6);
                let a = orient_toward_camera(&n, &q).unwrap();
                let b = orient_toward_camera(&-n, &q).unwrap();
                let c = orient_toward_camera(&a, &q).unwrap();
                prop_assert!((a - b).norm() < 1e-15);
                prop_assert!((a - c).norm() < 1e-15);
                prop_assert!(a.dot(&q) <= 0.0);
            }
        }
    }
}
