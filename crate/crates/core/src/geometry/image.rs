use std::ops::Deref;

use nalgebra::Vector3;

use super::camera::CameraIntrinsics;
use crate::error::{Error, Result};

/// Row-major image with a per-pixel validity mask.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedImage<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
    valid: Vec<bool>,
}

impl<T: Copy> MaskedImage<T> {
    pub fn new(width: usize, height: usize, values: Vec<T>, valid: Vec<bool>) -> Result<Self> {
        let n = width * height;
        if values.len() != n || valid.len() != n {
            return Err(Error::InvalidInput(format!(
                "{width}x{height} image needs {n} samples, got {} values and {} mask entries",
                values.len(),
                valid.len()
            )));
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn filled(width: usize, height: usize, value: T, valid: bool) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
            valid: vec![valid; width * height],
        }
    }

    /// Builds an image by evaluating `f(u, v)` at every pixel; `None` is invalid.
    pub fn from_fn(width: usize, height: usize, fill: T, mut f: impl FnMut(usize, usize) -> Option<T>) -> Self {
        let mut values = Vec::with_capacity(width * height);
        let mut valid = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                match f(u, v) {
                    Some(x) => {
                        values.push(x);
                        valid.push(true);
                    }
                    None => {
                        values.push(fill);
                        valid.push(false);
                    }
                }
            }
        }
        Self {
            width,
            height,
            values,
            valid,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    /// Value at `(u, v)` if the pixel is valid.
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<T> {
        let i = self.index(u, v);
        self.valid[i].then(|| self.values[i])
    }

    /// Raw slot value, ignoring validity.
    #[inline]
    pub fn raw(&self, u: usize, v: usize) -> T {
        self.values[self.index(u, v)]
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.valid[self.index(u, v)]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&b| b).count()
    }

    /// Applies `f` to every valid pixel; `None` invalidates it.
    pub fn map_valid<U: Copy>(&self, fill: U, mut f: impl FnMut(T) -> Option<U>) -> MaskedImage<U> {
        let mut values = Vec::with_capacity(self.values.len());
        let mut valid = Vec::with_capacity(self.values.len());
        for (&x, &ok) in self.values.iter().zip(&self.valid) {
            match ok.then(|| f(x)).flatten() {
                Some(y) => {
                    values.push(y);
                    valid.push(true);
                }
                None => {
                    values.push(fill);
                    valid.push(false);
                }
            }
        }
        MaskedImage {
            width: self.width,
            height: self.height,
            values,
            valid,
        }
    }
}

#[inline]
fn positive_finite(x: f64) -> Option<f64> {
    (x.is_finite() && x > 0.0).then_some(x)
}

macro_rules! scalar_image {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        ///
        /// Valid pixels are always finite and strictly positive; anything else
        /// is demoted to invalid on construction.
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name(MaskedImage<f64>);

        impl $name {
            pub fn new(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
                let img = MaskedImage::new(width, height, values, valid)?;
                Ok(Self(img.map_valid(0.0, positive_finite)))
            }

            /// Every finite positive sample is valid.
            pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
                let valid = vec![true; values.len()];
                Self::new(width, height, values, valid)
            }

            pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<f64>) -> Self {
                Self(MaskedImage::from_fn(width, height, 0.0, |u, v| f(u, v).and_then(positive_finite)))
            }

            pub fn as_masked(&self) -> &MaskedImage<f64> {
                &self.0
            }

            pub fn into_masked(self) -> MaskedImage<f64> {
                self.0
            }

            /// Multiplies every valid sample by `s > 0`.
            pub fn scaled(&self, s: f64) -> Self {
                Self(self.0.map_valid(0.0, |x| positive_finite(x * s)))
            }
        }

        impl Deref for $name {
            type Target = MaskedImage<f64>;

            fn deref(&self) -> &MaskedImage<f64> {
                &self.0
            }
        }
    };
}

scalar_image!(
    /// Per-pixel depth `z` in meters.
    DepthImage
);
scalar_image!(
    /// Per-pixel inverse depth `1/z` in 1/meters, or any positive multiple of it.
    InverseDepthImage
);
scalar_image!(
    /// Per-pixel stereo disparity in pixels, proportional to inverse depth.
    DisparityImage
);

pub fn to_inverse_depth(depth: &DepthImage) -> InverseDepthImage {
    InverseDepthImage(depth.0.map_valid(0.0, |z| positive_finite(1.0 / z)))
}

pub fn to_depth(inv: &InverseDepthImage) -> DepthImage {
    DepthImage(inv.0.map_valid(0.0, |w| positive_finite(1.0 / w)))
}

/// Disparity is inverse depth up to the positive factor `f_x * baseline`,
/// which cancels in every estimator, so values are copied unchanged.
pub fn disparity_as_inverse_depth(disparity: &DisparityImage) -> InverseDepthImage {
    InverseDepthImage(disparity.0.clone())
}

impl DepthImage {
    pub fn to_inverse_depth(&self) -> InverseDepthImage {
        to_inverse_depth(self)
    }

    /// Disparity a rectified stereo pair with this focal length and baseline
    /// would observe: `f_x * b / z`.
    pub fn to_disparity(&self, fx: f64, baseline: f64) -> DisparityImage {
        DisparityImage(self.0.map_valid(0.0, |z| positive_finite(fx * baseline / z)))
    }
}

impl InverseDepthImage {
    pub fn to_depth(&self) -> DepthImage {
        to_depth(self)
    }
}

impl DisparityImage {
    pub fn as_inverse_depth(&self) -> InverseDepthImage {
        disparity_as_inverse_depth(self)
    }
}

/// Unit surface normals with a validity mask.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMap(MaskedImage<Vector3<f64>>);

impl NormalMap {
    /// Valid pixels are renormalized; zero or non-finite vectors become invalid.
    pub fn new(width: usize, height: usize, normals: Vec<Vector3<f64>>, valid: Vec<bool>) -> Result<Self> {
        Ok(Self::from_masked(MaskedImage::new(width, height, normals, valid)?))
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Option<Vector3<f64>>) -> Self {
        Self(MaskedImage::from_fn(width, height, Vector3::zeros(), |u, v| {
            f(u, v).and_then(unit)
        }))
    }

    pub fn from_masked(img: MaskedImage<Vector3<f64>>) -> Self {
        Self(img.map_valid(Vector3::zeros(), unit))
    }

    /// Wraps vectors the caller has already made unit length.
    pub(crate) fn from_unit(img: MaskedImage<Vector3<f64>>) -> Self {
        debug_assert!(img
            .values()
            .iter()
            .zip(img.mask())
            .all(|(n, &ok)| !ok || (n.norm() - 1.0).abs() < 1e-12));
        Self(img)
    }

    pub fn as_masked(&self) -> &MaskedImage<Vector3<f64>> {
        &self.0
    }
}

#[inline]
fn unit(n: Vector3<f64>) -> Option<Vector3<f64>> {
    let norm = n.norm();
    (norm.is_finite() && norm > 0.0).then(|| n / norm)
}

impl Deref for NormalMap {
    type Target = MaskedImage<Vector3<f64>>;

    fn deref(&self) -> &MaskedImage<Vector3<f64>> {
        &self.0
    }
}

/// Back-projected camera-frame point per pixel.
#[derive(Clone, Debug)]
pub struct PointCloud(MaskedImage<Vector3<f64>>);

impl PointCloud {
    pub fn from_depth(depth: &DepthImage, k: &CameraIntrinsics) -> Result<Self> {
        check_dims(k, depth.dims())?;
        let mut out = MaskedImage::filled(depth.width(), depth.height(), Vector3::zeros(), false);
        for v in 0..depth.height() {
            for u in 0..depth.width() {
                if let Some(z) = depth.get(u, v) {
                    let i = out.index(u, v);
                    out.values[i] = k.back_project_unchecked(u as f64, v as f64, z);
                    out.valid[i] = true;
                }
            }
        }
        Ok(Self(out))
    }

    /// Points from (possibly scaled) inverse depth. A scale factor on the input
    /// scales the whole cloud uniformly.
    pub fn from_inverse_depth(inv: &InverseDepthImage, k: &CameraIntrinsics) -> Result<Self> {
        Self::from_depth(&to_depth(inv), k)
    }
}

impl Deref for PointCloud {
    type Target = MaskedImage<Vector3<f64>>;

    fn deref(&self) -> &MaskedImage<Vector3<f64>> {
        &self.0
    }
}

pub(crate) fn check_dims(k: &CameraIntrinsics, actual: (usize, usize)) -> Result<()> {
    if k.dims() != actual {
        return Err(Error::DimensionMismatch {
            expected: k.dims(),
            actual,
        });
    }
    Ok(())
}
