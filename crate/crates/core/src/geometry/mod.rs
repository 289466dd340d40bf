//! Pinhole camera model, masked image containers and the conventions shared by
//! every other module.
//!
//! Storage is row-major with `u` the column and `v` the row. Depth is in meters.
//! Any operation consuming an invalid pixel produces an invalid pixel; no
//! sentinel values are ever written into valid slots.

pub(crate) mod camera;
mod image;

pub use camera::{back_project, orient_toward_camera, CameraIntrinsics};
pub use image::{
    disparity_as_inverse_depth, to_depth, to_inverse_depth, DepthImage, DisparityImage,
    InverseDepthImage, MaskedImage, NormalMap, PointCloud,
};
pub(crate) use image::check_dims;
