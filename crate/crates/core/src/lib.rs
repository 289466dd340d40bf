//! Dense surface-normal estimation from depth and disparity images.
//!
//! The pipeline is:
//!
//! 1. [`geometry`] – pinhole intrinsics, masked image containers and the
//!    depth / inverse-depth / disparity conversions.
//! 2. [`gradient`] – discrete gradients of inverse depth (central difference,
//!    Sobel, Prewitt), normalized to unit slope.
//! 3. [`candidates`] – per-pixel azimuth plus one axial normal candidate per
//!    neighbour.
//! 4. [`estimators`] – the closed-form axial inclination estimator
//!    ([`Estimator::SnePlus`]) and the baselines it is compared against.
//! 5. [`metrics`] – angular error and binary segmentation scores.
//!
//! [`synthetic`] renders analytic scenes with exact ground truth, [`io`] holds
//! the file formats and [`harness`] the benchmark/oracle drivers used by the
//! `normalis` CLI.
//!
//! Images are row-major with `u` the column and `v` the row. Depth is in
//! meters. Estimated normals face the camera.

pub mod candidates;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod gradient;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod synthetic;

pub use crate::candidates::{AxialCandidate, Neighborhood, PixelCandidates, Thresholds};
pub use crate::error::{Error, Result};
pub use crate::estimators::{
    estimate_normals, estimate_normals_from_inverse_depth, Estimator, EstimatorConfig,
    InclinationSolution,
};
pub use crate::geometry::{
    CameraIntrinsics, DepthImage, DisparityImage, InverseDepthImage, MaskedImage, NormalMap,
    PointCloud,
};
pub use crate::gradient::{GradientField, GradientKernel};
pub use crate::metrics::{AngularErrorMap, ConfusionCounts};

pub use nalgebra::Vector3;
