//! File formats: PFM for lossless floats, 16-bit PNG for depth and normals,
//! 8-bit PNG for masks, and the TOML dataset manifest.
//!
//! Byte-level layouts are documented in `docs/formats.md`.

mod manifest;
mod pfm;
mod png;

pub use manifest::{load_manifest, write_manifest, DatasetManifest, DepthFormat, ManifestEntry, RidgeBand};
pub use pfm::{
    decode_pfm, depth_from_pfm, depth_to_pfm, disparity_from_pfm, disparity_to_pfm, encode_pfm,
    normals_from_pfm, normals_to_pfm, read_pfm, write_pfm, FloatImage,
};
pub use png::{
    decode_normal_png, encode_normal_png, normal_to_rgb16, read_depth_png16, read_mask_png,
    rgb16_to_normal, write_depth_png16, write_mask_png, write_rgb8_png,
};

use std::path::Path;

use crate::error::Result;
use crate::geometry::{DepthImage, DisparityImage, InverseDepthImage, NormalMap};

/// A depth-like input as stored on disk.
#[derive(Clone, Debug)]
pub enum DepthInput {
    Depth(DepthImage),
    Disparity(DisparityImage),
}

impl DepthInput {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            DepthInput::Depth(d) => d.dims(),
            DepthInput::Disparity(d) => d.dims(),
        }
    }

    /// Inverse depth, or disparity standing in for it.
    pub fn to_inverse_depth(&self) -> InverseDepthImage {
        match self {
            DepthInput::Depth(d) => d.to_inverse_depth(),
            DepthInput::Disparity(d) => d.as_inverse_depth(),
        }
    }
}

pub fn read_depth(path: &Path, format: DepthFormat) -> Result<DepthInput> {
    Ok(match format {
        DepthFormat::PfmMeters => DepthInput::Depth(depth_from_pfm(&read_pfm(path)?, path)?),
        DepthFormat::Png16Millimeters => DepthInput::Depth(read_depth_png16(path)?),
        DepthFormat::PfmDisparity => DepthInput::Disparity(disparity_from_pfm(&read_pfm(path)?, path)?),
    })
}

pub fn write_depth(input: &DepthInput, path: &Path, format: DepthFormat) -> Result<()> {
    match (input, format) {
        (DepthInput::Depth(d), DepthFormat::PfmMeters) => write_pfm(&depth_to_pfm(d), path),
        (DepthInput::Depth(d), DepthFormat::Png16Millimeters) => write_depth_png16(d, path),
        (DepthInput::Disparity(d), DepthFormat::PfmDisparity) => write_pfm(&disparity_to_pfm(d), path),
        _ => Err(crate::Error::InvalidInput(format!(
            "image kind does not match depth format {format}"
        ))),
    }
}

/// Reads a normal map, choosing the decoder by extension (`.pfm` or `.png`).
pub fn read_normals(path: &Path) -> Result<NormalMap> {
    if has_extension(path, "pfm") {
        normals_from_pfm(&read_pfm(path)?, path)
    } else {
        decode_normal_png(path)
    }
}

/// Writes a normal map, choosing the encoder by extension (`.pfm` or `.png`).
pub fn write_normals(normals: &NormalMap, path: &Path) -> Result<()> {
    if has_extension(path, "pfm") {
        write_pfm(&normals_to_pfm(normals), path)
    } else {
        encode_normal_png(normals, path)
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}
