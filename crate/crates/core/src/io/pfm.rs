use std::fs;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{DepthImage, DisparityImage, MaskedImage, NormalMap};

/// Raw PFM payload: `channels` interleaved `f32` samples per pixel, rows
/// top to bottom (the file stores them bottom to top).
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidInput(format!("PFM supports 1 or 3 channels, got {channels}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidInput(format!(
                "{width}x{height}x{channels} image needs {} samples, got {}",
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }
}

pub fn read_pfm(path: &Path) -> Result<FloatImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, path)
}

/// Writes little-endian (scale `-1`).
pub fn write_pfm(img: &FloatImage, path: &Path) -> Result<()> {
    fs::write(path, encode_pfm(img)).map_err(|e| Error::io(path, e))
}

pub fn encode_pfm(img: &FloatImage) -> Vec<u8> {
    let tag = if img.channels == 3 { "PF" } else { "Pf" };
    let mut out = format!("{tag}\n{} {}\n-1.0\n", img.width, img.height).into_bytes();
    let row_len = img.width * img.channels;
    out.reserve(img.data.len() * 4);
    for row in img.data.chunks(row_len.max(1)).rev() {
        for x in row {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

/// Cursor over the ASCII header tokens.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn token(&mut self) -> Option<&'a str> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.bytes[start..self.pos]).ok()).flatten()
    }
}

pub fn decode_pfm(bytes: &[u8], path: &Path) -> Result<FloatImage> {
    let bad = |msg: &str| Error::format(path, format!("malformed PFM: {msg}"));
    let mut h = Header { bytes, pos: 0 };
    let channels = match h.token() {
        Some("Pf") => 1,
        Some("PF") => 3,
        _ => return Err(bad("expected 'Pf' or 'PF' magic")),
    };
    let mut dim = || -> Result<usize> {
        h.token()
            .and_then(|t| t.parse::<usize>().ok())
            .filter(|&d| d > 0)
            .ok_or_else(|| bad("bad dimensions"))
    };
    let width = dim()?;
    let height = dim()?;
    let scale: f64 = h
        .token()
        .and_then(|t| t.parse().ok())
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| bad("bad scale line"))?;
    // exactly one whitespace byte separates the header from the payload
    if h.pos >= bytes.len() || !bytes[h.pos].is_ascii_whitespace() {
        return Err(bad("missing payload"));
    }
    let payload = &bytes[h.pos + 1..];
    let n = width
        .checked_mul(height)
        .and_then(|x| x.checked_mul(channels))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if payload.len() < n * 4 {
        return Err(Error::format(
            path,
            format!("truncated PFM payload: expected {} bytes, found {}", n * 4, payload.len()),
        ));
    }
    let little = scale < 0.0;
    let samples: Vec<f32> = payload[..n * 4]
        .chunks_exact(4)
        .map(|b| {
            let b = [b[0], b[1], b[2], b[3]];
            if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            }
        })
        .collect();
    let row_len = width * channels;
    let data = samples.chunks(row_len).rev().flatten().copied().collect();
    FloatImage::new(width, height, channels, data)
}

fn scalar_samples(img: &FloatImage, path: &Path) -> Result<Vec<f64>> {
    if img.channels != 1 {
        return Err(Error::format(path, format!("expected a 1-channel PFM, got {} channels", img.channels)));
    }
    Ok(img.data.iter().map(|&x| x as f64).collect())
}

/// Metric depth from a 1-channel PFM; non-positive or non-finite samples are
/// invalid.
pub fn depth_from_pfm(img: &FloatImage, path: &Path) -> Result<DepthImage> {
    DepthImage::from_values(img.width, img.height, scalar_samples(img, path)?)
}

pub fn disparity_from_pfm(img: &FloatImage, path: &Path) -> Result<DisparityImage> {
    DisparityImage::from_values(img.width, img.height, scalar_samples(img, path)?)
}

fn scalar_to_pfm(img: &MaskedImage<f64>) -> FloatImage {
    let data = img
        .values()
        .iter()
        .zip(img.mask())
        .map(|(&x, &ok)| if ok { x as f32 } else { 0.0 })
        .collect();
    FloatImage {
        width: img.width(),
        height: img.height(),
        channels: 1,
        data,
    }
}

/// Invalid pixels are written as 0.
pub fn depth_to_pfm(depth: &DepthImage) -> FloatImage {
    scalar_to_pfm(depth)
}

pub fn disparity_to_pfm(disparity: &DisparityImage) -> FloatImage {
    scalar_to_pfm(disparity)
}

/// Invalid pixels are written as `(0, 0, 0)`.
pub fn normals_to_pfm(normals: &NormalMap) -> FloatImage {
    let mut data = Vec::with_capacity(normals.values().len() * 3);
    for (n, &ok) in normals.values().iter().zip(normals.mask()) {
        let n = if ok { *n } else { Vector3::zeros() };
        data.extend([n.x as f32, n.y as f32, n.z as f32]);
    }
    FloatImage {
        width: normals.width(),
        height: normals.height(),
        channels: 3,
        data,
    }
}

/// Zero or non-finite vectors are invalid; the rest are renormalized.
pub fn normals_from_pfm(img: &FloatImage, path: &Path) -> Result<NormalMap> {
    if img.channels != 3 {
        return Err(Error::format(path, format!("expected a 3-channel PFM, got {} channels", img.channels)));
    }
    let normals: Vec<Vector3<f64>> = img
        .data
        .chunks_exact(3)
        .map(|c| Vector3::new(c[0] as f64, c[1] as f64, c[2] as f64))
        .collect();
    let valid = vec![true; normals.len()];
    NormalMap::new(img.width, img.height, normals, valid)
}
