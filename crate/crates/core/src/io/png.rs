use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb, Rgba};
use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{DepthImage, NormalMap};

fn load_png(path: &Path) -> Result<DynamicImage> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    image::load(BufReader::new(file), ImageFormat::Png).map_err(|e| Error::format(path, e.to_string()))
}

fn save<P, C>(img: &ImageBuffer<P, C>, path: &Path) -> Result<()>
where
    P: image::Pixel + image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

fn dims(w: usize, h: usize, path: &Path) -> Result<(u32, u32)> {
    match (u32::try_from(w), u32::try_from(h)) {
        (Ok(w), Ok(h)) => Ok((w, h)),
        _ => Err(Error::format(path, "image too large for PNG")),
    }
}

/// 16-bit single-channel PNG in millimeters; 0 is invalid.
pub fn read_depth_png16(path: &Path) -> Result<DepthImage> {
    let DynamicImage::ImageLuma16(img) = load_png(path)? else {
        return Err(Error::format(path, "depth PNG must be 16-bit single-channel"));
    };
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values = img.into_raw().into_iter().map(|mm| mm as f64 / 1000.0).collect();
    DepthImage::from_values(w, h, values)
}

/// Rounds to whole millimeters. Invalid pixels are written as 0; valid depths
/// that round outside `1..=65535` mm are an error.
pub fn write_depth_png16(depth: &DepthImage, path: &Path) -> Result<()> {
    let (w, h) = dims(depth.width(), depth.height(), path)?;
    let mut raw = Vec::with_capacity(depth.values().len());
    for (&z, &ok) in depth.values().iter().zip(depth.mask()) {
        if !ok {
            raw.push(0);
            continue;
        }
        let mm = (z * 1000.0).round();
        if !(1.0..=65535.0).contains(&mm) {
            return Err(Error::format(path, format!("depth {z} m is not representable in 16-bit millimeters")));
        }
        raw.push(mm as u16);
    }
    let img: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(w, h, raw).expect("buffer size matches");
    save(&img, path)
}

/// `round((n_c + 1) / 2 · 65535)` per component.
pub fn normal_to_rgb16(n: &Vector3<f64>) -> [u16; 3] {
    let q = |c: f64| ((c.clamp(-1.0, 1.0) + 1.0) * 0.5 * 65535.0).round() as u16;
    [q(n.x), q(n.y), q(n.z)]
}

pub fn rgb16_to_normal(rgb: [u16; 3]) -> Vector3<f64> {
    let d = |c: u16| c as f64 / 65535.0 * 2.0 - 1.0;
    Vector3::new(d(rgb[0]), d(rgb[1]), d(rgb[2]))
}

/// 16-bit RGBA; alpha 65535 marks valid pixels, invalid pixels are all zero.
pub fn encode_normal_png(normals: &NormalMap, path: &Path) -> Result<()> {
    let (w, h) = dims(normals.width(), normals.height(), path)?;
    let mut raw = Vec::with_capacity(normals.values().len() * 4);
    for (n, &ok) in normals.values().iter().zip(normals.mask()) {
        if ok {
            let [r, g, b] = normal_to_rgb16(n);
            raw.extend([r, g, b, u16::MAX]);
        } else {
            raw.extend([0u16; 4]);
        }
    }
    let img: ImageBuffer<Rgba<u16>, _> = ImageBuffer::from_raw(w, h, raw).expect("buffer size matches");
    save(&img, path)
}

/// Accepts 16-bit RGBA (alpha 0 is invalid) or 16-bit RGB (all-zero is
/// invalid). Decoded vectors are renormalized.
pub fn decode_normal_png(path: &Path) -> Result<NormalMap> {
    let (w, h, pixels): (u32, u32, Vec<Option<[u16; 3]>>) = match load_png(path)? {
        DynamicImage::ImageRgba16(img) => (
            img.width(),
            img.height(),
            img.pixels().map(|p| (p[3] != 0).then_some([p[0], p[1], p[2]])).collect(),
        ),
        DynamicImage::ImageRgb16(img) => (
            img.width(),
            img.height(),
            img.pixels().map(|p| (p.0 != [0; 3]).then_some(p.0)).collect(),
        ),
        _ => return Err(Error::format(path, "normal PNG must be 16-bit RGB or RGBA")),
    };
    let mut normals = Vec::with_capacity(pixels.len());
    let mut valid = Vec::with_capacity(pixels.len());
    for p in pixels {
        normals.push(p.map(rgb16_to_normal).unwrap_or_else(Vector3::zeros));
        valid.push(p.is_some());
    }
    NormalMap::new(w as usize, h as usize, normals, valid)
}

/// 8-bit grayscale; any nonzero value is positive.
pub fn read_mask_png(path: &Path) -> Result<(usize, usize, Vec<bool>)> {
    let img = load_png(path)?.into_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok((w, h, img.into_raw().into_iter().map(|x| x != 0).collect()))
}

pub fn write_mask_png(width: usize, height: usize, mask: &[bool], path: &Path) -> Result<()> {
    let (w, h) = dims(width, height, path)?;
    if mask.len() != width * height {
        return Err(Error::InvalidInput(format!("mask has {} entries for a {width}x{height} image", mask.len())));
    }
    let raw = mask.iter().map(|&b| if b { 255u8 } else { 0 }).collect();
    let img: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_raw(w, h, raw).expect("buffer size matches");
    save(&img, path)
}

pub fn write_rgb8_png(width: usize, height: usize, rgb: Vec<u8>, path: &Path) -> Result<()> {
    let (w, h) = dims(width, height, path)?;
    let img: ImageBuffer<Rgb<u8>, _> = ImageBuffer::from_raw(w, h, rgb)
        .ok_or_else(|| Error::InvalidInput("rgb buffer does not match image size".into()))?;
    save(&img, path)
}
