//! Angular error of normal maps and binary segmentation scores.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::geometry::{MaskedImage, NormalMap};

/// Per-pixel angle between two normal maps, in degrees, valid where both
/// inputs are.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularErrorMap(MaskedImage<f64>);

impl Deref for AngularErrorMap {
    type Target = MaskedImage<f64>;

    fn deref(&self) -> &MaskedImage<f64> {
        &self.0
    }
}

impl AngularErrorMap {
    /// Valid error values in row-major order.
    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values()
            .iter()
            .zip(self.mask())
            .filter_map(|(&e, &ok)| ok.then_some(e))
    }

    /// Restricts the map to pixels where `keep(u, v)` holds.
    pub fn restricted(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        Self(MaskedImage::from_fn(self.width(), self.height(), 0.0, |u, v| {
            self.get(u, v).filter(|_| keep(u, v))
        }))
    }
}

/// Angle between `est` and `gt` at every jointly valid pixel, in degrees.
///
/// The comparison is direction-sensitive: antipodal normals score 180°.
pub fn angular_error_map(est: &NormalMap, gt: &NormalMap) -> Result<AngularErrorMap> {
    error_map(est, gt, false)
}

/// Axial variant for inputs without a shared orientation convention: `n` and
/// `-n` are identified, so errors lie in `[0°, 90°]`.
pub fn angular_error_map_folded(est: &NormalMap, gt: &NormalMap) -> Result<AngularErrorMap> {
    error_map(est, gt, true)
}

fn error_map(est: &NormalMap, gt: &NormalMap, fold: bool) -> Result<AngularErrorMap> {
    if est.dims() != gt.dims() {
        return Err(Error::DimensionMismatch {
            expected: gt.dims(),
            actual: est.dims(),
        });
    }
    Ok(AngularErrorMap(MaskedImage::from_fn(est.width(), est.height(), 0.0, |u, v| {
        let (a, b) = (est.get(u, v)?, gt.get(u, v)?);
        let mut c = a.dot(&b) / (a.norm() * b.norm());
        if fold {
            c = c.abs();
        }
        Some(c.clamp(-1.0, 1.0).acos().to_degrees())
    })))
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean angular error over valid pixels (degrees).
pub fn mean_angular_error(map: &AngularErrorMap) -> Result<f64> {
    let m = map.valid_count();
    if m == 0 {
        return Err(Error::NoValidPixels);
    }
    Ok(compensated_sum(map.valid_values()) / m as f64)
}

/// Summary of one error map.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub count: usize,
}

pub fn error_stats(map: &AngularErrorMap) -> Result<ErrorStats> {
    let mean = mean_angular_error(map)?;
    let mut vals: Vec<f64> = map.valid_values().collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let count = vals.len();
    Ok(ErrorStats {
        mean,
        median: crate::estimators::median(&mut vals),
        max,
        count,
    })
}

/// Pixel tallies of a binary prediction against ground truth.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

/// Counts over pixels where `eval` is true.
pub fn confusion(pred: &[bool], gt: &[bool], eval: &[bool]) -> Result<ConfusionCounts> {
    if pred.len() != gt.len() || gt.len() != eval.len() {
        return Err(Error::InvalidInput(format!(
            "mask lengths differ: pred {}, gt {}, eval {}",
            pred.len(),
            gt.len(),
            eval.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for ((&p, &g), _) in pred.iter().zip(gt).zip(eval).filter(|(_, &e)| e) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// F-score in percent, `2 tp² / (2 tp² + tp (fp + fn))`.
///
/// Evaluated in the reduced form `2 tp / (2 tp + fp + fn)`, which is the same
/// value for `tp > 0` and gives 0 rather than 0/0 for disjoint masks.
pub fn fscore(c: &ConfusionCounts) -> Result<f64> {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if c.tp + c.fp + c.fn_ == 0 {
        return Err(Error::UndefinedScore);
    }
    Ok(2.0 * c.tp as f64 / denom as f64 * 100.0)
}

/// Intersection over union in percent, `tp / (tp + fp + fn)`.
pub fn iou(c: &ConfusionCounts) -> Result<f64> {
    let denom = c.tp + c.fp + c.fn_;
    if denom == 0 {
        return Err(Error::UndefinedScore);
    }
    Ok(c.tp as f64 / denom as f64 * 100.0)
}
