use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::synthetic::{SceneSpec, Split, SplitAxis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DepthFormat {
    /// 1-channel PFM, meters.
    PfmMeters,
    /// 16-bit grayscale PNG, millimeters, 0 = invalid.
    Png16Millimeters,
    /// 1-channel PFM, disparity in pixels.
    PfmDisparity,
}

impl DepthFormat {
    pub fn name(self) -> &'static str {
        match self {
            Self::PfmMeters => "pfm-meters",
            Self::Png16Millimeters => "png16-millimeters",
            Self::PfmDisparity => "pfm-disparity",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Png16Millimeters => "png",
            _ => "pfm",
        }
    }
}

impl fmt::Display for DepthFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DepthFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Self::PfmMeters, Self::Png16Millimeters, Self::PfmDisparity]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown depth format '{s}'")))
    }
}

/// Image-space band around a dihedral ridge, used for band-wise error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeBand {
    pub axis: SplitAxis,
    pub position: f64,
    /// Pixels within this distance of the ridge line are in the band.
    pub band_halfwidth: f64,
}

impl RidgeBand {
    pub fn from_split(split: Split, band_halfwidth: f64) -> Self {
        Self {
            axis: split.axis,
            position: split.position,
            band_halfwidth,
        }
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        let split = Split {
            axis: self.axis,
            position: self.position,
        };
        split.distance(u, v) <= self.band_halfwidth
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    /// Relative paths resolve against the manifest's directory.
    pub depth_path: PathBuf,
    pub depth_format: DepthFormat,
    pub intrinsics: CameraIntrinsics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_normal_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_mask_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge: Option<RidgeBand>,
    /// Generating scene, for synthetic entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<SceneSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetManifest {
    /// Directory relative paths are resolved against.
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestFile {
    version: u32,
    #[serde(default, rename = "entry")]
    entries: Vec<ManifestEntry>,
}

const VERSION: u32 = 1;

impl DatasetManifest {
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.root.join(path)
        }
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let err = |msg: String| Error::Manifest {
            path: path.to_path_buf(),
            msg,
        };
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(err(format!("duplicate entry id '{}'", e.id)));
            }
            e.intrinsics.validate().map_err(|x| err(format!("entry '{}': {x}", e.id)))?;
            let files = [Some(&e.depth_path), e.gt_normal_path.as_ref(), e.gt_mask_path.as_ref()];
            for f in files.into_iter().flatten() {
                let full = self.resolve(f);
                if !full.is_file() {
                    return Err(err(format!("entry '{}': missing file {}", e.id, full.display())));
                }
            }
        }
        Ok(())
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ManifestFile = toml::from_str(&text).map_err(|e| Error::Manifest {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    if file.version != VERSION {
        return Err(Error::Manifest {
            path: path.to_path_buf(),
            msg: format!("unsupported manifest version {} (expected {VERSION})", file.version),
        });
    }
    let manifest = DatasetManifest {
        root: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        entries: file.entries,
    };
    manifest.validate(path)?;
    Ok(manifest)
}

pub fn write_manifest(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let file = ManifestFile {
        version: VERSION,
        entries: manifest.entries.clone(),
    };
    let text = toml::to_string(&file).map_err(|e| Error::Manifest {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
