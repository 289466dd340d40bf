//! Optional TOML config file. Every key mirrors a command-line flag; flags
//! given on the command line win.

use std::fs;
use std::path::Path;

use anyhow::Context;
use normalis_core::harness::SuiteConfig;
use normalis_core::{Estimator, GradientKernel};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub estimators: Option<Vec<Estimator>>,
    pub kernel: Option<GradientKernel>,
    pub neighborhood_radius: Option<usize>,
    pub pca_window: Option<usize>,
    pub repetitions: Option<usize>,
    pub border: Option<usize>,
    pub trials: Option<usize>,
    pub grid_step: Option<f64>,
    pub synth: Option<SuiteConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}
