use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::candidates::Neighborhood;
use crate::error::{Error, Result};
use crate::estimators::{estimate_normals, estimate_normals_from_inverse_depth, median, Estimator, EstimatorConfig};
use crate::gradient::GradientKernel;
use crate::io::{self, DatasetManifest, DepthInput, ManifestEntry, RidgeBand};
use crate::metrics::{angular_error_map, error_stats, mean_angular_error, AngularErrorMap, ErrorStats};
use crate::geometry::NormalMap;

use super::colormap::error_colormap;

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub estimators: Vec<Estimator>,
    pub kernel: GradientKernel,
    pub neighborhood_radius: usize,
    pub pca_window: usize,
    /// Timed runs per image; the reported time is their median.
    pub repetitions: usize,
    /// Pixels this close to the image edge are left out of every metric.
    pub border: usize,
    pub error_map_dir: Option<PathBuf>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            estimators: Estimator::ALL.to_vec(),
            kernel: GradientKernel::Central,
            neighborhood_radius: 1,
            pca_window: 5,
            repetitions: 5,
            border: 2,
            error_map_dir: None,
        }
    }
}

impl BenchOptions {
    pub fn config(&self, estimator: Estimator) -> Result<EstimatorConfig> {
        let cfg = EstimatorConfig {
            estimator,
            kernel: self.kernel,
            neighborhood: Neighborhood::ring(self.neighborhood_radius)?,
            pca_window: self.pca_window,
            ..EstimatorConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Error inside and outside the ridge band of a dihedral scene.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandMetrics {
    pub band_mean_deg: f64,
    pub off_band_mean_deg: f64,
    pub band_px: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowMetrics {
    /// `None` when the entry has no ground-truth normals.
    pub errors: Option<ErrorStats>,
    pub band: Option<BandMetrics>,
    pub valid_px: usize,
    pub ms_per_image: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub entry_id: String,
    pub estimator: Estimator,
    pub metrics: Option<RowMetrics>,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn status(&self) -> String {
        match &self.error {
            None => "ok".into(),
            Some(e) => format!("error: {e}"),
        }
    }
}

/// Per-estimator summary over all evaluated entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub estimator: Estimator,
    pub entries: usize,
    pub failed: usize,
    /// Mean over entries of the per-image mean error.
    pub ea_mean_deg: Option<f64>,
    pub band_mean_deg: Option<f64>,
    pub median_ms_per_image: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
}

/// Angular error of one estimate against ground truth.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub map: AngularErrorMap,
    pub stats: ErrorStats,
    pub band: Option<BandMetrics>,
}

/// Compares `est` with `gt` on pixels valid in both, inside `mask` if given,
/// and at least `border` pixels from the image edge.
pub fn evaluate(
    est: &NormalMap,
    gt: &NormalMap,
    mask: Option<&[bool]>,
    border: usize,
    ridge: Option<&RidgeBand>,
) -> Result<Evaluation> {
    let (w, h) = gt.dims();
    if let Some(m) = mask {
        if m.len() != w * h {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                actual: (m.len(), 1),
            });
        }
    }
    let inside = |u: usize, v: usize| {
        u >= border && v >= border && u + border < w && v + border < h && mask.map_or(true, |m| m[v * w + u])
    };
    let map = angular_error_map(est, gt)?.restricted(inside);
    let stats = error_stats(&map)?;
    let band = match ridge {
        None => None,
        Some(r) => {
            let in_band = map.restricted(|u, v| r.contains(u, v));
            let off_band = map.restricted(|u, v| !r.contains(u, v));
            Some(BandMetrics {
                band_mean_deg: mean_angular_error(&in_band)?,
                off_band_mean_deg: mean_angular_error(&off_band).unwrap_or(f64::NAN),
                band_px: in_band.valid_count(),
            })
        }
    };
    Ok(Evaluation { map, stats, band })
}

struct LoadedEntry {
    input: DepthInput,
    gt: Option<NormalMap>,
    mask: Option<Vec<bool>>,
}

fn load_entry(manifest: &DatasetManifest, entry: &ManifestEntry) -> Result<LoadedEntry> {
    let input = io::read_depth(&manifest.resolve(&entry.depth_path), entry.depth_format)?;
    let gt = entry
        .gt_normal_path
        .as_ref()
        .map(|p| io::read_normals(&manifest.resolve(p)))
        .transpose()?;
    let mask = match &entry.gt_mask_path {
        None => None,
        Some(p) => {
            let path = manifest.resolve(p);
            let (w, h, m) = io::read_mask_png(&path)?;
            if (w, h) != input.dims() {
                return Err(Error::format(&path, format!("mask is {w}x{h}, depth is {:?}", input.dims())));
            }
            Some(m)
        }
    };
    Ok(LoadedEntry { input, gt, mask })
}

fn estimate_timed(
    input: &DepthInput,
    entry: &ManifestEntry,
    cfg: &EstimatorConfig,
    repetitions: usize,
) -> Result<(NormalMap, f64)> {
    let run = || match input {
        DepthInput::Depth(d) => estimate_normals(d, &entry.intrinsics, cfg),
        DepthInput::Disparity(d) => estimate_normals_from_inverse_depth(&d.as_inverse_depth(), &entry.intrinsics, cfg),
    };
    let mut times = Vec::with_capacity(repetitions.max(1));
    let mut out = None;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        let n = run()?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        out = Some(n);
    }
    Ok((out.expect("at least one repetition"), median(&mut times)))
}

fn bench_one(
    loaded: &LoadedEntry,
    entry: &ManifestEntry,
    estimator: Estimator,
    opts: &BenchOptions,
) -> Result<RowMetrics> {
    let cfg = opts.config(estimator)?;
    let (normals, ms) = estimate_timed(&loaded.input, entry, &cfg, opts.repetitions)?;
    let mut row = RowMetrics {
        errors: None,
        band: None,
        valid_px: normals.valid_count(),
        ms_per_image: ms,
    };
    if let Some(gt) = &loaded.gt {
        let ev = evaluate(&normals, gt, loaded.mask.as_deref(), opts.border, entry.ridge.as_ref())?;
        if let Some(dir) = &opts.error_map_dir {
            let path = dir.join(format!("{}.{}.png", entry.id, estimator));
            io::write_rgb8_png(ev.map.width(), ev.map.height(), error_colormap(&ev.map), &path)?;
        }
        row.valid_px = ev.stats.count;
        row.errors = Some(ev.stats);
        row.band = ev.band;
    }
    Ok(row)
}

/// Runs every requested estimator on every manifest entry. Failures of single
/// entries are recorded in their rows rather than aborting the run.
pub fn run_benchmark(manifest: &DatasetManifest, opts: &BenchOptions) -> Result<BenchmarkReport> {
    if manifest.entries.is_empty() {
        return Err(Error::InvalidInput("manifest has no entries".into()));
    }
    if opts.estimators.is_empty() {
        return Err(Error::InvalidInput("no estimators selected".into()));
    }
    for &e in &opts.estimators {
        opts.config(e)?;
    }
    if let Some(dir) = &opts.error_map_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut estimators = opts.estimators.clone();
    estimators.sort_by_key(|e| e.name());
    estimators.dedup();

    let mut entries: Vec<&ManifestEntry> = manifest.entries.iter().collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));

    let mut rows = Vec::with_capacity(entries.len() * estimators.len());
    for entry in entries {
        let loaded = load_entry(manifest, entry);
        for &estimator in &estimators {
            let result = loaded
                .as_ref()
                .map_err(describe)
                .and_then(|l| bench_one(l, entry, estimator, opts).map_err(|e| describe(&e)));
            let (metrics, error) = match result {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e)),
            };
            rows.push(BenchRow {
                entry_id: entry.id.clone(),
                estimator,
                metrics,
                error,
            });
        }
    }
    let aggregates = estimators.iter().map(|&e| aggregate(e, &rows)).collect();
    Ok(BenchmarkReport { rows, aggregates })
}

/// Error message followed by its chain of causes.
fn describe(e: &Error) -> String {
    let mut msg = e.to_string();
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        msg.push_str(": ");
        msg.push_str(&s.to_string());
        source = s.source();
    }
    msg
}

fn mean_of(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| crate::metrics::compensated_sum(xs.iter().copied()) / xs.len() as f64)
}

fn aggregate(estimator: Estimator, rows: &[BenchRow]) -> Aggregate {
    let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.estimator == estimator).collect();
    let ok: Vec<&RowMetrics> = mine.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let means: Vec<f64> = ok.iter().filter_map(|m| m.errors.map(|e| e.mean)).collect();
    let bands: Vec<f64> = ok.iter().filter_map(|m| m.band.map(|b| b.band_mean_deg)).collect();
    let mut times: Vec<f64> = ok.iter().map(|m| m.ms_per_image).collect();
    Aggregate {
        estimator,
        entries: mine.len(),
        failed: mine.len() - ok.len(),
        ea_mean_deg: mean_of(&means),
        band_mean_deg: mean_of(&bands),
        median_ms_per_image: (!times.is_empty()).then(|| median(&mut times)),
    }
}

fn fmt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

impl BenchmarkReport {
    pub fn has_failures(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    fn has_band(&self) -> bool {
        self.rows.iter().any(|r| r.metrics.as_ref().is_some_and(|m| m.band.is_some()))
    }

    /// One row per (entry, estimator). Band columns appear only when some
    /// entry carries ridge metadata.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let band = self.has_band();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "entry_id",
            "estimator",
            "ea_mean_deg",
            "ea_median_deg",
            "ea_max_deg",
            "valid_px",
            "ms_per_image",
        ];
        if band {
            header.extend(["band_ea_mean_deg", "off_band_ea_mean_deg", "band_px"]);
        }
        header.push("status");
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let m = r.metrics.as_ref();
            let e = m.and_then(|m| m.errors);
            let mut rec = vec![
                r.entry_id.clone(),
                r.estimator.to_string(),
                fmt(e.map(|e| e.mean)),
                fmt(e.map(|e| e.median)),
                fmt(e.map(|e| e.max)),
                m.map(|m| m.valid_px.to_string()).unwrap_or_default(),
                fmt(m.map(|m| m.ms_per_image)),
            ];
            if band {
                let b = m.and_then(|m| m.band);
                rec.push(fmt(b.map(|b| b.band_mean_deg)));
                rec.push(fmt(b.map(|b| b.off_band_mean_deg)));
                rec.push(b.map(|b| b.band_px.to_string()).unwrap_or_default());
            }
            rec.push(r.status());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.write_json(&mut w)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))
    }

    /// Per-estimator means, keyed by estimator name.
    pub fn summary(&self) -> BTreeMap<&'static str, &Aggregate> {
        self.aggregates.iter().map(|a| (a.estimator.name(), a)).collect()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv: {e}"))
}
