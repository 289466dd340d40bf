//! Drivers behind the `normalis` subcommands: synthetic suite generation,
//! benchmark runs with CSV/JSON reports, and the inclination oracle check.

mod colormap;
mod oracle;
mod report;
mod suite;

pub use colormap::{error_colormap, normal_to_rgb8, ERROR_RAMP_MAX_DEG, VIRIDIS_STOPS};
pub use oracle::{random_candidate_set, run_oracle_check, OracleSummary};
pub use report::{
    evaluate, run_benchmark, Aggregate, BandMetrics, BenchOptions, BenchRow, BenchmarkReport, Evaluation, RowMetrics,
};
pub use suite::{generate_suite, random_plane, SuiteConfig};
