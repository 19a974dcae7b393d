//! Monte Carlo evaluation: configuration, trials, sweeps and result files.

mod config;
mod metrics;
mod output;
mod sweep;
mod trial;

pub use config::{AxisKind, EstimatorKind, ScenarioConfig, CONFIG_KEYS};
pub use metrics::{nmse_db, NMSE_FLOOR_DB};
pub use output::{emit_csv, emit_plot, read_csv, render_csv, render_svg, CsvRow};
pub use sweep::{sweep, sweep_with_context, EstimatorStats, SweepResult};
pub use trial::{run_trial, EstimatorOutcome, TrialContext, TrialDetail, TrialRecord};
