//! Experiment runner, metrics, rate fitting and QQ export.

pub mod checkpoints;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod output;
pub mod qq;
pub mod slope;

pub use checkpoints::checkpoint_grid;
pub use config::{ExperimentConfig, MethodSpec, ProblemSpec};
pub use experiment::{run_experiment, ExperimentOutput, MethodSeries, SeriesPoint};
pub use metrics::{quantile, rel_grad_norm, rel_obj_gap, Summary};
pub use qq::{export_qq_data, qq_points};
pub use slope::{fit_rate_from_csv, fit_rate_slope, RateFit};
