//! Experiment plumbing: configs, per-seed runs, curve aggregation, plots
//! and ablation grids.

pub mod ablation;
pub mod aggregate;
pub mod config;
pub mod plot;
pub mod run;

pub use ablation::{ablation_grid, AblationParam};
pub use aggregate::{aggregate, Curve, CurvePoint};
pub use config::{ExperimentConfig, Preset};
pub use run::{read_manifest, read_metrics, run, run_seed, train, MetricsRecord, RunManifest};
