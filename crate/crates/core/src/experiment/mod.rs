//! End-to-end experiments: placement, channel snapshots, multi-seed
//! training runs and solver benchmarks.

pub mod bench;
pub mod config;
pub mod export;
pub mod placement;
pub mod runner;

pub use bench::{bench_instance, bench_solvers, relative_error, BenchReport, BenchSettings, SolverStats};
pub use export::{export_dataset, DatasetManifest, DeviceRange};
pub use config::{DataConfig, ExperimentConfig, FleetConfig, PartitionConfig, SolverConfig, TargetDist};
pub use placement::{place_devices, snapshot_channel, Fleet, Position};
pub use runner::{
    build_data, run_experiment, run_trial, write_metrics_csv, write_outputs, ExperimentResult,
    ExperimentSummary, TrialData, TrialResult, TrialSummary,
};
