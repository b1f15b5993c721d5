//! Multi-seed training runs and their persisted outputs.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PartitionConfig, TargetDist};
use super::placement::{snapshot_channel, Fleet};
use crate::datagen::{dirichlet_partition, gen_synthetic, sort_and_partition, Partition, Samples};
use crate::error::{Error, Result};
use crate::objective::ClassDistribution;
use crate::fltrain::{run_round, Federation, RoundMetrics, RoundSettings, TrainState};
use crate::rng::{stream, Stream};
use crate::schedulers::SolverKind;

/// Data of one trial: the split training set, the test set and the class
/// mix the scheduler targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub partition: Partition,
    pub test: Samples,
    pub target: ClassDistribution,
}

/// Generates and partitions the synthetic task for `seed`.
pub fn build_data(cfg: &ExperimentConfig, seed: u64) -> Result<TrialData> {
    let task = cfg.data.task.build(&mut stream(seed, Stream::TaskMeans, 0, 0))?;
    let (train, test) = gen_synthetic(&task, &mut stream(seed, Stream::Samples, 0, 0))?;
    let mut rng = stream(seed, Stream::Partition, 0, 0);
    let partition = match cfg.data.partition {
        PartitionConfig::SortAndPartition {
            shards_per_device,
            imbalance_ratio,
        } => sort_and_partition(&train, cfg.fleet.devices, shards_per_device, imbalance_ratio, &mut rng)?,
        PartitionConfig::Dirichlet {
            alpha,
            samples_per_device,
        } => dirichlet_partition(&train, cfg.fleet.devices, alpha, samples_per_device, &mut rng)?,
    };
    let target = match cfg.data.target {
        TargetDist::Population => train.label_dist()?,
        TargetDist::Pool => partition.global_dist()?,
    };
    Ok(TrialData {
        partition,
        test,
        target,
    })
}

/// Per-seed summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub seed: u64,
    pub final_accuracy: f64,
    pub max_accuracy: f64,
    pub final_train_loss: f64,
    pub mean_scheduled: f64,
    /// Mean over rounds that scheduled at least one device.
    pub mean_wemd: Option<f64>,
    pub skipped_rounds: usize,
}

/// What a whole experiment reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub solver: SolverKind,
    pub devices: usize,
    pub rounds: usize,
    pub mean_final_accuracy: f64,
    pub mean_max_accuracy: f64,
    pub mean_scheduled: f64,
    pub mean_wemd: Option<f64>,
    /// How device positions relate across seeds.
    pub placement: String,
    pub trials: Vec<TrialSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub rows: Vec<RoundMetrics>,
    pub summary: TrialSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub trials: Vec<TrialResult>,
    pub summary: ExperimentSummary,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn summarize(seed: u64, rows: &[RoundMetrics]) -> TrialSummary {
    let last = rows.last();
    TrialSummary {
        seed,
        final_accuracy: last.map_or(0.0, |r| r.test_acc),
        max_accuracy: rows.iter().map(|r| r.test_acc).fold(0.0, f64::max),
        final_train_loss: last.map_or(f64::NAN, |r| r.train_loss),
        mean_scheduled: mean(rows.iter().map(|r| r.scheduled as f64)).unwrap_or(0.0),
        mean_wemd: mean(rows.iter().filter_map(|r| r.wemd)),
        skipped_rounds: rows.iter().filter(|r| r.skipped()).count(),
    }
}

/// Runs every round of one seed.
pub fn run_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialResult> {
    cfg.validate()?;
    let data = build_data(cfg, seed)?;
    let devices = &data.partition.devices;
    let pool = data.partition.pooled();
    let fed = Federation {
        devices,
        global_dist: &data.target,
        pool: &pool,
        test: &data.test,
    };
    let fleet = Fleet::place(
        cfg.fleet.devices,
        &cfg.channel,
        cfg.fleet.placement_seed.unwrap_or(seed),
    )?;
    let settings = RoundSettings {
        solver: cfg.solver.name,
        hp: cfg.hyper.clone(),
        availability: cfg.fleet.availability,
        g_mode: cfg.solver.g_mode,
        smoothing: cfg.solver.smoothing,
        poc_subset: cfg.solver.poc_subset,
        total_bandwidth: cfg.channel.total_bandwidth_hz,
        seed,
    };
    let task = &cfg.data.task;
    let mut state = TrainState::new(devices.len(), task.num_classes, task.feature_dim);
    let mut rows = Vec::with_capacity(cfg.hyper.rounds);
    for round in 0..cfg.hyper.rounds {
        let links = snapshot_channel(&fleet, &cfg.channel, round as u64, seed)?;
        rows.push(run_round(&mut state, &fed, &links, &settings)?);
    }
    let summary = summarize(seed, &rows);
    Ok(TrialResult { rows, summary })
}

/// Runs every seed (in parallel) and summarizes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let trials: Vec<TrialResult> = cfg
        .seeds
        .par_iter()
        .map(|&s| run_trial(cfg, s))
        .collect::<Result<_>>()?;
    let sums: Vec<TrialSummary> = trials.iter().map(|t| t.summary.clone()).collect();
    let summary = ExperimentSummary {
        solver: cfg.solver.name,
        devices: cfg.fleet.devices,
        rounds: cfg.hyper.rounds,
        mean_final_accuracy: mean(sums.iter().map(|t| t.final_accuracy)).unwrap_or(0.0),
        mean_max_accuracy: mean(sums.iter().map(|t| t.max_accuracy)).unwrap_or(0.0),
        mean_scheduled: mean(sums.iter().map(|t| t.mean_scheduled)).unwrap_or(0.0),
        mean_wemd: mean(sums.iter().filter_map(|t| t.mean_wemd)),
        placement: match cfg.fleet.placement_seed {
            Some(s) => format!("fixed across seeds by placement_seed {s}"),
            None => "redrawn per seed".into(),
        },
        trials: sums,
    };
    Ok(ExperimentResult { trials, summary })
}

/// Writes the metrics table, rows ordered by seed then round.
pub fn write_metrics_csv(trials: &[TrialResult], path: &Path) -> Result<()> {
    let csv_err = |source| Error::Csv {
        context: path.display().to_string(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(RoundMetrics::HEADER).map_err(csv_err)?;
    for row in trials.iter().flat_map(|t| &t.rows) {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `metrics.csv` and `summary.json` under `dir`; returns their paths.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let metrics = dir.join("metrics.csv");
    write_metrics_csv(&result.trials, &metrics)?;
    let summary = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&result.summary).map_err(|source| Error::Json {
        context: summary.display().to_string(),
        source,
    })?;
    std::fs::write(&summary, text + "\n").map_err(|e| Error::io(&summary, e))?;
    Ok((metrics, summary))
}
