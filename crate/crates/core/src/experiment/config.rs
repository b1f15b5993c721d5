//! Experiment configuration document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::datagen::TaskConfig;
use crate::error::{Error, Result};
use crate::fltrain::{GMode, Hyperparams};
use crate::schedulers::SolverKind;

/// Devices in the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    pub devices: usize,
    /// Per-round availability probability `p_a`.
    pub availability: f64,
    /// Fixes the placement across seeds; when absent every seed places the
    /// fleet anew.
    pub placement_seed: Option<u64>,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            devices: 32,
            availability: 0.3,
            placement_seed: None,
        }
    }
}

/// How training data is split across devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PartitionConfig {
    /// Label-sorted shards with imbalance ratio `r` between the class halves.
    SortAndPartition {
        shards_per_device: usize,
        imbalance_ratio: f64,
    },
    /// Per-device label mix from `Dir(α·p)`.
    Dirichlet {
        alpha: f64,
        #[serde(default)]
        samples_per_device: Option<usize>,
    },
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig::SortAndPartition {
            shards_per_device: 1,
            imbalance_ratio: 1.0,
        }
    }
}

/// Class mix the scheduler steers the scheduled group toward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetDist {
    /// The mix the task's data is generated from, before any subsampling.
    #[default]
    Population,
    /// The empirical mix of all device data.
    Pool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub task: TaskConfig,
    pub partition: PartitionConfig,
    pub target: TargetDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub name: SolverKind,
    /// Power-of-choice sample size; `⌈V/2⌉` when absent.
    pub poc_subset: Option<usize>,
    pub g_mode: GMode,
    /// Exponential smoothing factor for σ̂ and Ĝ.
    pub smoothing: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            name: SolverKind::Fscd,
            poc_subset: None,
            g_mode: GMode::Scalar,
            smoothing: None,
        }
    }
}

/// Full description of a training experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub fleet: FleetConfig,
    pub data: DataConfig,
    pub hyper: Hyperparams,
    pub solver: SolverConfig,
    pub seeds: Vec<u64>,
    /// Output directory; the caller's default applies when absent.
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelParams::default(),
            fleet: FleetConfig::default(),
            data: DataConfig::default(),
            hyper: Hyperparams::default(),
            solver: SolverConfig::default(),
            seeds: vec![0],
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "experiment config".into(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.hyper.validate()?;
        if self.fleet.devices == 0 {
            return Err(Error::config("fleet.devices must be ≥ 1"));
        }
        if !(0.0..=1.0).contains(&self.fleet.availability) {
            return Err(Error::config(format!(
                "fleet.availability must lie in [0, 1], got {}",
                self.fleet.availability
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds must list at least one seed"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("seeds must be distinct"));
        }
        match self.data.partition {
            PartitionConfig::SortAndPartition {
                shards_per_device,
                imbalance_ratio,
            } => {
                if shards_per_device == 0 || !(imbalance_ratio > 0.0) {
                    return Err(Error::config(
                        "sort-and-partition needs shards_per_device ≥ 1 and imbalance_ratio > 0",
                    ));
                }
            }
            PartitionConfig::Dirichlet { alpha, .. } => {
                if !(alpha > 0.0) || !alpha.is_finite() {
                    return Err(Error::config(format!("dirichlet alpha must be positive, got {alpha}")));
                }
            }
        }
        if let Some(f) = self.solver.smoothing {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::config(format!("solver.smoothing must lie in (0, 1], got {f}")));
            }
        }
        if self.solver.poc_subset == Some(0) {
            return Err(Error::config("solver.poc_subset must be ≥ 1"));
        }
        if self.solver.name == SolverKind::Oracle && self.fleet.devices > crate::schedulers::MAX_BRUTE_FORCE_DEVICES {
            return Err(Error::config(format!(
                "the oracle solver handles at most {} devices",
                crate::schedulers::MAX_BRUTE_FORCE_DEVICES
            )));
        }
        Ok(())
    }
}
