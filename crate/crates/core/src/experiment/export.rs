//! Plain-text export of a generated dataset.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::build_data;
use crate::error::{Error, Result};

/// Slice of `pool.csv` rows held by one device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceRange {
    pub device: usize,
    /// First row (0-based, header excluded).
    pub start: usize,
    /// One past the last row.
    pub end: usize,
    pub label_dist: Vec<f64>,
}

/// `manifest.json` next to the CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub num_classes: usize,
    pub feature_dim: usize,
    pub pool_file: String,
    pub test_file: String,
    pub pool_size: usize,
    pub test_size: usize,
    /// Training samples left out by subsampling or rounding.
    pub dropped: usize,
    /// Empirical class mix of all device data.
    pub global_dist: Vec<f64>,
    /// Class mix the scheduler targets.
    pub target_dist: Vec<f64>,
    pub devices: Vec<DeviceRange>,
}

/// Writes `pool.csv` (device data, device by device), `test.csv` and
/// `manifest.json` under `dir`.
pub fn export_dataset(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    let data = build_data(cfg, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pool = data.partition.pooled();
    pool.write_csv(&dir.join("pool.csv"))?;
    data.test.write_csv(&dir.join("test.csv"))?;

    let mut start = 0;
    let devices = data
        .partition
        .devices
        .iter()
        .enumerate()
        .map(|(device, d)| {
            let range = DeviceRange {
                device,
                start,
                end: start + d.size(),
                label_dist: d.label_dist.probs().to_vec(),
            };
            start = range.end;
            range
        })
        .collect();
    let manifest = DatasetManifest {
        seed,
        num_classes: pool.num_classes,
        feature_dim: pool.dim,
        pool_file: "pool.csv".into(),
        test_file: "test.csv".into(),
        pool_size: pool.len(),
        test_size: data.test.len(),
        dropped: data.partition.dropped,
        global_dist: data.partition.global_dist()?.probs().to_vec(),
        target_dist: data.target.probs().to_vec(),
        devices,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
