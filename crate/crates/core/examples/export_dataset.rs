//! Writes the partitioned training pool, the test set and a JSON manifest
//! with each device's row range. Usage: `export_dataset [dir]`

use std::path::PathBuf;

use fedcgd::experiment::{export_dataset, ExperimentConfig, PartitionConfig};

fn main() -> fedcgd::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("fedcgd-data"), PathBuf::from);
    let mut cfg = ExperimentConfig::default();
    cfg.fleet.devices = 8;
    cfg.data.partition = PartitionConfig::Dirichlet {
        alpha: 0.5,
        samples_per_device: None,
    };
    let manifest = export_dataset(&cfg, 0, &dir)?;
    println!("wrote {} pool rows and {} test rows to {}", manifest.pool_size, manifest.test_size, dir.display());
    for d in &manifest.devices {
        let mix: Vec<String> = d.label_dist.iter().map(|p| format!("{p:.2}")).collect();
        println!("device {:>2}: rows {:>4}..{:<4} [{}]", d.device, d.start, d.end, mix.join(" "));
    }
    Ok(())
}
