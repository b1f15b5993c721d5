//! Federated training with the FSCD scheduler on a label-skewed split,
//! printing per-round metrics. Pass a config path to override the defaults.

use fedcgd::experiment::{run_trial, ExperimentConfig, PartitionConfig};

fn main() -> fedcgd::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => {
            let mut cfg = ExperimentConfig::default();
            cfg.data.partition = PartitionConfig::SortAndPartition {
                shards_per_device: 1,
                imbalance_ratio: 3.0,
            };
            cfg
        }
    };
    let seed = cfg.seeds[0];
    let trial = run_trial(&cfg, seed)?;
    println!(
        "{:>5} {:>6} {:>5} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "round", "solver", "avail", "sched", "wemd", "sigma", "G", "loss", "acc"
    );
    let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
    for r in &trial.rows {
        println!(
            "{:>5} {:>6} {:>5} {:>5} {:>8} {:>8} {:>8} {:>8.4} {:>8.3}",
            r.round,
            r.solver.to_string(),
            r.available,
            r.scheduled,
            opt(r.wemd),
            opt(r.sigma_hat),
            opt(r.g_hat),
            r.train_loss,
            r.test_acc
        );
    }
    let s = &trial.summary;
    println!(
        "seed {}: final accuracy {:.3}, best {:.3}, mean scheduled {:.2}",
        s.seed, s.final_accuracy, s.max_accuracy, s.mean_scheduled
    );
    Ok(())
}
