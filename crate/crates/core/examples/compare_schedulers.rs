//! FSCD against the best-channel baseline as the class imbalance grows.
//! Usage: `compare_schedulers [seeds]`

use fedcgd::experiment::{run_experiment, ExperimentConfig, PartitionConfig};
use fedcgd::schedulers::SolverKind;

fn main() -> fedcgd::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    println!("{:>4} {:>7} {:>10} {:>10} {:>10}", "r", "solver", "final acc", "scheduled", "wemd");
    for r in [1.0, 3.0, 9.0] {
        for solver in [SolverKind::Fscd, SolverKind::Bc] {
            let mut cfg = ExperimentConfig::default();
            cfg.seeds = (0..seeds).collect();
            cfg.solver.name = solver;
            cfg.data.partition = PartitionConfig::SortAndPartition {
                shards_per_device: 1,
                imbalance_ratio: r,
            };
            let s = run_experiment(&cfg)?.summary;
            println!(
                "{:>4} {:>7} {:>10.3} {:>10.2} {:>10.3}",
                r,
                solver.to_string(),
                s.mean_final_accuracy,
                s.mean_scheduled,
                s.mean_wemd.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
