//! Solver accuracy against the exhaustive oracle.
//!
//! Usage: `bench_solvers [devices] [instances] [sigma_lo sigma_hi] [alpha_lo alpha_hi]`

use fedcgd::channel::ChannelParams;
use fedcgd::experiment::{bench_solvers, BenchSettings};

fn arg<T: std::str::FromStr>(args: &[String], i: usize, default: T) -> T {
    args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> fedcgd::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let devices: usize = arg(&args, 0, 16);
    let instances: usize = arg(&args, 1, 100);
    let defaults = BenchSettings::default();
    let settings = BenchSettings {
        sigma_range: (arg(&args, 2, defaults.sigma_range.0), arg(&args, 3, defaults.sigma_range.1)),
        alpha_range: (arg(&args, 4, defaults.alpha_range.0), arg(&args, 5, defaults.alpha_range.1)),
        ..defaults
    };
    let report = bench_solvers(&[devices], instances, 0, &ChannelParams::default(), &settings)?;
    let size = &report.sizes[0];
    println!(
        "V={} instances={} skipped={} sigma={:?} alpha={:?}",
        size.devices, size.instances, size.skipped_instances, settings.sigma_range, settings.alpha_range
    );
    println!("{:<7} {:>10} {:>10} {:>9} {:>9} {:>10}", "solver", "mean err", "max err", "mean it", "max it", "scheduled");
    for s in &size.solvers {
        println!(
            "{:<7} {:>9.3}% {:>9.2}% {:>9.1} {:>9} {:>10.2}",
            s.solver.to_string(),
            100.0 * s.mean_relative_error,
            100.0 * s.max_relative_error,
            s.mean_iterations,
            s.max_iterations,
            s.mean_scheduled
        );
    }
    Ok(())
}
