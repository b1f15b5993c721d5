use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use fedcgd::channel::ChannelParams;
use fedcgd::experiment::{bench_solvers, export_dataset, run_experiment, write_outputs, BenchSettings, ExperimentConfig};
use fedcgd::fltrain::GMode;
use fedcgd::rng::{stream, Stream};
use fedcgd::schedulers::{solve, InstanceDocument, SolverKind};

/// Default output directory when a command is not given one.
const OUT_DIR_ENV: &str = "FEDCGD_OUT_DIR";

#[derive(Parser)]
#[command(name = "fedcgd", version, about = "Wireless federated-learning scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scheduling instance and print the schedule as JSON.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "fscd")]
        solver: SolverKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare solvers against the exhaustive oracle.
    BenchSolvers {
        #[arg(long, value_delimiter = ',', default_value = "8,16")]
        devices: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; defaults to `bench.json` in the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a training experiment.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `solver.name`.
        #[arg(long)]
        solver: Option<SolverKind>,
        /// Overrides `solver.g_mode`.
        #[arg(long)]
        g_mode: Option<GMode>,
    },
    /// Generate and partition a dataset.
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed; defaults to the first seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Serialize)]
struct SolveOutput {
    solver: SolverKind,
    /// 0-based device indices.
    members: Vec<usize>,
    /// `null` when no device is feasible.
    objective: f64,
    bandwidth_used_hz: f64,
    iterations: usize,
    evaluations: usize,
    no_feasible_device: bool,
}

fn out_dir(explicit: Option<PathBuf>, fallback: &str) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("output serializes"));
}

fn run(command: Command) -> fedcgd::Result<()> {
    match command {
        Command::Solve { instance, solver, seed } => {
            let doc = InstanceDocument::load(&instance)?;
            let side = doc.side_info();
            let inst = doc.into_instance()?;
            let report = solve(solver, &inst, &side, &mut stream(seed, Stream::Solver, 0, 0))?;
            print_json(&SolveOutput {
                solver,
                members: report.schedule.members,
                objective: report.schedule.objective_value,
                bandwidth_used_hz: report.schedule.bandwidth_used,
                iterations: report.iterations,
                evaluations: report.evaluations,
                no_feasible_device: report.no_feasible_device,
            });
        }
        Command::BenchSolvers { devices, instances, seed, out } => {
            let path = out.unwrap_or_else(|| out_dir(None, "out").join("bench.json"));
            let report = bench_solvers(&devices, instances, seed, &ChannelParams::default(), &BenchSettings::default())?;
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| fedcgd::Error::Io { path: parent.into(), source: e })?;
            }
            report.write_json(&path)?;
            print_json(&report);
        }
        Command::Train { config, out, solver, g_mode } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = solver {
                cfg.solver.name = s;
            }
            if let Some(g) = g_mode {
                cfg.solver.g_mode = g;
            }
            cfg.validate()?;
            let dir = out.or_else(|| cfg.output.clone());
            let dir = out_dir(dir, "out");
            let result = run_experiment(&cfg)?;
            let (metrics, summary) = write_outputs(&result, &dir)?;
            eprintln!("wrote {} and {}", metrics.display(), summary.display());
            print_json(&result.summary);
        }
        Command::GenData { config, out, seed } => {
            let cfg = ExperimentConfig::load(&config)?;
            let seed = seed.unwrap_or(cfg.seeds[0]);
            let dir = out_dir(out, "data");
            let manifest = export_dataset(&cfg, seed, Path::new(&dir))?;
            eprintln!("wrote dataset to {}", dir.display());
            print_json(&manifest);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
