//! Solver accuracy against the exhaustive oracle on channel-derived
//! instances.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::placement::{snapshot_channel, Fleet};
use crate::channel::ChannelParams;
use crate::datagen::sample_dirichlet;
use crate::error::{Error, Result};
use crate::objective::{ClassDistribution, ObjectiveParams};
use crate::rng::{stream, stream_seed, Stream};
use crate::schedulers::{solve, ProblemInstance, SideInfo, SolverKind, MAX_BRUTE_FORCE_DEVICES};

/// Below this oracle value the error is reported in absolute terms.
pub const ZERO_OPTIMUM: f64 = 1e-9;

/// Solvers compared against the oracle.
pub const BENCH_SOLVERS: [SolverKind; 5] = [
    SolverKind::Gs,
    SolverKind::Fscd,
    SolverKind::Cd,
    SolverKind::Bc,
    SolverKind::Oracle,
];

/// Knobs of the instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub num_classes: usize,
    pub batch: usize,
    /// Dirichlet concentration is drawn log-uniformly from this range.
    pub alpha_range: (f64, f64),
    /// σ is drawn uniformly from this range.
    pub sigma_range: (f64, f64),
    /// Shared class weight G.
    pub g: f64,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            num_classes: 10,
            batch: 16,
            alpha_range: (0.1, 10.0),
            sigma_range: (2.0, 8.0),
            g: 1.0,
        }
    }
}

/// Instance `index` of size `devices`: a fresh placement with shadowing,
/// Dirichlet label mixes around a uniform global mix, and random σ.
pub fn bench_instance(
    devices: usize,
    index: usize,
    seed: u64,
    channel: &ChannelParams,
    settings: &BenchSettings,
) -> Result<(ProblemInstance, SideInfo)> {
    let key = stream_seed(seed, Stream::Bench, devices as u64, index as u64);
    let fleet = Fleet::place(devices, channel, key)?;
    let links = snapshot_channel(&fleet, channel, 0, key)?;

    let mut rng = stream(key, Stream::Partition, 0, 0);
    let global = ClassDistribution::uniform(settings.num_classes);
    let (lo, hi) = settings.alpha_range;
    let alpha = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
    let concentration: Vec<f64> = global.probs().iter().map(|p| alpha * p).collect();
    let dists = (0..devices)
        .map(|_| ClassDistribution::new(sample_dirichlet(&concentration, &mut rng)?))
        .collect::<Result<Vec<_>>>()?;
    let (s_lo, s_hi) = settings.sigma_range;
    let sigma = rng.random_range(s_lo..=s_hi);

    let instance = ProblemInstance::new(
        dists,
        links.iter().map(|l| l.min_bandwidth.hz()).collect(),
        global,
        ObjectiveParams::scalar(sigma, settings.batch, settings.g, settings.num_classes),
        channel.total_bandwidth_hz,
    )?;
    let side = SideInfo {
        gains: Some(links.iter().map(|l| l.avg_gain).collect()),
        ..Default::default()
    };
    Ok((instance, side))
}

/// `(solver − oracle) / oracle`, or the plain difference when the oracle
/// value is (near) zero.
pub fn relative_error(solver: f64, oracle: f64) -> f64 {
    let gap = (solver - oracle).max(0.0);
    if oracle < ZERO_OPTIMUM {
        gap
    } else {
        gap / oracle
    }
}

/// Aggregates of one solver at one fleet size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub solver: SolverKind,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub mean_evaluations: f64,
    pub mean_scheduled: f64,
    /// Schedules that broke the budget or used an infeasible device.
    pub infeasible_schedules: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub devices: usize,
    /// Instances with at least one feasible device; only these are scored.
    pub instances: usize,
    pub skipped_instances: usize,
    pub solvers: Vec<SolverStats>,
}

/// Benchmark outcome for every fleet size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub instances_per_size: usize,
    pub settings: BenchSettings,
    pub sizes: Vec<SizeReport>,
}

impl BenchReport {
    pub fn stats(&self, devices: usize, solver: SolverKind) -> Option<&SolverStats> {
        self.sizes
            .iter()
            .find(|s| s.devices == devices)?
            .solvers
            .iter()
            .find(|s| s.solver == solver)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

struct Outcome {
    rel: f64,
    iterations: usize,
    evaluations: usize,
    scheduled: usize,
    feasible: bool,
}

/// Runs every benchmark solver on `instances` instances per size.
pub fn bench_solvers(
    sizes: &[usize],
    instances: usize,
    seed: u64,
    channel: &ChannelParams,
    settings: &BenchSettings,
) -> Result<BenchReport> {
    if let Some(&v) = sizes.iter().find(|&&v| v == 0 || v > MAX_BRUTE_FORCE_DEVICES) {
        return Err(Error::config(format!(
            "benchmark sizes must lie in 1..={MAX_BRUTE_FORCE_DEVICES}, got {v}"
        )));
    }
    let mut reports = Vec::with_capacity(sizes.len());
    for &v in sizes {
        let per_instance: Vec<Option<Vec<Outcome>>> = (0..instances)
            .into_par_iter()
            .map(|i| -> Result<_> {
                let (inst, side) = bench_instance(v, i, seed, channel, settings)?;
                let solver_seed = stream_seed(seed, Stream::Solver, v as u64, i as u64);
                let reports = BENCH_SOLVERS
                    .iter()
                    .map(|&k| solve(k, &inst, &side, &mut stream(solver_seed, Stream::Solver, 0, 0)))
                    .collect::<Result<Vec<_>>>()?;
                let oracle = reports.last().expect("oracle runs last");
                if oracle.no_feasible_device {
                    return Ok(None);
                }
                let best = oracle.schedule.objective_value;
                Ok(Some(
                    reports
                        .iter()
                        .map(|r| Outcome {
                            rel: relative_error(r.schedule.objective_value, best),
                            iterations: r.iterations,
                            evaluations: r.evaluations,
                            scheduled: r.schedule.len(),
                            feasible: r.schedule.is_feasible_for(&inst),
                        })
                        .collect(),
                ))
            })
            .collect::<Result<_>>()?;

        let scored: Vec<&Vec<Outcome>> = per_instance.iter().flatten().collect();
        let n = scored.len().max(1) as f64;
        let solvers = BENCH_SOLVERS
            .iter()
            .enumerate()
            .map(|(k, &solver)| {
                let col = || scored.iter().map(move |o| &o[k]);
                SolverStats {
                    solver,
                    mean_relative_error: col().map(|o| o.rel).sum::<f64>() / n,
                    max_relative_error: col().map(|o| o.rel).fold(0.0, f64::max),
                    mean_iterations: col().map(|o| o.iterations as f64).sum::<f64>() / n,
                    max_iterations: col().map(|o| o.iterations).max().unwrap_or(0),
                    mean_evaluations: col().map(|o| o.evaluations as f64).sum::<f64>() / n,
                    mean_scheduled: col().map(|o| o.scheduled as f64).sum::<f64>() / n,
                    infeasible_schedules: col().filter(|o| !o.feasible).count(),
                }
            })
            .collect();
        reports.push(SizeReport {
            devices: v,
            instances: scored.len(),
            skipped_instances: instances - scored.len(),
            solvers,
        });
    }
    Ok(BenchReport {
        seed,
        instances_per_size: instances,
        settings: settings.clone(),
        sizes: reports,
    })
}
