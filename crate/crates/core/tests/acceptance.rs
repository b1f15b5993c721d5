//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::time::{Duration, Instant};

use fedcgd::channel::{transmission_rate, upload_latency, ChannelParams, LinkState, MinBandwidth};
use fedcgd::datagen::{dirichlet_partition, gen_synthetic, TaskConfig};
use fedcgd::experiment::{
    bench_solvers, run_experiment, write_metrics_csv, BenchSettings, ExperimentConfig, PartitionConfig,
};
use fedcgd::fltrain::estimate::sigma_from_grads;
use fedcgd::fltrain::local::draw_batch;
use fedcgd::fltrain::model::per_sample_grads;
use fedcgd::fltrain::{combine_sigma, loss_and_grad, mean_loss, ModelParams};
use fedcgd::objective::{group_distribution, wemd};
use fedcgd::schedulers::{brute_force, reduce_partition, SolverKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn solver_quality() -> (Verdict, Verdict) {
    let start = Instant::now();
    let report = bench_solvers(&[16], 100, 0, &ChannelParams::default(), &BenchSettings::default())
        .expect("benchmark runs");
    let elapsed = start.elapsed();
    let size = &report.sizes[0];
    let stats = |k| report.stats(16, k).expect("solver benchmarked");
    let (fscd, gs, cd) = (stats(SolverKind::Fscd), stats(SolverKind::Gs), stats(SolverKind::Cd));
    let infeasible: usize = size.solvers.iter().map(|s| s.infeasible_schedules).sum();
    let quality = verdict(
        fscd.mean_relative_error <= 0.01
            && gs.mean_relative_error <= 0.08
            && infeasible == 0
            && size.instances == 100
            && elapsed < Duration::from_secs(60),
        format!(
            "V=16, {} instances: FSCD {:.3}%, GS {:.3}%, CD {:.3}% mean relative error; {} infeasible schedules; {:.1} s",
            size.instances,
            100.0 * fscd.mean_relative_error,
            100.0 * gs.mean_relative_error,
            100.0 * cd.mean_relative_error,
            infeasible,
            elapsed.as_secs_f64()
        ),
    );
    let iterations = verdict(
        gs.max_iterations <= 16,
        format!("GS max iterations {} over {} instances (V=16)", gs.max_iterations, size.instances),
    );
    (quality, iterations)
}

fn lambert_bandwidth() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut feasible, mut flagged, mut worst) = (0usize, 0usize, 0.0f64);
    let mut misflagged = 0usize;
    while feasible < 1000 {
        let params = ChannelParams {
            model_bits: 10f64.powf(rng.random_range(5.0..9.0)),
            deadline_s: rng.random_range(0.1..5.0),
            ..ChannelParams::default()
        };
        let d = rng.random_range(1.0..params.cell_radius_m);
        let is_los = rng.random_bool(0.5);
        let shadow = Normal::new(0.0, params.shadow_std_db(is_los)).unwrap().sample(&mut rng);
        let link = LinkState::new(d, is_los, shadow, &params).expect("valid link");
        let gamma = params.gamma(link.avg_gain);
        match link.min_bandwidth {
            MinBandwidth::Hz(b) => {
                if gamma >= 1.0 {
                    misflagged += 1;
                }
                let rate = transmission_rate(b, link.avg_gain, &params).unwrap();
                let latency = upload_latency(params.model_bits, rate).unwrap();
                worst = worst.max((latency - params.deadline_s).abs() / params.deadline_s);
                feasible += 1;
            }
            MinBandwidth::Infeasible => {
                if gamma < 1.0 {
                    misflagged += 1;
                }
                flagged += 1;
            }
        }
    }
    verdict(
        worst <= 1e-9 && misflagged == 0 && flagged > 0,
        format!(
            "{feasible} feasible links, worst latency error {worst:.2e} relative; {flagged} links with Γ ≥ 1 flagged, {misflagged} misclassified"
        ),
    )
}

fn subset_sum_of_size(ints: &[u64], s: usize) -> bool {
    let total: u64 = ints.iter().sum();
    (0u32..1 << ints.len()).any(|mask| {
        mask.count_ones() as usize == s
            && 2 * ints
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, r)| r)
                .sum::<u64>()
                == total
    })
}

fn partition_reduction() -> Verdict {
    // Random sets, kept until half of them admit a size-s partition.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut yes, mut no, mut agree) = (0, 0, 0);
    while yes + no < 20 {
        let n: usize = rng.random_range(2..=12);
        let ints: Vec<u64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
        let s = rng.random_range(1..=n.div_ceil(2));
        let exists = subset_sum_of_size(&ints, s);
        if (exists && yes == 10) || (!exists && no == 10) {
            continue;
        }
        let instance = reduce_partition(&ints, s).expect("reduction");
        let report = brute_force(&instance).expect("oracle");
        let group = group_distribution(&report.schedule.members, &instance.device_dists).unwrap();
        let zero = wemd(&group, &instance.global_dist, &instance.params.class_weights).unwrap() < 1e-9;
        if exists {
            yes += 1;
        } else {
            no += 1;
        }
        agree += (zero == exists) as usize;
    }
    verdict(
        agree == 20,
        format!("{agree}/20 random sets agree ({yes} with a size-s partition, {no} without)"),
    )
}

fn sampling_variance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let task = TaskConfig::default().build(&mut rng).unwrap();
    let (train, _) = gen_synthetic(&task, &mut rng).unwrap();
    let part = dirichlet_partition(&train, 16, 1.0, None, &mut rng).unwrap();
    let mut model = ModelParams::zeros(task.num_classes, task.feature_dim);
    let normal = Normal::new(0.0, 0.3).unwrap();
    model.weights.iter_mut().for_each(|w| *w = normal.sample(&mut rng));

    let mut lines = Vec::new();
    let mut pass = true;
    for (n, b) in [(2, 8), (4, 16), (8, 32)] {
        let devices = &part.devices[..n];
        let full: Vec<ModelParams> = devices
            .iter()
            .map(|d| {
                let all: Vec<usize> = (0..d.size()).collect();
                loss_and_grad(&model, &d.samples, &all).unwrap().1
            })
            .collect();
        let sigmas: Vec<f64> = devices
            .iter()
            .map(|d| {
                let all: Vec<usize> = (0..d.size()).collect();
                sigma_from_grads(&per_sample_grads(&model, &d.samples, &all).unwrap().1)
            })
            .collect();
        let alpha = vec![1.0 / n as f64; n];
        let bound = combine_sigma(&sigmas, &alpha) / ((n * b) as f64).sqrt();
        let reps = 1000;
        let mut total = 0.0;
        for _ in 0..reps {
            let mut gap = ModelParams::zeros(task.num_classes, task.feature_dim);
            for ((d, g_full), a) in devices.iter().zip(&full).zip(&alpha) {
                let batch = draw_batch(d.size(), b, &mut rng);
                let (_, g) = loss_and_grad(&model, &d.samples, &batch).unwrap();
                gap.add_scaled(*a, &g.sub(g_full));
            }
            total += gap.norm();
        }
        let mean = total / reps as f64;
        pass &= mean <= 1.05 * bound;
        lines.push(format!("(n={n}, b={b}) {mean:.4} vs {bound:.4}"));
    }
    verdict(pass, format!("mean divergence vs σ̂/√(nb): {}", lines.join("; ")))
}

fn gradient_check() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let task = TaskConfig {
        num_classes: 5,
        feature_dim: 6,
        train_per_class: 8,
        test_per_class: 1,
        ..TaskConfig::default()
    }
    .build(&mut rng)
    .unwrap();
    let (data, _) = gen_synthetic(&task, &mut rng).unwrap();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let mut model = ModelParams::zeros(task.num_classes, task.feature_dim);
        model.weights.iter_mut().for_each(|w| *w = rng.random_range(-1.0..1.0));
        let all: Vec<usize> = (0..data.len()).collect();
        let (_, grad) = loss_and_grad(&model, &data, &all).unwrap();
        let mut numeric = grad.clone();
        for k in 0..model.len() {
            let mut plus = model.clone();
            plus.weights[k] += h;
            let mut minus = model.clone();
            minus.weights[k] -= h;
            numeric.weights[k] = (mean_loss(&plus, &data).unwrap() - mean_loss(&minus, &data).unwrap()) / (2.0 * h);
        }
        let err = grad.sub(&numeric).norm() / grad.norm().max(numeric.norm());
        worst = worst.max(err);
    }
    verdict(worst <= 1e-4, format!("max relative error {worst:.2e} over 50 random points"))
}

fn compare(cfg: &ExperimentConfig) -> (fedcgd::experiment::ExperimentSummary, fedcgd::experiment::ExperimentSummary) {
    let run = |kind| {
        let mut c = cfg.clone();
        c.solver.name = kind;
        run_experiment(&c).expect("experiment runs").summary
    };
    (run(SolverKind::Fscd), run(SolverKind::Bc))
}

fn imbalance_trend() -> Verdict {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.fleet.devices = 32;
    cfg.seeds = (0..10).collect();
    cfg.data.partition = PartitionConfig::SortAndPartition {
        shards_per_device: 1,
        imbalance_ratio: 9.0,
    };
    let (fscd, bc) = compare(&cfg);
    let wins = fscd
        .trials
        .iter()
        .zip(&bc.trials)
        .filter(|(a, b)| a.final_accuracy > b.final_accuracy)
        .count();
    let elapsed = start.elapsed();
    verdict(
        fscd.mean_final_accuracy >= bc.mean_final_accuracy
            && wins >= 8
            && fscd.mean_scheduled <= bc.mean_scheduled
            && elapsed < Duration::from_secs(600),
        format!(
            "r=9, V=32, 10 seeds: accuracy FSCD {:.4} vs BC {:.4}, FSCD wins {wins}/10, scheduled {:.2} vs {:.2}; {:.1} s",
            fscd.mean_final_accuracy,
            bc.mean_final_accuracy,
            fscd.mean_scheduled,
            bc.mean_scheduled,
            elapsed.as_secs_f64()
        ),
    )
}

fn adaptivity_trend() -> Verdict {
    let at = |alpha| {
        let mut cfg = ExperimentConfig::default();
        cfg.fleet.devices = 64;
        cfg.seeds = (0..10).collect();
        cfg.data.partition = PartitionConfig::Dirichlet {
            alpha,
            samples_per_device: None,
        };
        compare(&cfg)
    };
    let (fscd_skewed, bc_skewed) = at(0.1);
    let (fscd_mixed, bc_mixed) = at(10.0);
    let bc_gap = (bc_mixed.mean_scheduled - bc_skewed.mean_scheduled).abs() / bc_skewed.mean_scheduled;
    verdict(
        fscd_mixed.mean_scheduled > fscd_skewed.mean_scheduled && bc_gap < 0.10,
        format!(
            "V=64, 10 seeds: FSCD scheduled {:.2} at α=10 vs {:.2} at α=0.1; BC {:.2} vs {:.2} ({:.1}% apart)",
            fscd_mixed.mean_scheduled,
            fscd_skewed.mean_scheduled,
            bc_mixed.mean_scheduled,
            bc_skewed.mean_scheduled,
            100.0 * bc_gap
        ),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::default();
    cfg.seeds = vec![0, 1, 2];
    cfg.hyper.rounds = 15;
    let mut identical = 0;
    let kinds = [SolverKind::Fscd, SolverKind::Cd, SolverKind::Poc];
    for kind in kinds {
        cfg.solver.name = kind;
        let bytes: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let path = dir.path().join(format!("{kind}-{i}.csv"));
                write_metrics_csv(&run_experiment(&cfg).unwrap().trials, &path).unwrap();
                std::fs::read(&path).unwrap()
            })
            .collect();
        identical += (bytes[0] == bytes[1] && !bytes[0].is_empty()) as usize;
    }
    verdict(
        identical == kinds.len(),
        format!("{identical}/{} solver configs gave byte-identical metric CSVs across two runs", kinds.len()),
    )
}

fn main() {
    let (c1, c2) = solver_quality();
    let results = [
        ("1 solver quality vs oracle", c1),
        ("2 GS iteration bound", c2),
        ("3 Lambert-W minimum bandwidth", lambert_bandwidth()),
        ("4 partition reduction soundness", partition_reduction()),
        ("5 sampling variance bound", sampling_variance()),
        ("6 gradient check", gradient_check()),
        ("7 imbalance trend", imbalance_trend()),
        ("8 adaptivity trend", adaptivity_trend()),
        ("9 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += (!v.pass) as usize;
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
