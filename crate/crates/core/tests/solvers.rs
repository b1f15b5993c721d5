use fedcgd::objective::{self, ClassDistribution, ObjectiveParams};
use fedcgd::schedulers::{brute_force, solve, ProblemInstance, SideInfo, SolverKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Case {
    instance: ProblemInstance,
    side: SideInfo,
}

fn random_case(seed: u64, v: usize, c: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists = (0..v)
        .map(|_| {
            let raw: Vec<f64> = (0..c).map(|_| rng.random::<f64>().powi(3) + 1e-6).collect();
            let total: f64 = raw.iter().sum();
            ClassDistribution::new(raw.iter().map(|x| x / total).collect()).unwrap()
        })
        .collect();
    let bandwidths: Vec<Option<f64>> = (0..v)
        .map(|_| rng.random_bool(0.9).then(|| rng.random_range(0.2..2.0)))
        .collect();
    let weights = (0..c).map(|_| rng.random_range(0.2..2.0)).collect();
    let instance = ProblemInstance::new(
        dists,
        bandwidths,
        ClassDistribution::uniform(c),
        ObjectiveParams {
            sigma: rng.random_range(0.0..4.0),
            batch_size: 16,
            class_weights: weights,
        },
        rng.random_range(0.5..(v as f64 + 0.5)),
    )
    .unwrap();
    let mut key = || (0..v).map(|_| rng.random::<f64>()).collect::<Vec<f64>>();
    let side = SideInfo {
        gains: Some(key()),
        grad_norms: Some(key()),
        losses: Some(key()),
        poc_subset: None,
    };
    Case { instance, side }
}

fn run(kind: SolverKind, case: &Case, seed: u64) -> fedcgd::schedulers::SolveReport {
    solve(kind, &case.instance, &case.side, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_is_never_beaten(seed in any::<u64>(), v in 1usize..11, c in 2usize..6) {
        let case = random_case(seed, v, c);
        let best = brute_force(&case.instance).unwrap().schedule.objective_value;
        for kind in SolverKind::ALL {
            let got = run(kind, &case, seed).schedule.objective_value;
            prop_assert!(got >= best - 1e-12 || (got.is_infinite() && best.is_infinite()), "{kind}: {got} < {best}");
        }
    }

    #[test]
    fn schedules_respect_the_budget(seed in any::<u64>(), v in 1usize..16, c in 2usize..6) {
        let case = random_case(seed, v, c);
        let inst = &case.instance;
        for kind in SolverKind::ALL.into_iter().filter(|&k| k != SolverKind::Oracle || v <= 12) {
            let report = run(kind, &case, seed);
            let members = &report.schedule.members;
            prop_assert!(members.windows(2).all(|w| w[0] < w[1]), "{kind}: {members:?}");
            prop_assert!(members.iter().all(|&m| inst.is_feasible(m)), "{kind}");
            let used: f64 = members.iter().map(|&m| inst.min_bandwidths[m].unwrap()).sum();
            prop_assert!(used <= inst.total_bandwidth + 1e-9, "{kind}");
            prop_assert!((used - report.schedule.bandwidth_used).abs() <= 1e-9);
            prop_assert_eq!(report.no_feasible_device, members.is_empty());
            if !members.is_empty() {
                let direct = objective::objective(members, inst).unwrap();
                prop_assert!((direct - report.schedule.objective_value).abs() <= 1e-9 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn same_seed_same_schedule(seed in any::<u64>(), v in 1usize..12) {
        let case = random_case(seed, v, 3);
        for kind in SolverKind::ALL {
            prop_assert_eq!(run(kind, &case, seed), run(kind, &case, seed));
        }
    }

    #[test]
    fn objective_solvers_schedule_whenever_a_device_fits(seed in any::<u64>(), v in 1usize..12) {
        let case = random_case(seed, v, 3);
        let inst = &case.instance;
        let fits = inst
            .feasible_devices()
            .iter()
            .any(|&d| inst.min_bandwidths[d].unwrap() <= inst.total_bandwidth);
        // Best-effort fills stop at the first device that does not fit, so
        // only the objective solvers are held to this.
        for kind in SolverKind::ALL.into_iter().filter(|k| k.uses_objective()) {
            prop_assert_eq!(run(kind, &case, seed).schedule.is_empty(), !fits, "{}", kind);
        }
    }
}

#[test]
fn objective_solvers_agree_on_a_trivial_instance() {
    let instance = ProblemInstance::new(
        vec![ClassDistribution::uniform(4); 5],
        vec![Some(1.0); 5],
        ClassDistribution::uniform(4),
        ObjectiveParams::scalar(1.0, 8, 1.0, 4),
        10.0,
    )
    .unwrap();
    let case = Case {
        instance,
        side: SideInfo::default(),
    };
    for kind in [SolverKind::Gs, SolverKind::Fscd, SolverKind::Cd, SolverKind::Oracle] {
        assert_eq!(run(kind, &case, 0).schedule.members, vec![0, 1, 2, 3, 4], "{kind}");
    }
}
