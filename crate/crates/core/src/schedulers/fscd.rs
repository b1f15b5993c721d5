//! Fix-sum coordinate descent.

use super::{Evaluator, ProblemInstance, SolveReport, SolverKind, IMPROVEMENT_EPS};
use crate::error::Result;

/// Fix-sum coordinate descent.
///
/// For each schedule size `S`, from the largest size whose `S` cheapest
/// devices fit in the budget down to 1, start from those cheapest devices and
/// repeatedly apply the best single swap (one member out, one outsider in,
/// budget respected) while the objective strictly decreases. The loop stops
/// early once the local optimum `Π_S` satisfies
/// `W(Π_S) + σ/√(S·b) ≤ σ/√((S−1)·b)`: no smaller schedule can beat it.
pub fn fscd_schedule(instance: &ProblemInstance) -> Result<SolveReport> {
    run(instance, true).map(|(report, _)| report)
}

/// FSCD with the early exit optionally disabled; also returns the size at
/// which the exit fired.
fn run(instance: &ProblemInstance, early_exit: bool) -> Result<(SolveReport, Option<usize>)> {
    let mut eval = Evaluator::new(instance);
    let mut by_cost = instance.feasible_devices();
    by_cost.sort_by(|&a, &b| {
        instance
            .bandwidth(a)
            .total_cmp(&instance.bandwidth(b))
            .then(a.cmp(&b))
    });

    let mut max_size = 0;
    let mut cumulative = 0.0;
    for &v in &by_cost {
        cumulative += instance.bandwidth(v);
        if cumulative > instance.total_bandwidth {
            break;
        }
        max_size += 1;
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut iterations = 0;
    let mut exit_size = None;

    for size in (1..=max_size).rev() {
        let mut in_set = vec![false; instance.num_devices()];
        let mut sum = eval.zero_sum();
        let mut used = 0.0;
        for &v in &by_cost[..size] {
            in_set[v] = true;
            eval.add(&mut sum, v);
            used += instance.bandwidth(v);
        }
        let w0 = eval.wemd(&sum, size);
        let mut current = eval.value(w0, size);
        let mut current_wemd = w0;

        loop {
            iterations += 1;
            let mut best_swap: Option<(usize, usize, f64, f64)> = None;
            for out in (0..instance.num_devices()).filter(|&v| in_set[v]) {
                let freed = used - instance.bandwidth(out);
                for &inn in &by_cost {
                    if in_set[inn] || freed + instance.bandwidth(inn) > instance.total_bandwidth {
                        continue;
                    }
                    let w = eval.wemd_swapped(&sum, size, inn, Some(out));
                    let value = eval.value(w, size);
                    let better = match best_swap {
                        None => true,
                        Some((bo, bi, _, bv)) => {
                            value < bv || (value == bv && (out, inn) < (bo, bi))
                        }
                    };
                    if better {
                        best_swap = Some((out, inn, w, value));
                    }
                }
            }
            match best_swap {
                Some((out, inn, w, value)) if value < current - IMPROVEMENT_EPS => {
                    in_set[out] = false;
                    in_set[inn] = true;
                    eval.remove(&mut sum, out);
                    eval.add(&mut sum, inn);
                    used += instance.bandwidth(inn) - instance.bandwidth(out);
                    current = value;
                    current_wemd = w;
                }
                _ => break,
            }
        }

        if best.as_ref().is_none_or(|(b, _)| current < *b) {
            let members = (0..instance.num_devices()).filter(|&v| in_set[v]).collect();
            best = Some((current, members));
        }

        let smaller = eval.variance(size - 1);
        if early_exit && current_wemd + eval.variance(size) <= smaller {
            exit_size = Some(size);
            break;
        }
    }

    let members = best.map(|(_, m)| m).unwrap_or_default();
    let evaluations = eval.evaluations;
    let report = SolveReport::new(members, instance, iterations, evaluations, SolverKind::Fscd)?;
    Ok((report, exit_size))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::objective::{ClassDistribution, ObjectiveParams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_swaps_stall_before_the_complementary_pair() {
        // From the cheapest pair {0, 1}, reaching {2, 3} takes two swaps and
        // each single swap raises WEMD, so the local optimum is {0, 1}.
        let inst = four_device_example(0.0, 2.0);
        let report = fscd_schedule(&inst).unwrap();
        assert_eq!(report.schedule.members, vec![0, 1]);
        let exact = super::super::brute::brute_force(&inst).unwrap();
        assert_eq!(exact.schedule.members, vec![2, 3]);
        assert!(exact.schedule.objective_value.abs() < 1e-15);
    }

    #[test]
    fn swaps_into_the_complementary_pair() {
        // With device 1 gone, {0, 2} starts and one swap reaches {2, 3}.
        let mut inst = four_device_example(0.0, 2.0);
        inst.min_bandwidths[1] = None;
        let report = fscd_schedule(&inst).unwrap();
        assert_eq!(report.schedule.members, vec![2, 3]);
        assert!(report.schedule.objective_value.abs() < 1e-15);
    }

    #[test]
    fn identical_devices_fill_the_budget() {
        let dists = vec![ClassDistribution::uniform(3); 6];
        let inst = ProblemInstance::new(
            dists,
            vec![Some(1.0), Some(2.0), Some(1.5), Some(0.5), Some(3.0), None],
            ClassDistribution::uniform(3),
            ObjectiveParams::scalar(1.0, 8, 1.0, 3),
            5.0,
        )
        .unwrap();
        let report = fscd_schedule(&inst).unwrap();
        // Cheapest four: 0.5 + 1 + 1.5 + 2 = 5.
        assert_eq!(report.schedule.members, vec![0, 1, 2, 3]);
    }

    #[test]
    fn nothing_fits() {
        let mut inst = four_device_example(1.0, 0.5);
        inst.min_bandwidths = vec![Some(1.0); 4];
        let report = fscd_schedule(&inst).unwrap();
        assert!(report.no_feasible_device);
    }

    #[test]
    fn early_exit_fires_on_random_instances() {
        let fired = (0..200u64)
            .filter(|&seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut inst = random_instance(&mut rng, 10, 3);
                inst.params.sigma = rng.random_range(0.0..3.0);
                run(&inst, true).unwrap().1.is_some()
            })
            .count();
        assert!(fired > 20, "{fired}");
    }

    proptest! {
        #[test]
        fn early_exit_never_discards_the_optimum(seed in any::<u64>(), v in 2usize..11, c in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut inst = random_instance(&mut rng, v, c);
            inst.params.sigma = rng.random_range(0.0..3.0);
            let (with_exit, fired) = run(&inst, true).unwrap();
            let (without, _) = run(&inst, false).unwrap();
            let a = with_exit.schedule.objective_value;
            let b = without.schedule.objective_value;
            prop_assert!(a == b || (a - b).abs() <= 1e-12, "{a} vs {b}");
            if let Some(size) = fired {
                let exact = super::super::brute::brute_force(&inst).unwrap().schedule;
                prop_assert!(exact.len() >= size || (exact.objective_value - a).abs() <= 1e-12);
            }
        }
    }
}
