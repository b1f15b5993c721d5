//! Greedy scheduling.

use super::{Evaluator, ProblemInstance, SolveReport, SolverKind, IMPROVEMENT_EPS};
use crate::error::Result;

/// Greedy scheduling from the empty set.
///
/// Each pass picks the device, among those still fitting the remaining
/// bandwidth, whose addition lowers the group's WEMD the most (lowest index
/// on ties). The device is kept only if the objective, WEMD plus sampling
/// variance, strictly decreases; the first feasible device always is, since
/// the empty schedule scores `+∞`.
pub fn greedy_schedule(instance: &ProblemInstance) -> Result<SolveReport> {
    let mut eval = Evaluator::new(instance);
    let mut in_set = vec![false; instance.num_devices()];
    let mut members = Vec::new();
    let mut sum = eval.zero_sum();
    let mut used = 0.0;
    let mut current = f64::INFINITY;
    let mut iterations = 0;

    loop {
        let n = members.len() + 1;
        let mut best: Option<(usize, f64)> = None;
        for v in instance.feasible_devices() {
            if in_set[v] || used + instance.bandwidth(v) > instance.total_bandwidth {
                continue;
            }
            let w = eval.wemd_swapped(&sum, n, v, None);
            if best.is_none_or(|(_, bw)| w < bw) {
                best = Some((v, w));
            }
        }
        let Some((v, w)) = best else { break };
        iterations += 1;
        let candidate = eval.value(w, n);
        if !(candidate < current - IMPROVEMENT_EPS) {
            break;
        }
        in_set[v] = true;
        members.push(v);
        eval.add(&mut sum, v);
        used += instance.bandwidth(v);
        current = candidate;
    }

    let evaluations = eval.evaluations;
    SolveReport::new(members, instance, iterations, evaluations, SolverKind::Gs)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::objective::{self, ObjectiveParams};

    #[test]
    fn stops_at_the_near_global_pair_without_sigma() {
        // Device 0 alone has the smallest WEMD; device 1 adds nothing and
        // the complementary devices 2 and 3 each make the mix worse.
        let inst = four_device_example(0.0, 10.0);
        let report = greedy_schedule(&inst).unwrap();
        assert_eq!(report.schedule.members, vec![0]);
        let first_two = objective::objective(&[0, 1], &inst).unwrap();
        assert!(report.schedule.objective_value <= first_two + 1e-12);
        assert!(report.iterations <= inst.num_devices());
    }

    #[test]
    fn variance_pulls_in_more_devices() {
        let inst = four_device_example(1.0, 10.0);
        let report = greedy_schedule(&inst).unwrap();
        assert!(report.schedule.len() >= 2, "{:?}", report.schedule.members);
    }

    #[test]
    fn single_feasible_device() {
        let mut inst = four_device_example(0.5, 10.0);
        inst.min_bandwidths = vec![None, None, Some(1.0), None];
        let report = greedy_schedule(&inst).unwrap();
        assert_eq!(report.schedule.members, vec![2]);
    }

    #[test]
    fn no_feasible_device_gives_flagged_empty_schedule() {
        let mut inst = four_device_example(0.5, 10.0);
        inst.min_bandwidths = vec![None; 4];
        let report = greedy_schedule(&inst).unwrap();
        assert!(report.no_feasible_device);
        assert_eq!(report.schedule.objective_value, f64::INFINITY);
    }

    #[test]
    fn respects_budget() {
        let mut inst = four_device_example(5.0, 2.5);
        inst.params = ObjectiveParams::scalar(5.0, 32, 1.0, 2);
        let report = greedy_schedule(&inst).unwrap();
        assert!(report.schedule.bandwidth_used <= 2.5);
        assert_eq!(report.schedule.len(), 2);
    }
}
