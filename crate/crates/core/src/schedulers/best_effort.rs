//! Best-effort baselines: walk devices in a sorted order and schedule them
//! until the next one no longer fits the remaining bandwidth.

use rand::seq::index::sample;
use rand::Rng;

use super::{ProblemInstance, SolveReport, SolverKind};
use crate::error::{Error, Result};

fn check_keys(instance: &ProblemInstance, keys: &[f64], what: &str) -> Result<()> {
    if keys.len() != instance.num_devices() {
        return Err(Error::domain(format!(
            "{} {what} values for {} devices",
            keys.len(),
            instance.num_devices()
        )));
    }
    Ok(())
}

/// Sorts `candidates` by `keys` descending, lowest index first on ties.
fn descending(mut candidates: Vec<usize>, keys: &[f64]) -> Vec<usize> {
    candidates.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
    candidates
}

fn fill(instance: &ProblemInstance, order: &[usize], solver: SolverKind) -> Result<SolveReport> {
    let mut members = Vec::new();
    let mut used = 0.0;
    let mut iterations = 0;
    for &v in order {
        if !instance.is_feasible(v) {
            continue;
        }
        iterations += 1;
        let next = used + instance.bandwidth(v);
        if next > instance.total_bandwidth {
            break;
        }
        used = next;
        members.push(v);
    }
    SolveReport::new(members, instance, iterations, 1, solver)
}

/// Best channel: highest average channel gain first.
pub fn best_channel(instance: &ProblemInstance, gains: &[f64]) -> Result<SolveReport> {
    check_keys(instance, gains, "gain")?;
    let order = descending((0..instance.num_devices()).collect(), gains);
    fill(instance, &order, SolverKind::Bc)
}

/// Best norm: largest local update norm first.
pub fn best_norm(instance: &ProblemInstance, norms: &[f64]) -> Result<SolveReport> {
    check_keys(instance, norms, "gradient norm")?;
    let order = descending((0..instance.num_devices()).collect(), norms);
    fill(instance, &order, SolverKind::Bn)
}

/// Power of choice: sample `subset_size` devices uniformly without
/// replacement, then fill by accumulated loss, highest first.
pub fn power_of_choice<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    losses: &[f64],
    subset_size: usize,
    rng: &mut R,
) -> Result<SolveReport> {
    check_keys(instance, losses, "loss")?;
    let v = instance.num_devices();
    if subset_size == 0 || subset_size > v {
        return Err(Error::domain(format!(
            "power-of-choice sample size must be in 1..={v}, got {subset_size}"
        )));
    }
    let picked = sample(rng, v, subset_size).into_vec();
    let order = descending(picked, losses);
    fill(instance, &order, SolverKind::Poc)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_gains_all_fit() {
        let inst = four_device_example(1.0, 10.0);
        let report = best_channel(&inst, &[1.0; 4]).unwrap();
        assert_eq!(report.schedule.members, vec![0, 1, 2, 3]);
    }

    #[test]
    fn exact_fit_takes_top_three() {
        let inst = four_device_example(1.0, 3.0);
        let report = best_channel(&inst, &[0.1, 0.9, 0.5, 0.7]).unwrap();
        assert_eq!(report.schedule.members, vec![1, 2, 3]);
        let report = best_norm(&inst, &[5.0, 1.0, 4.0, 3.0]).unwrap();
        assert_eq!(report.schedule.members, vec![0, 2, 3]);
    }

    #[test]
    fn stops_at_first_device_that_does_not_fit() {
        let mut inst = four_device_example(1.0, 3.0);
        inst.min_bandwidths = vec![Some(1.0), Some(2.5), Some(1.0), Some(0.5)];
        let report = best_channel(&inst, &[4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(report.schedule.members, vec![0]);
    }

    #[test]
    fn infeasible_devices_are_skipped() {
        let mut inst = four_device_example(1.0, 10.0);
        inst.min_bandwidths[1] = None;
        let report = best_channel(&inst, &[1.0, 9.0, 1.0, 1.0]).unwrap();
        assert_eq!(report.schedule.members, vec![0, 2, 3]);
    }

    #[test]
    fn key_length_is_checked() {
        let inst = four_device_example(1.0, 10.0);
        assert!(best_channel(&inst, &[1.0; 3]).is_err());
    }

    #[test]
    fn power_of_choice_contract() {
        let inst = four_device_example(1.0, 2.0);
        let losses = [0.3, 0.9, 0.1, 0.5];
        // Full sample degenerates to a deterministic sort.
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = power_of_choice(&inst, &losses, 4, &mut rng).unwrap();
            assert_eq!(report.schedule.members, vec![1, 3]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(power_of_choice(&inst, &losses, 1, &mut rng).unwrap().schedule.len(), 1);

        let a = power_of_choice(&inst, &losses, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = power_of_choice(&inst, &losses, 2, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(power_of_choice(&inst, &losses, 0, &mut rng).is_err());
        assert!(power_of_choice(&inst, &losses, 5, &mut rng).is_err());
    }
}
