//! Reduction from the size-constrained partition problem to scheduling.
//!
//! With one class, device "shares" set to the integers, a global share of
//! `r_sum/(2s)` and every device costing a `1/s` slice of the budget, a
//! large enough `σ/(√b·G)` forces every optimal schedule to use exactly `s`
//! devices. Its WEMD term then vanishes iff some `s` integers sum to
//! `r_sum/2`.

use super::ProblemInstance;
use crate::error::{Error, Result};
use crate::objective::{ClassDistribution, ObjectiveParams};

/// Builds the scheduling instance encoding "do `s` of `integers` sum to
/// half the total?".
pub fn reduce_partition(integers: &[u64], s: usize) -> Result<ProblemInstance> {
    let n = integers.len();
    if n == 0 {
        return Err(Error::domain("partition needs at least one integer"));
    }
    if integers.contains(&0) {
        return Err(Error::domain("partition integers must be positive"));
    }
    if s == 0 || s > n.div_ceil(2) {
        return Err(Error::domain(format!(
            "subset size must be in 1..={}, got {s}",
            n.div_ceil(2)
        )));
    }
    let total: u64 = integers.iter().sum();
    let target_share = total as f64 / (2.0 * s as f64);

    // σ/(√b·G)·(1/√(s−1) − 1/√s) ≥ r_sum/(2s) with G = b = 1, plus 1% margin.
    // For s = 1 every non-empty schedule has exactly one member anyway.
    let sigma = if s == 1 {
        1.0
    } else {
        let gap = 1.0 / ((s - 1) as f64).sqrt() - 1.0 / (s as f64).sqrt();
        1.01 * target_share / gap
    };

    let dists = integers
        .iter()
        .map(|&r| ClassDistribution::unnormalized(vec![r as f64]))
        .collect::<Result<Vec<_>>>()?;
    ProblemInstance::new(
        dists,
        vec![Some(1.0); n],
        ClassDistribution::unnormalized(vec![target_share])?,
        ObjectiveParams {
            sigma,
            batch_size: 1,
            class_weights: vec![1.0],
        },
        s as f64,
    )
}

/// Exhaustive integer search: does some size-`s` subset sum to half the
/// total?
pub fn has_partition_of_size(integers: &[u64], s: usize) -> bool {
    let total: u64 = integers.iter().sum();
    if total % 2 == 1 {
        return false;
    }
    let half = total / 2;
    let n = integers.len();
    assert!(n < 32, "exhaustive search is meant for small sets");
    (0u32..(1 << n)).any(|mask| {
        mask.count_ones() as usize == s
            && (0..n).filter(|i| mask & (1 << i) != 0).map(|i| integers[i]).sum::<u64>() == half
    })
}

#[cfg(test)]
mod tests {
    use super::super::brute_force;
    use super::*;
    use crate::objective::{group_distribution, wemd};

    fn optimal_wemd(integers: &[u64], s: usize) -> (f64, usize) {
        let inst = reduce_partition(integers, s).unwrap();
        let report = brute_force(&inst).unwrap();
        let group = group_distribution(&report.schedule.members, &inst.device_dists).unwrap();
        (
            wemd(&group, &inst.global_dist, &inst.params.class_weights).unwrap(),
            report.schedule.len(),
        )
    }

    #[test]
    fn small_examples() {
        let (w, size) = optimal_wemd(&[1, 2, 3], 2);
        assert_eq!(size, 2);
        assert!(w.abs() < 1e-12);
        assert!(has_partition_of_size(&[1, 2, 3], 2));

        let (w, _) = optimal_wemd(&[1, 1, 1], 1);
        assert!(w > 1e-9);
        assert!(!has_partition_of_size(&[1, 1, 1], 1));

        let (w, _) = optimal_wemd(&[2, 2], 1);
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn forced_size_holds_without_a_partition() {
        // Odd total: no exact split, yet the optimum still uses s devices.
        let (w, size) = optimal_wemd(&[3, 5, 1, 4, 2, 6, 2], 3);
        assert_eq!(size, 3);
        assert!(w > 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(reduce_partition(&[], 1).is_err());
        assert!(reduce_partition(&[1, 2, 3], 0).is_err());
        assert!(reduce_partition(&[1, 2, 3], 3).is_err());
        assert!(reduce_partition(&[1, 0], 1).is_err());
    }
}
