//! Exact enumeration of every budget-feasible schedule.

use super::{Evaluator, ProblemInstance, SolveReport, SolverKind};
use crate::error::{Error, Result};

/// Largest fleet the exhaustive search accepts.
pub const MAX_BRUTE_FORCE_DEVICES: usize = 24;

const TIE_EPS: f64 = 1e-12;
/// Running sums are rebuilt from scratch whenever a bit at or above this
/// position toggles, bounding accumulated rounding.
const RESYNC_BIT: u32 = 10;

/// True when member set `a` precedes `b` lexicographically (as sorted lists).
fn lex_less(a: u32, b: u32) -> bool {
    let diff = a ^ b;
    if diff == 0 {
        return false;
    }
    let low = diff.trailing_zeros();
    if a & (1 << low) != 0 {
        // `a` has the smaller next element unless `b` has run out.
        (b >> low) != 0
    } else {
        (a >> low) == 0
    }
}

/// Exact minimizer over all budget-feasible subsets of the feasible devices.
/// Ties (within 1e−12) go to the lexicographically smallest member set.
pub fn brute_force(instance: &ProblemInstance) -> Result<SolveReport> {
    let v = instance.num_devices();
    if v > MAX_BRUTE_FORCE_DEVICES {
        return Err(Error::TooLarge {
            devices: v,
            limit: MAX_BRUTE_FORCE_DEVICES,
        });
    }
    let mut eval = Evaluator::new(instance);
    let feasible = instance.feasible_devices();
    let k = feasible.len();
    let costs: Vec<f64> = feasible.iter().map(|&d| instance.bandwidth(d)).collect();

    let mut sum = eval.zero_sum();
    let mut used = 0.0;
    let mut n = 0usize;
    let mut mask: u32 = 0;
    let mut best: Option<(f64, u32)> = None;

    for step in 1u64..(1u64 << k) {
        let bit = step.trailing_zeros();
        let flag = 1u32 << bit;
        let dev = feasible[bit as usize];
        mask ^= flag;
        if bit >= RESYNC_BIT {
            sum = eval.zero_sum();
            used = 0.0;
            n = 0;
            for (i, &d) in feasible.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    eval.add(&mut sum, d);
                    used += costs[i];
                    n += 1;
                }
            }
        } else if mask & flag != 0 {
            eval.add(&mut sum, dev);
            used += costs[bit as usize];
            n += 1;
        } else {
            eval.remove(&mut sum, dev);
            used -= costs[bit as usize];
            n -= 1;
        }
        let budget = instance.total_bandwidth;
        if used > budget * (1.0 + 1e-9) {
            continue;
        }
        // Near the budget edge, decide on the exact sum in index order.
        if used >= budget * (1.0 - 1e-9) {
            let exact: f64 = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| costs[i]).sum();
            if exact > budget {
                continue;
            }
        }
        let w = eval.wemd(&sum, n);
        let value = eval.value(w, n);
        let take = match best {
            None => true,
            Some((bv, bm)) => {
                value < bv - TIE_EPS || ((value - bv).abs() <= TIE_EPS && lex_less(mask, bm))
            }
        };
        if take {
            best = Some((value, mask));
        }
    }

    let members = best
        .map(|(_, m)| (0..k).filter(|i| m & (1 << i) != 0).map(|i| feasible[i]).collect())
        .unwrap_or_default();
    let evaluations = eval.evaluations;
    SolveReport::new(members, instance, evaluations, evaluations, SolverKind::Oracle)
}
