//! Plain coordinate descent over single bit flips.

use rand::Rng;

use super::{Evaluator, ProblemInstance, SolveReport, SolverKind, IMPROVEMENT_EPS};
use crate::error::Result;

/// Coordinate descent from a random 0/1 start over the feasible devices.
///
/// A start that overruns the budget is repaired by dropping its most
/// expensive members. Each step takes the best single flip that stays within
/// budget and strictly lowers the objective.
pub fn cd_schedule<R: Rng + ?Sized>(instance: &ProblemInstance, rng: &mut R) -> Result<SolveReport> {
    let mut eval = Evaluator::new(instance);
    let feasible = instance.feasible_devices();
    let mut in_set = vec![false; instance.num_devices()];
    for &v in &feasible {
        in_set[v] = rng.random_bool(0.5);
    }
    let mut used: f64 = feasible
        .iter()
        .filter(|&&v| in_set[v])
        .map(|&v| instance.bandwidth(v))
        .sum();
    while used > instance.total_bandwidth {
        let drop = feasible
            .iter()
            .copied()
            .filter(|&v| in_set[v])
            .max_by(|&a, &b| {
                instance
                    .bandwidth(a)
                    .total_cmp(&instance.bandwidth(b))
                    .then(b.cmp(&a))
            })
            .expect("over budget implies a member");
        in_set[drop] = false;
        used -= instance.bandwidth(drop);
    }

    let mut sum = eval.zero_sum();
    let mut n = 0;
    for &v in &feasible {
        if in_set[v] {
            eval.add(&mut sum, v);
            n += 1;
        }
    }
    let w0 = eval.wemd(&sum, n);
    let mut current = eval.value(w0, n);
    let mut iterations = 0;

    loop {
        iterations += 1;
        let mut best: Option<(usize, f64)> = None;
        for &v in &feasible {
            let value = if in_set[v] {
                if n == 1 {
                    continue;
                }
                eval.remove(&mut sum, v);
                let w = eval.wemd(&sum, n - 1);
                eval.add(&mut sum, v);
                eval.value(w, n - 1)
            } else {
                if used + instance.bandwidth(v) > instance.total_bandwidth {
                    continue;
                }
                let w = eval.wemd_swapped(&sum, n + 1, v, None);
                eval.value(w, n + 1)
            };
            if best.is_none_or(|(_, bv)| value < bv) {
                best = Some((v, value));
            }
        }
        match best {
            Some((v, value)) if value < current - IMPROVEMENT_EPS => {
                if in_set[v] {
                    eval.remove(&mut sum, v);
                    used -= instance.bandwidth(v);
                    n -= 1;
                } else {
                    eval.add(&mut sum, v);
                    used += instance.bandwidth(v);
                    n += 1;
                }
                in_set[v] = !in_set[v];
                current = value;
            }
            _ => break,
        }
    }

    let members = (0..instance.num_devices()).filter(|&v| in_set[v]).collect();
    let evaluations = eval.evaluations;
    SolveReport::new(members, instance, iterations, evaluations, SolverKind::Cd)
}
