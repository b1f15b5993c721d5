//! Lower real branch of the Lambert W function.
//!
//! `W₋₁(x)` is the solution `w ≤ −1` of `w·eʷ = x` for `x ∈ [−1/e, 0)`.
//! Halley's iteration is started from the branch-point series near `−1/e`
//! and from the logarithmic asymptote elsewhere.

use std::f64::consts::E;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 64;

/// Evaluates `W₋₁(x)`.
///
/// Accepts `x` in `[−1/e, 0)`; the branch point itself maps to `−1`.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    let branch_point = -1.0 / E;
    if !x.is_finite() || x >= 0.0 || x < branch_point - 4.0 * f64::EPSILON {
        return Err(Error::domain(format!(
            "W₋₁ is real only on [−1/e, 0), got {x}"
        )));
    }
    // Distance from the branch point, 2(1 + e·x) ≥ 0.
    let q = 2.0 * (E * x + 1.0);
    if q <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = if x < -0.25 {
        let p = -q.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };

    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        // Halley can overshoot across the branch point; keep w ≤ −1.
        let next = (w - step).min(-1.0);
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * w.abs();
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Bisection on `w·eʷ = x` over `[−800, −1]`, where `w·eʷ` falls from 0 to −1/e.
    fn bisect_w_m1(x: f64) -> f64 {
        let mut lo = -800.0_f64;
        let mut hi = -1.0_f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid * mid.exp() > x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn branch_point() {
        assert_eq!(lambert_w_m1(-1.0 / E).unwrap(), -1.0);
    }

    #[test]
    fn matches_bisection_at_minus_tenth() {
        let oracle = bisect_w_m1(-0.1);
        assert!((oracle - (-3.577152063957297)).abs() < 1e-12);
        let w = lambert_w_m1(-0.1).unwrap();
        assert!((w - oracle).abs() < 1e-12, "{w} vs {oracle}");
    }

    #[test]
    fn matches_bisection_across_range() {
        for &x in &[-0.36, -0.3, -0.2, -0.05, -1e-3, -1e-8, -1e-30, -1e-200] {
            let w = lambert_w_m1(x).unwrap();
            let oracle = bisect_w_m1(x);
            assert!((w - oracle).abs() <= 1e-10 * oracle.abs(), "x={x}: {w} vs {oracle}");
        }
    }

    #[test]
    fn rejects_outside_domain() {
        assert!(lambert_w_m1(0.0).is_err());
        assert!(lambert_w_m1(0.1).is_err());
        assert!(lambert_w_m1(-0.5).is_err());
        assert!(lambert_w_m1(f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn defining_identity(u in 1e-9f64..1.0) {
            let x = -u / E;
            let w = lambert_w_m1(x).unwrap();
            prop_assert!(w <= -1.0);
            prop_assert!((w * w.exp() - x).abs() <= 1e-12 * x.abs());
        }
    }
}
