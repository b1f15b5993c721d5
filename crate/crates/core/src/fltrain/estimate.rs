//! Server-side estimates of the gradient spread σ and the divergence
//! constant G from what devices report each round.

use super::model::ModelParams;
use crate::objective::ClassDistribution;

/// Devices whose label mix is this close to the global one carry no
/// information about G.
pub const MIN_DIST_GAP: f64 = 1e-9;

/// `√(mean_i ‖g_i − ḡ‖²)`; zero for fewer than two gradients.
pub fn sigma_from_grads(grads: &[ModelParams]) -> f64 {
    if grads.len() < 2 {
        return 0.0;
    }
    let k = 1.0 / grads.len() as f64;
    let mut mean = ModelParams::zeros(grads[0].num_classes, grads[0].feature_dim);
    grads.iter().for_each(|g| mean.add_scaled(k, g));
    let spread: f64 = grads
        .iter()
        .map(|g| {
            g.weights
                .iter()
                .zip(&mean.weights)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum();
    (spread * k).sqrt()
}

/// `√(Σ α_v σ_v²)`.
pub fn combine_sigma(sigmas: &[f64], alpha: &[f64]) -> f64 {
    sigmas
        .iter()
        .zip(alpha)
        .map(|(s, a)| a * s * s)
        .sum::<f64>()
        .sqrt()
}

/// `(w_after − w_before) / (τη)`; zero when `τη = 0`.
pub fn pseudo_gradient(before: &ModelParams, after: &ModelParams, tau: usize, eta: f64) -> ModelParams {
    let scale = tau as f64 * eta;
    if scale == 0.0 {
        return ModelParams::zeros(before.num_classes, before.feature_dim);
    }
    before.sub(after).scaled(1.0 / scale)
}

/// One scheduled device's contribution to the G estimate.
#[derive(Debug, Clone)]
pub struct GSample<'a> {
    pub pseudo_grad: &'a ModelParams,
    pub dist: &'a ClassDistribution,
    pub alpha: f64,
}

fn ratios(samples: &[GSample<'_>], global: &ClassDistribution) -> Vec<Option<f64>> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let mut mean = ModelParams::zeros(first.pseudo_grad.num_classes, first.pseudo_grad.feature_dim);
    samples.iter().for_each(|s| mean.add_scaled(s.alpha, s.pseudo_grad));
    samples
        .iter()
        .map(|s| {
            let gap = s.dist.l1_distance(global);
            (gap >= MIN_DIST_GAP).then(|| s.pseudo_grad.sub(&mean).norm() / gap)
        })
        .collect()
}

/// `max_v ‖f_v − F‖ / ‖p_v − p‖₁` over devices whose mix differs from `p`;
/// `None` when no device qualifies or the maximum is zero.
pub fn estimate_g(samples: &[GSample<'_>], global: &ClassDistribution) -> Option<f64> {
    let max = ratios(samples, global)
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    (max > 0.0).then_some(max)
}

/// Per-class variant: the maximum is taken within each group of
/// single-class devices. `classes[i]` is the class held by `samples[i]`.
/// Classes without a positive estimate are `None`.
pub fn estimate_g_per_class(
    samples: &[GSample<'_>],
    classes: &[usize],
    global: &ClassDistribution,
) -> Vec<Option<f64>> {
    let mut out = vec![None::<f64>; global.num_classes()];
    for (r, &c) in ratios(samples, global).into_iter().zip(classes) {
        if let Some(r) = r.filter(|r| *r > 0.0) {
            out[c] = Some(out[c].map_or(r, |x: f64| x.max(r)));
        }
    }
    out
}
