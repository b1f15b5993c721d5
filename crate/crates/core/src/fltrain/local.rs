//! Local SGD and weighted aggregation.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::estimate::sigma_from_grads;
use super::model::{loss_and_grad, per_sample_grads, ModelParams};
use crate::datagen::Samples;
use crate::error::{Error, Result};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    /// Learning rate η.
    pub eta: f64,
    /// Local iterations τ.
    pub tau: usize,
    /// Batch size b.
    pub batch: usize,
    /// Rounds J.
    pub rounds: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            eta: 0.1,
            tau: 5,
            batch: 16,
            rounds: 40,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::config(format!("eta must be ≥ 0, got {}", self.eta)));
        }
        if self.batch == 0 {
            return Err(Error::config("batch must be ≥ 1"));
        }
        Ok(())
    }
}

/// A batch of `b` indices: without replacement when the device holds at
/// least `b` samples, with replacement otherwise.
pub fn draw_batch<R: Rng + ?Sized>(n: usize, b: usize, rng: &mut R) -> Vec<usize> {
    if n >= b {
        sample(rng, n, b).into_vec()
    } else {
        (0..b).map(|_| rng.random_range(0..n)).collect()
    }
}

/// What a device reports after its local update.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutcome {
    pub model: ModelParams,
    /// Mean loss of the first batch at the starting model.
    pub first_batch_loss: f64,
    /// Gradient spread over the first batch at the starting model.
    pub sigma: f64,
}

/// `τ` SGD steps from `model` on batches of `data`.
pub fn local_update<R: Rng + ?Sized>(
    model: &ModelParams,
    data: &Samples,
    hp: &Hyperparams,
    rng: &mut R,
) -> Result<LocalOutcome> {
    if data.is_empty() {
        return Err(Error::domain("local update on a device without samples"));
    }
    let first = draw_batch(data.len(), hp.batch, rng);
    let (first_batch_loss, grads) = per_sample_grads(model, data, &first)?;
    let sigma = sigma_from_grads(&grads);

    let mut w = model.clone();
    for step in 0..hp.tau {
        let batch = if step == 0 {
            first.clone()
        } else {
            draw_batch(data.len(), hp.batch, rng)
        };
        let (_, g) = loss_and_grad(&w, data, &batch)?;
        w.add_scaled(-hp.eta, &g);
    }
    Ok(LocalOutcome {
        model: w,
        first_batch_loss,
        sigma,
    })
}

/// `α_v = |D_v| / Σ|D_v'|`.
pub fn aggregation_weights(sizes: &[usize]) -> Result<Vec<f64>> {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return Err(Error::domain("aggregation over an empty group"));
    }
    Ok(sizes.iter().map(|&s| s as f64 / total as f64).collect())
}

/// `Σ α_v w_v` with size-proportional weights.
pub fn aggregate(models: &[&ModelParams], sizes: &[usize]) -> Result<ModelParams> {
    if models.is_empty() || models.len() != sizes.len() {
        return Err(Error::domain("aggregation needs one size per model and at least one model"));
    }
    let alpha = aggregation_weights(sizes)?;
    let mut out = ModelParams::zeros(models[0].num_classes, models[0].feature_dim);
    for (m, a) in models.iter().zip(alpha) {
        out.add_scaled(a, m);
    }
    Ok(out)
}
