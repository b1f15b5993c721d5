//! Multinomial logistic regression.

use crate::datagen::Samples;
use crate::error::{Error, Result};

/// `C × (d + 1)` weights, row-major; the last column of each row is the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub weights: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(num_classes: usize, feature_dim: usize) -> Self {
        Self {
            num_classes,
            feature_dim,
            weights: vec![0.0; num_classes * (feature_dim + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// `self += k · other`.
    pub fn add_scaled(&mut self, k: f64, other: &ModelParams) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += k * b;
        }
    }

    pub fn scaled(&self, k: f64) -> ModelParams {
        let mut out = self.clone();
        out.weights.iter_mut().for_each(|w| *w *= k);
        out
    }

    pub fn sub(&self, other: &ModelParams) -> ModelParams {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    fn logits(&self, x: &[f64], out: &mut [f64]) {
        let stride = self.feature_dim + 1;
        for (c, o) in out.iter_mut().enumerate() {
            let row = &self.weights[c * stride..(c + 1) * stride];
            *o = row[self.feature_dim] + row[..self.feature_dim].iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
    }

    /// Softmax probabilities for one input; returns `−ln p_y` for label `y`.
    fn softmax_into(&self, x: &[f64], y: usize, probs: &mut [f64]) -> f64 {
        self.logits(x, probs);
        let max = probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        for p in probs.iter_mut() {
            *p = (*p - max).exp();
            z += *p;
        }
        let nll = z.ln() - (probs[y].ln());
        probs.iter_mut().for_each(|p| *p /= z);
        nll
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut logits = vec![0.0; self.num_classes];
        self.logits(x, &mut logits);
        let mut best = 0;
        for c in 1..logits.len() {
            if logits[c] > logits[best] {
                best = c;
            }
        }
        best
    }

    fn check(&self, data: &Samples) -> Result<()> {
        if data.dim != self.feature_dim || data.num_classes != self.num_classes {
            return Err(Error::domain(format!(
                "model is {}×{} but data has {} classes and {} features",
                self.num_classes, self.feature_dim, data.num_classes, data.dim
            )));
        }
        Ok(())
    }
}

/// Accumulates `scale · ∇ℓ(x, y)` into `grad`; returns the sample's loss.
fn accumulate_grad(model: &ModelParams, x: &[f64], y: usize, scale: f64, probs: &mut [f64], grad: &mut [f64]) -> f64 {
    let nll = model.softmax_into(x, y, probs);
    let stride = model.feature_dim + 1;
    for (c, &p) in probs.iter().enumerate() {
        let delta = scale * (p - if c == y { 1.0 } else { 0.0 });
        let row = &mut grad[c * stride..(c + 1) * stride];
        for (g, xi) in row.iter_mut().zip(x) {
            *g += delta * xi;
        }
        row[model.feature_dim] += delta;
    }
    nll
}

/// Mean cross-entropy over `indices` of `data` and its gradient.
pub fn loss_and_grad(model: &ModelParams, data: &Samples, indices: &[usize]) -> Result<(f64, ModelParams)> {
    model.check(data)?;
    if indices.is_empty() {
        return Err(Error::domain("loss_and_grad needs a non-empty batch"));
    }
    let scale = 1.0 / indices.len() as f64;
    let mut grad = ModelParams::zeros(model.num_classes, model.feature_dim);
    let mut probs = vec![0.0; model.num_classes];
    let mut loss = 0.0;
    for &i in indices {
        loss += accumulate_grad(model, data.feature(i), data.labels[i], scale, &mut probs, &mut grad.weights);
    }
    Ok((loss * scale, grad))
}

/// Per-sample gradients over `indices`, with the batch mean loss.
pub fn per_sample_grads(model: &ModelParams, data: &Samples, indices: &[usize]) -> Result<(f64, Vec<ModelParams>)> {
    model.check(data)?;
    let mut probs = vec![0.0; model.num_classes];
    let mut loss = 0.0;
    let grads = indices
        .iter()
        .map(|&i| {
            let mut g = ModelParams::zeros(model.num_classes, model.feature_dim);
            loss += accumulate_grad(model, data.feature(i), data.labels[i], 1.0, &mut probs, &mut g.weights);
            g
        })
        .collect();
    Ok((loss / indices.len().max(1) as f64, grads))
}

/// Mean cross-entropy over the whole set.
pub fn mean_loss(model: &ModelParams, data: &Samples) -> Result<f64> {
    model.check(data)?;
    if data.is_empty() {
        return Err(Error::domain("mean_loss on an empty set"));
    }
    let mut probs = vec![0.0; model.num_classes];
    let total: f64 = (0..data.len())
        .map(|i| model.softmax_into(data.feature(i), data.labels[i], &mut probs))
        .sum();
    Ok(total / data.len() as f64)
}

/// Argmax accuracy on `data`.
pub fn evaluate(model: &ModelParams, data: &Samples) -> Result<f64> {
    model.check(data)?;
    if data.is_empty() {
        return Err(Error::domain("cannot evaluate on an empty test set"));
    }
    let correct = (0..data.len())
        .filter(|&i| model.predict(data.feature(i)) == data.labels[i])
        .count();
    Ok(correct as f64 / data.len() as f64)
}
