//! Scheduling objective: sampling variance `σ/√(n·b)` plus the weighted
//! earth moving distance (WEMD) between a device group's class mix and the
//! global class mix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schedulers::ProblemInstance;

const SUM_TOLERANCE: f64 = 1e-9;

/// Per-class shares of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassDistribution(Vec<f64>);

impl ClassDistribution {
    /// Validated distribution: non-negative entries summing to one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let dist = Self::unnormalized(probs)?;
        let sum: f64 = dist.0.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!(
                "class distribution sums to {sum}, expected 1"
            )));
        }
        Ok(dist)
    }

    /// Non-negative class weights without the unit-sum requirement. The
    /// partition reduction uses these to carry raw integers.
    pub fn unnormalized(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("class distribution needs at least one class"));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain(format!(
                "class shares must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self(values))
    }

    /// Empirical distribution of label counts.
    pub fn from_counts(counts: &[usize]) -> Result<Self> {
        let total: usize = counts.iter().sum();
        if total == 0 {
            return Err(Error::domain("cannot build a distribution from zero samples"));
        }
        Ok(Self(
            counts.iter().map(|&c| c as f64 / total as f64).collect(),
        ))
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self(vec![1.0 / num_classes as f64; num_classes])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn num_classes(&self) -> usize {
        self.0.len()
    }

    /// `‖self − other‖₁`.
    pub fn l1_distance(&self, other: &ClassDistribution) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Noise scale, batch size, and per-class gradient weights of the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    pub sigma: f64,
    pub batch_size: usize,
    pub class_weights: Vec<f64>,
}

impl ObjectiveParams {
    /// Every class weighted by the same `g`.
    pub fn scalar(sigma: f64, batch_size: usize, g: f64, num_classes: usize) -> Self {
        Self {
            sigma,
            batch_size,
            class_weights: vec![g; num_classes],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::domain(format!("sigma must be ≥ 0, got {}", self.sigma)));
        }
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be ≥ 1"));
        }
        if let Some(g) = self.class_weights.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::domain(format!("class weights must be ≥ 0, got {g}")));
        }
        Ok(())
    }
}

/// Equal-weight mean of the scheduled devices' distributions.
pub fn group_distribution(
    members: &[usize],
    device_dists: &[ClassDistribution],
) -> Result<ClassDistribution> {
    let first = members
        .first()
        .ok_or_else(|| Error::domain("group distribution of an empty schedule"))?;
    let classes = device_dists
        .get(*first)
        .ok_or_else(|| Error::domain(format!("device {first} out of range")))?
        .num_classes();
    let mut sum = vec![0.0; classes];
    for &v in members {
        let dist = device_dists
            .get(v)
            .ok_or_else(|| Error::domain(format!("device {v} out of range")))?;
        if dist.num_classes() != classes {
            return Err(Error::domain("devices disagree on the number of classes"));
        }
        for (s, p) in sum.iter_mut().zip(dist.probs()) {
            *s += p;
        }
    }
    let n = members.len() as f64;
    Ok(ClassDistribution(sum.into_iter().map(|s| s / n).collect()))
}

/// `Σ_c G_c·|group_c − global_c|`.
pub fn wemd(group: &ClassDistribution, global: &ClassDistribution, weights: &[f64]) -> Result<f64> {
    let c = global.num_classes();
    if group.num_classes() != c || weights.len() != c {
        return Err(Error::domain(format!(
            "dimension mismatch: group {}, global {c}, weights {}",
            group.num_classes(),
            weights.len()
        )));
    }
    Ok(weights
        .iter()
        .zip(group.probs().iter().zip(global.probs()))
        .map(|(g, (a, b))| g * (a - b).abs())
        .sum())
}

/// `σ/√(n·b)`; infinite for an empty schedule.
pub fn variance_term(n_scheduled: usize, params: &ObjectiveParams) -> f64 {
    if n_scheduled == 0 {
        return f64::INFINITY;
    }
    params.sigma / ((n_scheduled * params.batch_size) as f64).sqrt()
}

/// Objective value of scheduling `members`; `+∞` for the empty schedule.
pub fn objective(members: &[usize], instance: &ProblemInstance) -> Result<f64> {
    if members.is_empty() {
        return Ok(f64::INFINITY);
    }
    for &v in members {
        match instance.min_bandwidths.get(v) {
            None => return Err(Error::domain(format!("device {v} out of range"))),
            Some(None) => {
                return Err(Error::domain(format!("device {v} cannot meet the deadline")))
            }
            Some(Some(_)) => {}
        }
    }
    let group = group_distribution(members, &instance.device_dists)?;
    let w = wemd(&group, &instance.global_dist, &instance.params.class_weights)?;
    Ok(w + variance_term(members.len(), &instance.params))
}
