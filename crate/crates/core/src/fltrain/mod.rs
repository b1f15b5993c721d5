//! Federated averaging rounds with CGD-aware scheduling.
//!
//! Each round: devices come online at random, every available device trains
//! locally and reports its gradient spread, label mix, loss and update
//! norm; the server builds a scheduling instance from the channel snapshot
//! and its running σ and G estimates, aggregates the scheduled models, and
//! refreshes the estimates from what it received.

pub mod estimate;
pub mod local;
pub mod model;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::LinkState;
use crate::datagen::{DeviceDataset, Samples};
use crate::error::{Error, Result};
use crate::objective::{ClassDistribution, ObjectiveParams};
use crate::rng::{stream, Stream};
use crate::schedulers::{solve, ProblemInstance, SideInfo, SolverKind};

pub use estimate::{combine_sigma, estimate_g, estimate_g_per_class, sigma_from_grads, GSample};
pub use local::{aggregate, aggregation_weights, local_update, Hyperparams, LocalOutcome};
pub use model::{evaluate, loss_and_grad, mean_loss, ModelParams};

/// How the per-class weights `G_c` are estimated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GMode {
    /// One `Ĝ` shared by every class.
    #[default]
    Scalar,
    /// `Ĝ_c` from single-class device groups; every device must hold one class.
    PerClass,
}

impl std::str::FromStr for GMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(GMode::Scalar),
            "per-class" | "per_class" => Ok(GMode::PerClass),
            other => Err(Error::config(format!("unknown G mode `{other}` (expected scalar or per-class)"))),
        }
    }
}

/// Server state carried across rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub round: usize,
    pub global_model: ModelParams,
    /// Last local model of every device that has trained.
    pub device_models: Vec<Option<ModelParams>>,
    pub sigma_hat: Option<f64>,
    pub g_hat: Option<f64>,
    pub g_hat_per_class: Vec<Option<f64>>,
    /// Latest reported first-batch loss per device.
    pub accumulated_loss: Vec<Option<f64>>,
    /// Latest reported update norm per device.
    pub grad_norms: Vec<Option<f64>>,
}

impl TrainState {
    pub fn new(num_devices: usize, num_classes: usize, feature_dim: usize) -> Self {
        Self {
            round: 0,
            global_model: ModelParams::zeros(num_classes, feature_dim),
            device_models: vec![None; num_devices],
            sigma_hat: None,
            g_hat: None,
            g_hat_per_class: vec![None; num_classes],
            accumulated_loss: vec![None; num_devices],
            grad_norms: vec![None; num_devices],
        }
    }

    /// `G_c` for the next instance, or `None` before any estimate exists.
    pub fn class_weights(&self, mode: GMode) -> Option<Vec<f64>> {
        let classes = self.g_hat_per_class.len();
        match mode {
            GMode::Scalar => self.g_hat.map(|g| vec![g; classes]),
            GMode::PerClass => {
                let max = self.g_hat_per_class.iter().flatten().cloned().fold(None, |m: Option<f64>, g| {
                    Some(m.map_or(g, |m| m.max(g)))
                })?;
                Some(self.g_hat_per_class.iter().map(|g| g.unwrap_or(max)).collect())
            }
        }
    }

    /// The `Ĝ` value logged for the round: the scalar estimate, or the
    /// largest per-class one.
    pub fn logged_g(&self, mode: GMode) -> Option<f64> {
        self.class_weights(mode)
            .map(|w| w.into_iter().fold(0.0, f64::max))
    }
}

/// The data a federation trains and is measured on.
#[derive(Debug, Clone, Copy)]
pub struct Federation<'a> {
    pub devices: &'a [DeviceDataset],
    pub global_dist: &'a ClassDistribution,
    /// Union of device data, for the training loss.
    pub pool: &'a Samples,
    pub test: &'a Samples,
}

/// Per-run round settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSettings {
    pub solver: SolverKind,
    pub hp: Hyperparams,
    /// Per-round availability probability `p_a`.
    pub availability: f64,
    pub g_mode: GMode,
    /// Exponential smoothing factor for σ̂ and Ĝ; `None` uses raw values.
    pub smoothing: Option<f64>,
    pub poc_subset: Option<usize>,
    pub total_bandwidth: f64,
    pub seed: u64,
}

/// One row of the metrics table.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    /// Policy that produced the schedule; best-channel while `Ĝ` is unknown.
    pub solver: SolverKind,
    pub available: usize,
    pub scheduled: usize,
    pub bandwidth_used_hz: f64,
    pub wemd: Option<f64>,
    pub variance_term: Option<f64>,
    pub objective: f64,
    pub sigma_hat: Option<f64>,
    pub g_hat: Option<f64>,
    pub train_loss: f64,
    pub test_acc: f64,
    pub seed: u64,
}

impl RoundMetrics {
    pub const HEADER: [&'static str; 13] = [
        "round",
        "solver",
        "available",
        "scheduled",
        "bandwidth_used_hz",
        "wemd",
        "variance_term",
        "objective",
        "sigma_hat",
        "g_hat",
        "train_loss",
        "test_acc",
        "seed",
    ];

    /// CSV cells; missing values are empty.
    pub fn record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.round.to_string(),
            self.solver.to_string(),
            self.available.to_string(),
            self.scheduled.to_string(),
            self.bandwidth_used_hz.to_string(),
            opt(self.wemd),
            opt(self.variance_term),
            self.objective.to_string(),
            opt(self.sigma_hat),
            opt(self.g_hat),
            self.train_loss.to_string(),
            self.test_acc.to_string(),
            self.seed.to_string(),
        ]
    }

    pub fn skipped(&self) -> bool {
        self.scheduled == 0
    }
}

fn smooth(old: Option<f64>, new: f64, factor: Option<f64>) -> f64 {
    match (old, factor) {
        (Some(old), Some(f)) => f * new + (1.0 - f) * old,
        _ => new,
    }
}

/// Checks settings that depend on the federation.
pub fn validate_settings(fed: &Federation<'_>, settings: &RoundSettings) -> Result<()> {
    settings.hp.validate()?;
    if !(0.0..=1.0).contains(&settings.availability) {
        return Err(Error::config(format!(
            "availability must lie in [0, 1], got {}",
            settings.availability
        )));
    }
    if let Some(f) = settings.smoothing {
        if !(f > 0.0 && f <= 1.0) {
            return Err(Error::config(format!("smoothing factor must lie in (0, 1], got {f}")));
        }
    }
    if settings.g_mode == GMode::PerClass && fed.devices.iter().any(|d| d.single_class().is_none()) {
        return Err(Error::config(
            "per-class G estimation needs every device to hold a single class",
        ));
    }
    if fed.devices.iter().any(|d| d.size() == 0) {
        return Err(Error::config("every device needs at least one sample"));
    }
    Ok(())
}

/// Runs one round and advances `state`.
pub fn run_round(
    state: &mut TrainState,
    fed: &Federation<'_>,
    links: &[LinkState],
    settings: &RoundSettings,
) -> Result<RoundMetrics> {
    validate_settings(fed, settings)?;
    let num_devices = fed.devices.len();
    if links.len() != num_devices {
        return Err(Error::domain(format!(
            "{} links for {num_devices} devices",
            links.len()
        )));
    }
    let round = state.round as u64;
    let hp = &settings.hp;

    let mut avail_rng = stream(settings.seed, Stream::Availability, round, 0);
    let available: Vec<usize> = (0..num_devices)
        .filter(|_| avail_rng.random_bool(settings.availability))
        .collect();

    let global = state.global_model.clone();
    let outcomes: Vec<LocalOutcome> = available
        .par_iter()
        .map(|&v| {
            let mut rng = stream(settings.seed, Stream::LocalTraining, round, v as u64);
            local_update(&global, &fed.devices[v].samples, hp, &mut rng)
        })
        .collect::<Result<_>>()?;

    let pseudo: Vec<ModelParams> = outcomes
        .iter()
        .map(|o| estimate::pseudo_gradient(&global, &o.model, hp.tau, hp.eta))
        .collect();
    for ((&v, o), f) in available.iter().zip(&outcomes).zip(&pseudo) {
        state.accumulated_loss[v] = Some(o.first_batch_loss);
        state.grad_norms[v] = Some(f.norm());
        state.device_models[v] = Some(o.model.clone());
    }

    if !available.is_empty() {
        let sizes: Vec<usize> = available.iter().map(|&v| fed.devices[v].size()).collect();
        let alpha = aggregation_weights(&sizes)?;
        let sigmas: Vec<f64> = outcomes.iter().map(|o| o.sigma).collect();
        let raw = combine_sigma(&sigmas, &alpha);
        state.sigma_hat = Some(smooth(state.sigma_hat, raw, settings.smoothing));
    }

    let num_classes = fed.global_dist.num_classes();
    let learned = state.class_weights(settings.g_mode);
    let policy = if learned.is_some() || !settings.solver.uses_objective() {
        settings.solver
    } else {
        SolverKind::Bc
    };
    let class_weights = learned.unwrap_or_else(|| vec![1.0; num_classes]);

    let mut metrics = RoundMetrics {
        round: state.round,
        solver: policy,
        available: available.len(),
        scheduled: 0,
        bandwidth_used_hz: 0.0,
        wemd: None,
        variance_term: None,
        objective: f64::INFINITY,
        sigma_hat: state.sigma_hat,
        g_hat: state.logged_g(settings.g_mode),
        train_loss: 0.0,
        test_acc: 0.0,
        seed: settings.seed,
    };

    if !available.is_empty() {
        let instance = ProblemInstance::new(
            available.iter().map(|&v| fed.devices[v].label_dist.clone()).collect(),
            available.iter().map(|&v| links[v].min_bandwidth.hz()).collect(),
            fed.global_dist.clone(),
            ObjectiveParams {
                sigma: state.sigma_hat.unwrap_or(0.0),
                batch_size: hp.batch,
                class_weights,
            },
            settings.total_bandwidth,
        )?;
        let side = SideInfo {
            gains: Some(available.iter().map(|&v| links[v].avg_gain).collect()),
            grad_norms: Some(pseudo.iter().map(|f| f.norm()).collect()),
            losses: Some(outcomes.iter().map(|o| o.first_batch_loss).collect()),
            poc_subset: settings.poc_subset,
        };
        let mut solver_rng = stream(settings.seed, Stream::Solver, round, 0);
        let report = solve(policy, &instance, &side, &mut solver_rng)?;
        let local: &[usize] = &report.schedule.members;

        if !local.is_empty() {
            let group = crate::objective::group_distribution(local, &instance.device_dists)?;
            let wemd = crate::objective::wemd(&group, &instance.global_dist, &instance.params.class_weights)?;
            let variance = crate::objective::variance_term(local.len(), &instance.params);
            metrics.scheduled = local.len();
            metrics.bandwidth_used_hz = report.schedule.bandwidth_used;
            metrics.wemd = Some(wemd);
            metrics.variance_term = Some(variance);
            metrics.objective = wemd + variance;

            let models: Vec<&ModelParams> = local.iter().map(|&i| &outcomes[i].model).collect();
            let sizes: Vec<usize> = local.iter().map(|&i| fed.devices[available[i]].size()).collect();
            state.global_model = aggregate(&models, &sizes)?;

            let alpha = aggregation_weights(&sizes)?;
            let samples: Vec<GSample<'_>> = local
                .iter()
                .zip(&alpha)
                .map(|(&i, &a)| GSample {
                    pseudo_grad: &pseudo[i],
                    dist: &fed.devices[available[i]].label_dist,
                    alpha: a,
                })
                .collect();
            if let Some(g) = estimate_g(&samples, fed.global_dist) {
                state.g_hat = Some(smooth(state.g_hat, g, settings.smoothing));
            }
            if settings.g_mode == GMode::PerClass {
                let classes: Vec<usize> = local
                    .iter()
                    .map(|&i| fed.devices[available[i]].single_class().expect("checked class-pure"))
                    .collect();
                for (c, g) in estimate_g_per_class(&samples, &classes, fed.global_dist)
                    .into_iter()
                    .enumerate()
                {
                    if let Some(g) = g {
                        state.g_hat_per_class[c] = Some(smooth(state.g_hat_per_class[c], g, settings.smoothing));
                    }
                }
            }
        }
    }

    if !state.global_model.is_finite() {
        return Err(Error::domain(format!(
            "global model diverged in round {}; lower eta",
            state.round
        )));
    }
    metrics.train_loss = mean_loss(&state.global_model, fed.pool)?;
    metrics.test_acc = evaluate(&state.global_model, fed.test)?;
    state.round += 1;
    Ok(metrics)
}
