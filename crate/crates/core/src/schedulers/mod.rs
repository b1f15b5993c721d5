//! Device scheduling: pick the subset of devices that minimizes the
//! objective while their minimum bandwidths fit in the cell's budget.
//!
//! Solvers:
//! - [`greedy_schedule`]: adds the device with the largest WEMD decrease
//!   while the objective improves.
//! - [`fscd_schedule`]: fixed-size swap search for every schedule size,
//!   largest first, with an early exit once smaller sizes cannot win.
//! - [`cd_schedule`]: single bit-flip coordinate descent from a random start.
//! - [`brute_force`]: exact enumeration, the reference for the others.
//! - [`best_channel`], [`best_norm`], [`power_of_choice`]: best-effort fills
//!   in a sorted order.

mod best_effort;
mod brute;
mod cd;
mod fscd;
mod greedy;
mod reduction;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::{self, ClassDistribution, ObjectiveParams};

pub use best_effort::{best_channel, best_norm, power_of_choice};
pub use brute::{brute_force, MAX_BRUTE_FORCE_DEVICES};
pub use cd::cd_schedule;
pub use fscd::fscd_schedule;
pub use greedy::greedy_schedule;
pub use reduction::{has_partition_of_size, reduce_partition};

/// A move must lower the objective by more than this to be taken.
pub const IMPROVEMENT_EPS: f64 = 1e-12;

/// One round's scheduling problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub device_dists: Vec<ClassDistribution>,
    /// `None` marks a device that cannot meet the deadline at any bandwidth.
    pub min_bandwidths: Vec<Option<f64>>,
    pub global_dist: ClassDistribution,
    pub params: ObjectiveParams,
    pub total_bandwidth: f64,
}

impl ProblemInstance {
    pub fn new(
        device_dists: Vec<ClassDistribution>,
        min_bandwidths: Vec<Option<f64>>,
        global_dist: ClassDistribution,
        params: ObjectiveParams,
        total_bandwidth: f64,
    ) -> Result<Self> {
        let inst = Self {
            device_dists,
            min_bandwidths,
            global_dist,
            params,
            total_bandwidth,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.device_dists.len();
        if v == 0 {
            return Err(Error::domain("instance needs at least one device"));
        }
        if self.min_bandwidths.len() != v {
            return Err(Error::domain(format!(
                "{v} devices but {} bandwidth entries",
                self.min_bandwidths.len()
            )));
        }
        let c = self.global_dist.num_classes();
        if let Some(i) = self.device_dists.iter().position(|d| d.num_classes() != c) {
            return Err(Error::domain(format!(
                "device {i} has {} classes, global distribution has {c}",
                self.device_dists[i].num_classes()
            )));
        }
        if self.params.class_weights.len() != c {
            return Err(Error::domain(format!(
                "{} class weights for {c} classes",
                self.params.class_weights.len()
            )));
        }
        self.params.validate()?;
        if let Some(b) = self.min_bandwidths.iter().flatten().find(|b| !(**b > 0.0) || !b.is_finite()) {
            return Err(Error::domain(format!("minimum bandwidth must be positive, got {b}")));
        }
        if !(self.total_bandwidth > 0.0) || !self.total_bandwidth.is_finite() {
            return Err(Error::domain(format!(
                "total bandwidth must be positive, got {}",
                self.total_bandwidth
            )));
        }
        Ok(())
    }

    pub fn num_devices(&self) -> usize {
        self.device_dists.len()
    }

    pub fn num_classes(&self) -> usize {
        self.global_dist.num_classes()
    }

    pub fn is_feasible(&self, v: usize) -> bool {
        self.min_bandwidths[v].is_some()
    }

    /// Indices of devices that can meet the deadline.
    pub fn feasible_devices(&self) -> Vec<usize> {
        (0..self.num_devices()).filter(|&v| self.is_feasible(v)).collect()
    }

    pub(crate) fn bandwidth(&self, v: usize) -> f64 {
        self.min_bandwidths[v].unwrap_or(f64::INFINITY)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "instance document".into(),
            source,
        })?;
        doc.into_instance()
    }

    pub fn load(path: &Path) -> Result<Self> {
        InstanceDocument::load(path)?.into_instance()
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            global_dist: self.global_dist.probs().to_vec(),
            devices: self
                .device_dists
                .iter()
                .zip(&self.min_bandwidths)
                .map(|(d, b)| DeviceEntry {
                    dist: d.probs().to_vec(),
                    min_bw_hz: *b,
                    gain: None,
                    grad_norm: None,
                    loss: None,
                })
                .collect(),
            sigma: self.params.sigma,
            batch: self.params.batch_size,
            g_weights: self.params.class_weights.clone(),
            total_bw_hz: self.total_bandwidth,
        }
    }
}

/// On-disk form of a [`ProblemInstance`]. A `null` bandwidth marks a device
/// that cannot meet the deadline. The optional per-device `gain`,
/// `grad_norm` and `loss` keys feed the best-effort baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub global_dist: Vec<f64>,
    pub devices: Vec<DeviceEntry>,
    pub sigma: f64,
    pub batch: usize,
    pub g_weights: Vec<f64>,
    pub total_bw_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub dist: Vec<f64>,
    pub min_bw_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
}

impl InstanceDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            context: path.display().to_string(),
            source,
        })
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        let global = ClassDistribution::new(self.global_dist)
            .map_err(|e| Error::config(format!("global_dist: {e}")))?;
        let mut dists = Vec::with_capacity(self.devices.len());
        let mut bws = Vec::with_capacity(self.devices.len());
        for (i, dev) in self.devices.into_iter().enumerate() {
            dists.push(
                ClassDistribution::new(dev.dist)
                    .map_err(|e| Error::config(format!("devices[{i}].dist: {e}")))?,
            );
            bws.push(dev.min_bw_hz);
        }
        let params = ObjectiveParams {
            sigma: self.sigma,
            batch_size: self.batch,
            class_weights: self.g_weights,
        };
        ProblemInstance::new(dists, bws, global, params, self.total_bw_hz)
            .map_err(|e| Error::config(e.to_string()))
    }

    /// Side information for the best-effort baselines, if every device has it.
    pub fn side_info(&self) -> SideInfo {
        let collect = |f: fn(&DeviceEntry) -> Option<f64>| -> Option<Vec<f64>> {
            self.devices.iter().map(f).collect()
        };
        SideInfo {
            gains: collect(|d| d.gain),
            grad_norms: collect(|d| d.grad_norm),
            losses: collect(|d| d.loss),
            poc_subset: None,
        }
    }
}

/// A set of scheduled devices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Schedule {
    /// Sorted device indices.
    pub members: Vec<usize>,
    pub bandwidth_used: f64,
    pub objective_value: f64,
}

impl Schedule {
    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
            bandwidth_used: 0.0,
            objective_value: f64::INFINITY,
        }
    }

    /// Builds a schedule and evaluates it from scratch.
    pub fn from_members(mut members: Vec<usize>, instance: &ProblemInstance) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        let objective_value = objective::objective(&members, instance)?;
        let bandwidth_used = members.iter().map(|&v| instance.bandwidth(v)).sum();
        Ok(Self {
            members,
            bandwidth_used,
            objective_value,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True when every member is feasible and the bandwidth fits the budget.
    pub fn is_feasible_for(&self, instance: &ProblemInstance) -> bool {
        self.members.iter().all(|&v| v < instance.num_devices() && instance.is_feasible(v))
            && self.bandwidth_used <= instance.total_bandwidth
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub schedule: Schedule,
    pub iterations: usize,
    pub evaluations: usize,
    pub solver_name: String,
    /// Set when no device could be scheduled at all.
    pub no_feasible_device: bool,
}

impl SolveReport {
    pub(crate) fn new(
        members: Vec<usize>,
        instance: &ProblemInstance,
        iterations: usize,
        evaluations: usize,
        solver: SolverKind,
    ) -> Result<Self> {
        let schedule = if members.is_empty() {
            Schedule::empty()
        } else {
            Schedule::from_members(members, instance)?
        };
        Ok(Self {
            no_feasible_device: schedule.is_empty(),
            schedule,
            iterations,
            evaluations,
            solver_name: solver.to_string(),
        })
    }
}

/// Incremental objective evaluation from a running sum of member
/// distributions.
pub(crate) struct Evaluator<'a> {
    inst: &'a ProblemInstance,
    pub evaluations: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(inst: &'a ProblemInstance) -> Self {
        Self {
            inst,
            evaluations: 0,
        }
    }

    pub fn zero_sum(&self) -> Vec<f64> {
        vec![0.0; self.inst.num_classes()]
    }

    pub fn add(&self, sum: &mut [f64], v: usize) {
        for (s, p) in sum.iter_mut().zip(self.inst.device_dists[v].probs()) {
            *s += p;
        }
    }

    pub fn remove(&self, sum: &mut [f64], v: usize) {
        for (s, p) in sum.iter_mut().zip(self.inst.device_dists[v].probs()) {
            *s -= p;
        }
    }

    /// WEMD of a group given the sum of its distributions and its size.
    pub fn wemd(&self, sum: &[f64], n: usize) -> f64 {
        if n == 0 {
            return f64::INFINITY;
        }
        let n = n as f64;
        self.inst
            .params
            .class_weights
            .iter()
            .zip(sum.iter().zip(self.inst.global_dist.probs()))
            .map(|(g, (s, p))| g * (s / n - p).abs())
            .sum()
    }

    /// WEMD of `sum + p_add − p_remove` without materializing it.
    pub fn wemd_swapped(&self, sum: &[f64], n: usize, add: usize, remove: Option<usize>) -> f64 {
        let nf = n as f64;
        let pa = self.inst.device_dists[add].probs();
        let global = self.inst.global_dist.probs();
        let weights = &self.inst.params.class_weights;
        match remove {
            Some(r) => {
                let pr = self.inst.device_dists[r].probs();
                (0..sum.len())
                    .map(|c| weights[c] * ((sum[c] + pa[c] - pr[c]) / nf - global[c]).abs())
                    .sum()
            }
            None => (0..sum.len())
                .map(|c| weights[c] * ((sum[c] + pa[c]) / nf - global[c]).abs())
                .sum(),
        }
    }

    pub fn variance(&self, n: usize) -> f64 {
        objective::variance_term(n, &self.inst.params)
    }

    /// Counted objective evaluation.
    pub fn value(&mut self, wemd: f64, n: usize) -> f64 {
        self.evaluations += 1;
        if n == 0 {
            f64::INFINITY
        } else {
            wemd + self.variance(n)
        }
    }
}

/// Keys for the best-effort baselines and the power-of-choice sample size.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SideInfo {
    pub gains: Option<Vec<f64>>,
    pub grad_norms: Option<Vec<f64>>,
    pub losses: Option<Vec<f64>>,
    /// Power-of-choice sample size; `⌈V/2⌉` when unset.
    pub poc_subset: Option<usize>,
}

/// Every scheduling policy the simulator knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Gs,
    Fscd,
    Cd,
    Oracle,
    Bc,
    Bn,
    Poc,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::Gs,
        SolverKind::Fscd,
        SolverKind::Cd,
        SolverKind::Oracle,
        SolverKind::Bc,
        SolverKind::Bn,
        SolverKind::Poc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gs => "gs",
            SolverKind::Fscd => "fscd",
            SolverKind::Cd => "cd",
            SolverKind::Oracle => "oracle",
            SolverKind::Bc => "bc",
            SolverKind::Bn => "bn",
            SolverKind::Poc => "poc",
        }
    }

    /// True for solvers that minimize the objective (and so need σ and G).
    pub fn uses_objective(self) -> bool {
        matches!(
            self,
            SolverKind::Gs | SolverKind::Fscd | SolverKind::Cd | SolverKind::Oracle
        )
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gs" | "greedy" => Ok(SolverKind::Gs),
            "fscd" => Ok(SolverKind::Fscd),
            "cd" => Ok(SolverKind::Cd),
            "oracle" | "brute-force" | "brute_force" => Ok(SolverKind::Oracle),
            "bc" | "best-channel" => Ok(SolverKind::Bc),
            "bn" | "best-norm" => Ok(SolverKind::Bn),
            "poc" | "power-of-choice" => Ok(SolverKind::Poc),
            other => Err(Error::config(format!(
                "unknown solver `{other}` (expected gs, fscd, cd, oracle, bc, bn or poc)"
            ))),
        }
    }
}

/// Runs `kind` on `instance`. Baselines read their sort keys from `side`.
pub fn solve<R: Rng + ?Sized>(
    kind: SolverKind,
    instance: &ProblemInstance,
    side: &SideInfo,
    rng: &mut R,
) -> Result<SolveReport> {
    let key = |k: &Option<Vec<f64>>, what: &str| -> Result<Vec<f64>> {
        k.clone()
            .ok_or_else(|| Error::config(format!("solver {kind} needs per-device {what}")))
    };
    match kind {
        SolverKind::Gs => greedy_schedule(instance),
        SolverKind::Fscd => fscd_schedule(instance),
        SolverKind::Cd => cd_schedule(instance, rng),
        SolverKind::Oracle => brute_force(instance),
        SolverKind::Bc => best_channel(instance, &key(&side.gains, "gain")?),
        SolverKind::Bn => best_norm(instance, &key(&side.grad_norms, "grad_norm")?),
        SolverKind::Poc => {
            let subset = side
                .poc_subset
                .unwrap_or_else(|| instance.num_devices().div_ceil(2));
            power_of_choice(instance, &key(&side.losses, "loss")?, subset, rng)
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn dist(v: &[f64]) -> ClassDistribution {
        ClassDistribution::new(v.to_vec()).unwrap()
    }

    /// Devices [0.51,0.49], [0.51,0.49], [0.8,0.2], [0.2,0.8] against a
    /// uniform global mix.
    pub fn four_device_example(sigma: f64, total_bandwidth: f64) -> ProblemInstance {
        ProblemInstance::new(
            vec![
                dist(&[0.51, 0.49]),
                dist(&[0.51, 0.49]),
                dist(&[0.8, 0.2]),
                dist(&[0.2, 0.8]),
            ],
            vec![Some(1.0); 4],
            dist(&[0.5, 0.5]),
            ObjectiveParams::scalar(sigma, 32, 1.0, 2),
            total_bandwidth,
        )
        .unwrap()
    }

    /// Random instance with Dirichlet-like device mixes and bandwidths that
    /// leave room for roughly half the fleet.
    pub fn random_instance<R: Rng>(rng: &mut R, v: usize, c: usize) -> ProblemInstance {
        let dists: Vec<ClassDistribution> = (0..v)
            .map(|_| {
                let raw: Vec<f64> = (0..c).map(|_| rng.random::<f64>().powi(3)).collect();
                let s: f64 = raw.iter().sum::<f64>().max(1e-12);
                ClassDistribution::new(raw.iter().map(|x| x / s).collect()).unwrap()
            })
            .collect();
        let members: Vec<usize> = (0..v).collect();
        let global = objective::group_distribution(&members, &dists).unwrap();
        let bws: Vec<Option<f64>> = (0..v)
            .map(|_| (rng.random::<f64>() > 0.1).then(|| rng.random_range(0.5..2.0)))
            .collect();
        let sigma = rng.random_range(0.5..8.0);
        ProblemInstance::new(
            dists,
            bws,
            global,
            ObjectiveParams::scalar(sigma, 32, 1.0, c),
            0.6 * v as f64,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn instance_validation() {
        let mut inst = four_device_example(0.0, 10.0);
        inst.min_bandwidths[0] = Some(-1.0);
        assert!(inst.validate().is_err());
        let mut inst = four_device_example(0.0, 10.0);
        inst.params.class_weights.pop();
        assert!(inst.validate().is_err());
        let mut inst = four_device_example(0.0, 10.0);
        inst.min_bandwidths.pop();
        assert!(inst.validate().is_err());
    }

    #[test]
    fn json_round_trip_keeps_infeasible_devices() {
        let mut inst = four_device_example(0.3, 2.5);
        inst.min_bandwidths[1] = None;
        let text = serde_json::to_string(&inst.to_document()).unwrap();
        assert!(text.contains("\"min_bw_hz\":null"));
        assert_eq!(ProblemInstance::from_json(&text).unwrap(), inst);
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(ProblemInstance::from_json("{").is_err());
        let bad = r#"{"global_dist":[0.5,0.6],"devices":[{"dist":[0.5,0.5],"min_bw_hz":1}],
            "sigma":1,"batch":32,"g_weights":[1,1],"total_bw_hz":2}"#;
        let err = ProblemInstance::from_json(bad).unwrap_err();
        assert!(err.to_string().contains("global_dist"));
        let unknown = r#"{"global_dist":[1.0],"devices":[],"sigma":1,"batch":1,"g_weights":[1],
            "total_bw_hz":1,"extra":3}"#;
        assert!(ProblemInstance::from_json(unknown).is_err());
    }

    #[test]
    fn solver_names_parse() {
        for kind in SolverKind::ALL {
            assert_eq!(kind.name().parse::<SolverKind>().unwrap(), kind);
        }
        assert_eq!("brute-force".parse::<SolverKind>().unwrap(), SolverKind::Oracle);
        assert!("fedcbs".parse::<SolverKind>().is_err());
    }
}
