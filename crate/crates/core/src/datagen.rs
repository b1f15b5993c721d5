//! Synthetic classification data and its non-IID split across devices.
//!
//! Two partition schemes:
//! - sort-and-partition: optionally skew the two halves of the class set to
//!   an imbalance ratio `r = n₂/n₁`, sort by label, cut into `V·l` shards
//!   and deal `l` shards per device;
//! - Dirichlet: each device draws its label mix from `Dir(α·p)` and receives
//!   the same number of samples.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::ClassDistribution;

/// A labelled sample set with row-major features.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub dim: usize,
    pub num_classes: usize,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Samples {
    pub fn empty(dim: usize, num_classes: usize) -> Self {
        Self {
            dim,
            num_classes,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, x: &[f64], y: usize) {
        debug_assert_eq!(x.len(), self.dim);
        self.features.extend_from_slice(x);
        self.labels.push(y);
    }

    pub fn subset(&self, indices: &[usize]) -> Samples {
        let mut out = Samples::empty(self.dim, self.num_classes);
        for &i in indices {
            out.push(self.feature(i), self.labels[i]);
        }
        out
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub fn label_dist(&self) -> Result<ClassDistribution> {
        ClassDistribution::from_counts(&self.label_counts())
    }

    /// Writes `f0,…,f{d−1},label` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let context = || path.display().to_string();
        let mut w = csv::Writer::from_path(path).map_err(|source| Error::Csv {
            context: context(),
            source,
        })?;
        let mut header: Vec<String> = (0..self.dim).map(|j| format!("f{j}")).collect();
        header.push("label".into());
        w.write_record(&header).map_err(|source| Error::Csv {
            context: context(),
            source,
        })?;
        for i in 0..self.len() {
            let mut row: Vec<String> = self.feature(i).iter().map(|x| x.to_string()).collect();
            row.push(self.labels[i].to_string());
            w.write_record(&row).map_err(|source| Error::Csv {
                context: context(),
                source,
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Gaussian-bump classification task.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub class_means: Vec<Vec<f64>>,
    pub noise_std: f64,
    pub train_per_class: Vec<usize>,
    pub test_per_class: Vec<usize>,
}

/// Serializable description of a [`SyntheticTask`]; class means are drawn
/// from the seed at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub num_classes: usize,
    pub feature_dim: usize,
    /// Norm of every class mean.
    pub class_separation: f64,
    pub noise_std: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
}

impl Default for TaskConfig {
    fn default() -> Self {
        Self {
            num_classes: 10,
            feature_dim: 20,
            class_separation: 3.0,
            noise_std: 1.0,
            train_per_class: 200,
            test_per_class: 50,
        }
    }
}

impl TaskConfig {
    pub fn build<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SyntheticTask> {
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        let class_means = (0..self.num_classes)
            .map(|_| {
                let v: Vec<f64> = (0..self.feature_dim).map(|_| normal.sample(rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
                v.into_iter().map(|x| x * self.class_separation / norm).collect()
            })
            .collect();
        let task = SyntheticTask {
            num_classes: self.num_classes,
            feature_dim: self.feature_dim,
            class_means,
            noise_std: self.noise_std,
            train_per_class: vec![self.train_per_class; self.num_classes],
            test_per_class: vec![self.test_per_class; self.num_classes],
        };
        task.validate()?;
        Ok(task)
    }
}

impl SyntheticTask {
    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::config("a task needs at least two classes"));
        }
        if self.feature_dim == 0 {
            return Err(Error::config("feature dimension must be ≥ 1"));
        }
        if !(self.noise_std > 0.0) {
            return Err(Error::config("noise_std must be positive"));
        }
        if self.class_means.len() != self.num_classes
            || self.class_means.iter().any(|m| m.len() != self.feature_dim)
            || self.train_per_class.len() != self.num_classes
            || self.test_per_class.len() != self.num_classes
        {
            return Err(Error::config("task tables disagree with num_classes/feature_dim"));
        }
        Ok(())
    }
}

/// Draws the training and test sets; samples are ordered by class.
pub fn gen_synthetic<R: Rng + ?Sized>(task: &SyntheticTask, rng: &mut R) -> Result<(Samples, Samples)> {
    task.validate()?;
    let noise = Normal::new(0.0, task.noise_std).map_err(|e| Error::config(e.to_string()))?;
    let mut draw = |counts: &[usize]| {
        let mut out = Samples::empty(task.feature_dim, task.num_classes);
        let mut x = vec![0.0; task.feature_dim];
        for (c, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                for (xi, mi) in x.iter_mut().zip(&task.class_means[c]) {
                    *xi = mi + noise.sample(rng);
                }
                out.push(&x, c);
            }
        }
        out
    };
    let train = draw(&task.train_per_class);
    let test = draw(&task.test_per_class);
    Ok((train, test))
}

/// One device's local data.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceDataset {
    pub samples: Samples,
    pub label_dist: ClassDistribution,
    /// Positions of the samples in the training set they were drawn from.
    pub source_indices: Vec<usize>,
}

impl DeviceDataset {
    fn from_indices(train: &Samples, indices: Vec<usize>) -> Result<Self> {
        let samples = train.subset(&indices);
        let label_dist = samples.label_dist()?;
        Ok(Self {
            samples,
            label_dist,
            source_indices: indices,
        })
    }

    pub fn size(&self) -> usize {
        self.samples.len()
    }

    /// True when the device holds a single class; returns that class.
    pub fn single_class(&self) -> Option<usize> {
        let mut nonzero = self.label_dist.probs().iter().enumerate().filter(|(_, p)| **p > 0.0);
        let (c, _) = nonzero.next()?;
        nonzero.next().is_none().then_some(c)
    }
}

/// Result of splitting a training set across devices.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub devices: Vec<DeviceDataset>,
    /// Training samples left out by subsampling or rounding.
    pub dropped: usize,
}

impl Partition {
    /// Label distribution of the union of all device data.
    pub fn global_dist(&self) -> Result<ClassDistribution> {
        let classes = self.devices[0].samples.num_classes;
        let mut counts = vec![0; classes];
        for d in &self.devices {
            for (c, n) in counts.iter_mut().zip(d.samples.label_counts()) {
                *c += n;
            }
        }
        ClassDistribution::from_counts(&counts)
    }

    /// Union of all device data, device by device.
    pub fn pooled(&self) -> Samples {
        let first = &self.devices[0].samples;
        let mut out = Samples::empty(first.dim, first.num_classes);
        for d in &self.devices {
            out.features.extend_from_slice(&d.samples.features);
            out.labels.extend_from_slice(&d.samples.labels);
        }
        out
    }
}

/// Sizes `(n₁, n₂)` of the first and second class halves with `n₂/n₁ = r`,
/// as large as the available samples allow.
fn imbalanced_sizes(avail_first: usize, avail_second: usize, r: f64) -> (usize, usize) {
    let n1 = avail_first.min((avail_second as f64 / r).floor() as usize);
    let n2 = ((n1 as f64 * r).round() as usize).min(avail_second);
    (n1, n2)
}

/// Sort-and-partition split with imbalance ratio `r`.
pub fn sort_and_partition<R: Rng + ?Sized>(
    train: &Samples,
    devices: usize,
    shards_per_device: usize,
    r: f64,
    rng: &mut R,
) -> Result<Partition> {
    if devices == 0 || shards_per_device == 0 {
        return Err(Error::domain("need at least one device and one shard per device"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("imbalance ratio must be positive, got {r}")));
    }
    let half = train.num_classes / 2;
    let (mut first, mut second): (Vec<usize>, Vec<usize>) =
        (0..train.len()).partition(|&i| train.labels[i] < half);
    let (n1, n2) = imbalanced_sizes(first.len(), second.len(), r);
    if n1 == 0 || n2 == 0 {
        return Err(Error::domain(format!(
            "cannot reach imbalance ratio {r} with {} + {} samples",
            first.len(),
            second.len()
        )));
    }
    first.shuffle(rng);
    second.shuffle(rng);
    first.truncate(n1);
    second.truncate(n2);

    let mut pool: Vec<usize> = first.into_iter().chain(second).collect();
    pool.sort_by_key(|&i| (train.labels[i], i));

    let shards = devices * shards_per_device;
    let shard_size = pool.len() / shards;
    if shard_size == 0 {
        return Err(Error::domain(format!(
            "{} samples cannot fill {shards} shards",
            pool.len()
        )));
    }
    let bounds = |k: usize| {
        let start = k * shard_size;
        let end = if k + 1 == shards { pool.len() } else { start + shard_size };
        start..end
    };
    let mut order: Vec<usize> = (0..shards).collect();
    order.shuffle(rng);

    let parts = order
        .chunks(shards_per_device)
        .map(|ks| {
            let idx: Vec<usize> = ks.iter().flat_map(|&k| pool[bounds(k)].iter().copied()).collect();
            DeviceDataset::from_indices(train, idx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition {
        devices: parts,
        dropped: train.len() - pool.len(),
    })
}

/// Sample from `Dir(concentration)`. Gamma variates are drawn in log space
/// so tiny concentrations do not underflow to an all-zero vector.
pub fn sample_dirichlet<R: Rng + ?Sized>(concentration: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let mut logs = Vec::with_capacity(concentration.len());
    for &a in concentration {
        if a < 0.0 || !a.is_finite() {
            return Err(Error::domain(format!("Dirichlet concentration must be ≥ 0, got {a}")));
        }
        if a == 0.0 {
            logs.push(f64::NEG_INFINITY);
            continue;
        }
        // Gamma(a) = Gamma(a + 1) · U^{1/a} for a < 1.
        let shape = if a < 1.0 { a + 1.0 } else { a };
        let g: f64 = Gamma::new(shape, 1.0)
            .map_err(|e| Error::domain(e.to_string()))?
            .sample(rng);
        let mut lg = g.ln();
        if a < 1.0 {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            lg += u.ln() / a;
        }
        logs.push(lg);
    }
    let max = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::domain("Dirichlet concentration is all zero"));
    }
    let w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / s).collect())
}

/// Largest-remainder apportionment of `total` items by `shares`.
pub fn apportion(total: usize, shares: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().take(total.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
}

/// Dirichlet split: every device draws `p_v ~ Dir(α·p)` and holds the same
/// number of samples. The per-device quota is `samples_per_device` (default
/// `⌊N/V⌋`), lowered until no class is asked for more samples than exist.
pub fn dirichlet_partition<R: Rng + ?Sized>(
    train: &Samples,
    devices: usize,
    alpha: f64,
    samples_per_device: Option<usize>,
    rng: &mut R,
) -> Result<Partition> {
    if devices == 0 {
        return Err(Error::domain("need at least one device"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    let global = train.label_dist()?;
    let concentration: Vec<f64> = global.probs().iter().map(|p| alpha * p).collect();
    let mixes = (0..devices)
        .map(|_| sample_dirichlet(&concentration, rng))
        .collect::<Result<Vec<_>>>()?;

    let supply = train.label_counts();
    let fits = |m: usize| {
        let mut demand = vec![0; train.num_classes];
        for mix in &mixes {
            for (d, n) in demand.iter_mut().zip(apportion(m, mix)) {
                *d += n;
            }
        }
        demand.iter().zip(&supply).all(|(d, s)| d <= s)
    };
    let requested = samples_per_device.unwrap_or(train.len() / devices);
    if requested == 0 || !fits(1) {
        return Err(Error::domain(format!(
            "{} samples cannot give {devices} devices one sample each",
            train.len()
        )));
    }
    // `fits` is monotone in m: apportioned counts never shrink as m grows.
    let (mut lo, mut hi) = (1, requested);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let quota = lo;

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); train.num_classes];
    for i in 0..train.len() {
        by_class[train.labels[i]].push(i);
    }
    for pool in &mut by_class {
        pool.shuffle(rng);
    }
    let mut cursor = vec![0; train.num_classes];
    let parts = mixes
        .iter()
        .map(|mix| {
            let mut idx = Vec::with_capacity(quota);
            for (c, n) in apportion(quota, mix).into_iter().enumerate() {
                idx.extend_from_slice(&by_class[c][cursor[c]..cursor[c] + n]);
                cursor[c] += n;
            }
            DeviceDataset::from_indices(train, idx)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Partition {
        devices: parts,
        dropped: train.len() - quota * devices,
    })
}
