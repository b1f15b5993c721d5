//! Wireless federated-learning scheduling simulator.
//!
//! Devices in an uplink cell share a bandwidth budget; each one needs a
//! minimum bandwidth (closed form through the lower Lambert-W branch) to
//! upload its model before the deadline. The server picks which devices to
//! aggregate by minimizing the sum of two divergences: the sampling variance
//! `σ/√(n·b)` and the weighted earth moving distance between the scheduled
//! group's label mix and the global one.
//!
//! - [`channel`]: path loss, shadowing, rate, latency, minimum bandwidth.
//! - [`objective`]: WEMD, variance term, objective.
//! - [`schedulers`]: greedy, fix-sum coordinate descent, plain coordinate
//!   descent, exhaustive oracle, best-effort baselines, partition reduction.
//! - [`datagen`]: synthetic classification task and non-IID partitions.
//! - [`fltrain`]: softmax model, local SGD, aggregation, σ/G estimators,
//!   one training round.
//! - [`experiment`]: device placement, channel snapshots, multi-seed runs,
//!   solver benchmarks.

pub mod channel;
pub mod datagen;
pub mod error;
pub mod experiment;
pub mod fltrain;
pub mod lambert;
pub mod objective;
pub mod rng;
pub mod schedulers;

pub use error::{Error, Result};
