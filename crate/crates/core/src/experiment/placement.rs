//! Device placement and per-round channel snapshots.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::{los_probability, ChannelParams, LinkState};
use crate::error::{Error, Result};
use crate::rng::{stream, Stream};

/// Ground position relative to the base station, in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn distance(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// `count` positions uniform over the disk of `radius` (area-uniform, so
/// the distance is `R·√u`).
pub fn place_devices<R: Rng + ?Sized>(count: usize, radius: f64, rng: &mut R) -> Result<Vec<Position>> {
    if count == 0 {
        return Err(Error::domain("need at least one device"));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(format!("cell radius must be positive, got {radius}")));
    }
    Ok((0..count)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            Position {
                x: r * theta.cos(),
                y: r * theta.sin(),
            }
        })
        .collect())
}

/// A placed fleet; line of sight is drawn once per placement.
#[derive(Debug, Clone, PartialEq)]
pub struct Fleet {
    pub positions: Vec<Position>,
    pub is_los: Vec<bool>,
}

impl Fleet {
    /// Places `count` devices and draws their line-of-sight state from the
    /// streams of `placement_seed`.
    pub fn place(count: usize, params: &ChannelParams, placement_seed: u64) -> Result<Self> {
        let mut rng = stream(placement_seed, Stream::Placement, 0, 0);
        let positions = place_devices(count, params.cell_radius_m, &mut rng)?;
        let is_los = positions
            .iter()
            .enumerate()
            .map(|(v, p)| {
                let prob = los_probability(p.distance())?;
                Ok(stream(placement_seed, Stream::LineOfSight, v as u64, 0).random_bool(prob))
            })
            .collect::<Result<_>>()?;
        Ok(Self { positions, is_los })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Link states for `round`, with fresh shadowing from the `seed` streams.
pub fn snapshot_channel(fleet: &Fleet, params: &ChannelParams, round: u64, seed: u64) -> Result<Vec<LinkState>> {
    fleet
        .positions
        .iter()
        .zip(&fleet.is_los)
        .enumerate()
        .map(|(v, (p, &los))| {
            let std = params.shadow_std_db(los);
            let shadow = Normal::new(0.0, std)
                .map_err(|e| Error::domain(e.to_string()))?
                .sample(&mut stream(seed, Stream::Shadowing, round, v as u64));
            LinkState::new(p.distance(), los, shadow, params)
        })
        .collect()
}
