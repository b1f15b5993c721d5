//! Uplink radio link of one device: UMi street-canyon path loss, LOS
//! probability, log-normal shadowing, Shannon rate over an FDMA share, upload
//! latency, and the minimum bandwidth that meets the upload deadline.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::lambert_w_m1;

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Physical constants of the cell. All quantities are linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub carrier_freq_ghz: f64,
    pub total_bandwidth_hz: f64,
    pub tx_power_w: f64,
    /// Noise PSD with the receiver noise figure already applied.
    pub noise_psd_w_per_hz: f64,
    pub deadline_s: f64,
    pub model_bits: f64,
    pub cell_radius_m: f64,
    pub device_antenna_m: f64,
    pub bs_antenna_m: f64,
    pub shadow_std_los_db: f64,
    pub shadow_std_nlos_db: f64,
}

/// Parameter count of the two-block CNN used for CIFAR-10 (558 418 weights),
/// transmitted as 32-bit floats.
pub const DEFAULT_MODEL_BITS: f64 = 558_418.0 * 32.0;

impl Default for ChannelParams {
    fn default() -> Self {
        Self::from_link_budget(3.5, 20e6, 23.0, -174.0, 6.0, 2.0, DEFAULT_MODEL_BITS)
    }
}

impl ChannelParams {
    /// Builds parameters from a link budget in logarithmic units. The noise
    /// figure is folded into the noise PSD here, once.
    pub fn from_link_budget(
        carrier_freq_ghz: f64,
        total_bandwidth_hz: f64,
        tx_power_dbm: f64,
        noise_psd_dbm_per_hz: f64,
        noise_figure_db: f64,
        deadline_s: f64,
        model_bits: f64,
    ) -> Self {
        Self {
            carrier_freq_ghz,
            total_bandwidth_hz,
            tx_power_w: dbm_to_watts(tx_power_dbm),
            noise_psd_w_per_hz: dbm_to_watts(noise_psd_dbm_per_hz + noise_figure_db),
            deadline_s,
            model_bits,
            cell_radius_m: 250.0,
            device_antenna_m: 1.5,
            bs_antenna_m: 10.0,
            shadow_std_los_db: 4.0,
            shadow_std_nlos_db: 8.2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("carrier_freq_ghz", self.carrier_freq_ghz),
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("noise_psd_w_per_hz", self.noise_psd_w_per_hz),
            ("deadline_s", self.deadline_s),
            ("model_bits", self.model_bits),
            ("cell_radius_m", self.cell_radius_m),
            ("device_antenna_m", self.device_antenna_m),
            ("bs_antenna_m", self.bs_antenna_m),
            ("shadow_std_los_db", self.shadow_std_los_db),
            ("shadow_std_nlos_db", self.shadow_std_nlos_db),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::config(format!(
                    "channel.{name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }

    pub fn shadow_std_db(&self, is_los: bool) -> f64 {
        if is_los {
            self.shadow_std_los_db
        } else {
            self.shadow_std_nlos_db
        }
    }

    /// Feasibility parameter `Γ = N0·D·ln2 / (d·S·H̄)`.
    pub fn gamma(&self, gain: f64) -> f64 {
        self.noise_psd_w_per_hz * self.model_bits * LN_2
            / (self.deadline_s * self.tx_power_w * gain)
    }
}

/// Minimum bandwidth a device needs to finish its upload by the deadline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinBandwidth {
    Hz(f64),
    /// No finite bandwidth meets the deadline (`Γ ≥ 1`).
    Infeasible,
}

impl MinBandwidth {
    pub fn hz(self) -> Option<f64> {
        match self {
            MinBandwidth::Hz(b) => Some(b),
            MinBandwidth::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, MinBandwidth::Hz(_))
    }
}

/// LOS probability of the UMi street-canyon scenario at horizontal distance
/// `d2d_m`; equals 1 up to 18 m.
pub fn los_probability(d2d_m: f64) -> Result<f64> {
    if !(d2d_m > 0.0) || !d2d_m.is_finite() {
        return Err(Error::domain(format!("2-D distance must be positive, got {d2d_m}")));
    }
    if d2d_m <= 18.0 {
        return Ok(1.0);
    }
    let near = 18.0 / d2d_m;
    Ok((near + (-d2d_m / 36.0).exp() * (1.0 - near)).clamp(0.0, 1.0))
}

/// UMi street-canyon path loss in dB.
pub fn path_loss_db(d3d_m: f64, f_ghz: f64, is_los: bool) -> Result<f64> {
    if !(d3d_m > 0.0) || !(f_ghz > 0.0) {
        return Err(Error::domain(format!(
            "path loss needs positive distance and frequency, got d={d3d_m}, f={f_ghz}"
        )));
    }
    let slope = if is_los { 21.0 } else { 31.9 };
    Ok(32.4 + slope * d3d_m.log10() + 20.0 * f_ghz.log10())
}

/// Average channel gain `H̄` from total attenuation in dB.
pub fn avg_channel_gain(pl_db: f64, shadow_db: f64) -> f64 {
    10f64.powf(-(pl_db + shadow_db) / 10.0)
}

/// Shannon rate of an FDMA share `bw_hz` in bits/s.
pub fn transmission_rate(bw_hz: f64, gain: f64, params: &ChannelParams) -> Result<f64> {
    if !(bw_hz > 0.0) {
        return Err(Error::domain(format!("bandwidth must be positive, got {bw_hz}")));
    }
    if !(gain >= 0.0) {
        return Err(Error::domain(format!("gain must be non-negative, got {gain}")));
    }
    let snr = params.tx_power_w * gain / (bw_hz * params.noise_psd_w_per_hz);
    Ok(bw_hz * snr.ln_1p() / LN_2)
}

/// Time to upload `model_bits` at `rate` bits/s; `None` when the rate is zero.
pub fn upload_latency(model_bits: f64, rate: f64) -> Option<f64> {
    (rate > 0.0).then(|| model_bits / rate)
}

/// Smallest bandwidth for which the upload latency equals the deadline.
///
/// `B* = −D·ln2 / (d·(W₋₁(−Γe^{−Γ}) + Γ))`. The principal branch returns
/// `−Γ` itself, so only the lower branch gives a finite answer.
pub fn min_bandwidth(gain: f64, params: &ChannelParams) -> Result<MinBandwidth> {
    if !(gain > 0.0) || !gain.is_finite() {
        return Err(Error::domain(format!("gain must be positive, got {gain}")));
    }
    let gamma = params.gamma(gain);
    if gamma >= 1.0 {
        return Ok(MinBandwidth::Infeasible);
    }
    let w = lambert_w_m1(-gamma * (-gamma).exp())?;
    let denom = w + gamma;
    if !(denom < 0.0) {
        return Ok(MinBandwidth::Infeasible);
    }
    Ok(MinBandwidth::Hz(
        -params.model_bits * LN_2 / (params.deadline_s * denom),
    ))
}

/// One device's link during one round.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub d2d_m: f64,
    pub d3d_m: f64,
    pub is_los: bool,
    pub shadow_db: f64,
    pub avg_gain: f64,
    pub min_bandwidth: MinBandwidth,
}

impl LinkState {
    pub fn new(d2d_m: f64, is_los: bool, shadow_db: f64, params: &ChannelParams) -> Result<Self> {
        let dh = params.bs_antenna_m - params.device_antenna_m;
        let d3d_m = d2d_m.hypot(dh);
        let pl = path_loss_db(d3d_m, params.carrier_freq_ghz, is_los)?;
        let avg_gain = avg_channel_gain(pl, shadow_db);
        Ok(Self {
            d2d_m,
            d3d_m,
            is_los,
            shadow_db,
            avg_gain,
            min_bandwidth: min_bandwidth(avg_gain, params)?,
        })
    }
}
