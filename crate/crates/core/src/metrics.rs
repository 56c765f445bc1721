//! SINR, per-user rate and weighted sum-rate.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{dotu, CVector};
use crate::subarray::{equivalent_channels, PartitionPlan, PhaseVector};
use crate::wmmse::PrecoderMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub sinr: Vec<f64>,
    /// bits/s/Hz
    pub rate: Vec<f64>,
    /// `Σ ω_j rate_j`
    pub wsr: f64,
    pub weights: Vec<f64>,
}

/// Rates for given equivalent row channels `ȟ_j`.
pub fn rates_from_equivalent(
    equiv: &[CVector],
    precoder: &PrecoderMatrix,
    weights: &[f64],
    noise: f64,
) -> Result<RateReport> {
    if !(noise > 0.0) {
        return Err(Error::Domain(format!(
            "noise power must be positive, got {noise}"
        )));
    }
    let users = equiv.len();
    let mut sinr = Vec::with_capacity(users);
    for (j, h) in equiv.iter().enumerate() {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for i in 0..precoder.users() {
            let p = dotu(h, &precoder.column(i)).norm_sqr();
            if i == j {
                signal = p;
            } else {
                interference += p;
            }
        }
        sinr.push(signal / (interference + noise));
    }
    let rate: Vec<f64> = sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let wsr = rate.iter().zip(weights).map(|(r, w)| r * w).sum();
    Ok(RateReport {
        sinr,
        rate,
        wsr,
        weights: weights.to_vec(),
    })
}

/// SINR and rates of every user for a full configuration `(Θ, W, V)`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    channels: &ChannelSet,
    theta: &PhaseVector,
    precoder: &PrecoderMatrix,
    receive: &[CVector],
    plan: &PartitionPlan,
    weights: &[f64],
    noise: f64,
) -> Result<RateReport> {
    let equiv = equivalent_channels(channels, theta, plan, receive);
    rates_from_equivalent(&equiv, precoder, weights, noise)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Thermal noise power in watts for a PSD in dBm/Hz over `bandwidth_hz`.
pub fn noise_power(psd_dbm_per_hz: f64, bandwidth_hz: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::Domain(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    Ok(dbm_to_watts(psd_dbm_per_hz + 10.0 * bandwidth_hz.log10()))
}
