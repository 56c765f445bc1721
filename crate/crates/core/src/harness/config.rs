//! Experiment configuration and its TOML file format.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelSpec, GainNormalization, RicianParams, UpaGeometry};
use crate::error::{Error, Result};
use crate::metrics::{dbm_to_watts, noise_power};
use crate::subarray::PartitionMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    WmmseLs,
    Bcd,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::WmmseLs => "wmmse_ls",
            Algorithm::Bcd => "bcd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// `σ² = 1`, `P = 10^(SNR/10)`, zone-referenced channel gains.
    NormalizedSnr,
    /// Noise from PSD and bandwidth, absolute transmit power and pathloss.
    PhysicalDbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsRule {
    /// `ω_j = 1`
    Uniform,
    /// `ω_j ∝ 10^(-PL_direct,j / 10)`, scaled so `Σ ω_j = J`.
    InversePathloss,
}

/// Everything needed to reproduce a run. All fields are required in the file
/// except the power field that the power mode does not use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// BS UPA `N_t x M_t`.
    pub bs_width: usize,
    pub bs_height: usize,
    /// User UPA `N_r x M_r`.
    pub user_width: usize,
    pub user_height: usize,
    /// RIS side `N`; the surface has `N²` elements.
    pub ris_side: usize,
    pub users: usize,
    /// RIS phase resolution `r` (bits).
    pub phase_bits: u32,
    /// Receive grid resolution `q1` (azimuth) and `q2` (elevation), in bits.
    pub azimuth_bits: u32,
    pub elevation_bits: u32,
    pub mode: PartitionMode,
    pub algorithm: Algorithm,
    pub power_mode: PowerMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    pub k1: f64,
    pub k2: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    /// Element spacing over wavelength for every array.
    pub spacing_ratio: f64,
    pub weights_rule: WeightsRule,
    pub seed_base: u64,
    pub trials: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bs_width: 2,
            bs_height: 2,
            user_width: 2,
            user_height: 2,
            ris_side: 10,
            users: 4,
            phase_bits: 1,
            azimuth_bits: 2,
            elevation_bits: 1,
            mode: PartitionMode::Subarray,
            algorithm: Algorithm::Bcd,
            power_mode: PowerMode::NormalizedSnr,
            snr_db: Some(5.0),
            tx_power_dbm: None,
            k1: 10.0,
            k2: 10.0,
            carrier_ghz: 100.0,
            bandwidth_hz: 10e9,
            noise_psd_dbm_hz: -220.0,
            spacing_ratio: 0.5,
            weights_rule: WeightsRule::Uniform,
            seed_base: 0,
            trials: 10,
            tol: 1e-4,
            max_iter: 200,
        }
    }
}

fn positive_count(field: &str, value: usize) -> Result<()> {
    if value == 0 {
        Err(Error::config(field, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

impl SystemConfig {
    pub fn elements(&self) -> usize {
        self.ris_side * self.ris_side
    }

    pub fn validate(&self) -> Result<()> {
        positive_count("bs_width", self.bs_width)?;
        positive_count("bs_height", self.bs_height)?;
        positive_count("user_width", self.user_width)?;
        positive_count("user_height", self.user_height)?;
        positive_count("ris_side", self.ris_side)?;
        positive_count("users", self.users)?;
        positive_count("trials", self.trials)?;
        positive_count("max_iter", self.max_iter)?;
        if self.phase_bits > 16 {
            return Err(Error::config("phase_bits", "at most 16 bits are supported"));
        }
        if self.azimuth_bits > 16 || self.elevation_bits > 16 {
            return Err(Error::config(
                "azimuth_bits",
                "receive grids are limited to 16 bits",
            ));
        }
        if self.mode == PartitionMode::Subarray && !self.elements().is_multiple_of(self.users) {
            return Err(Error::config(
                "users",
                format!(
                    "subarray mode needs N² divisible by J, but {} mod {} = {}",
                    self.elements(),
                    self.users,
                    self.elements() % self.users
                ),
            ));
        }
        match self.power_mode {
            PowerMode::NormalizedSnr => {
                if self.tx_power_dbm.is_some() {
                    return Err(Error::config(
                        "tx_power_dbm",
                        "not used with power_mode = normalized_snr",
                    ));
                }
                match self.snr_db {
                    Some(v) if v.is_finite() => {}
                    _ => {
                        return Err(Error::config(
                            "snr_db",
                            "required (finite) with power_mode = normalized_snr",
                        ))
                    }
                }
            }
            PowerMode::PhysicalDbm => {
                if self.snr_db.is_some() {
                    return Err(Error::config(
                        "snr_db",
                        "not used with power_mode = physical_dbm",
                    ));
                }
                match self.tx_power_dbm {
                    Some(v) if v.is_finite() => {}
                    _ => {
                        return Err(Error::config(
                            "tx_power_dbm",
                            "required (finite) with power_mode = physical_dbm",
                        ))
                    }
                }
            }
        }
        if !(self.k1 >= 0.0) {
            return Err(Error::config("k1", "Rician factor must be non-negative"));
        }
        if !(self.k2 >= 0.0) {
            return Err(Error::config("k2", "Rician factor must be non-negative"));
        }
        positive("carrier_ghz", self.carrier_ghz)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        positive("spacing_ratio", self.spacing_ratio)?;
        if !self.noise_psd_dbm_hz.is_finite() {
            return Err(Error::config("noise_psd_dbm_hz", "must be finite"));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::config("tol", "must be non-negative"));
        }
        Ok(())
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: SystemConfig =
            toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn rician(&self) -> RicianParams {
        RicianParams {
            k1: self.k1,
            k2: self.k2,
        }
    }

    pub fn channel_spec(&self) -> ChannelSpec {
        ChannelSpec {
            bs: UpaGeometry {
                width: self.bs_width,
                height: self.bs_height,
                spacing_ratio: self.spacing_ratio,
            },
            ris: UpaGeometry {
                width: self.ris_side,
                height: self.ris_side,
                spacing_ratio: self.spacing_ratio,
            },
            user: self.user_geometry(),
            carrier_ghz: self.carrier_ghz,
            normalization: match self.power_mode {
                PowerMode::NormalizedSnr => GainNormalization::ZoneReferenced,
                PowerMode::PhysicalDbm => GainNormalization::Absolute,
            },
        }
    }

    pub fn user_geometry(&self) -> UpaGeometry {
        UpaGeometry {
            width: self.user_width,
            height: self.user_height,
            spacing_ratio: self.spacing_ratio,
        }
    }

    /// Noise power `σ²`.
    pub fn noise(&self) -> Result<f64> {
        match self.power_mode {
            PowerMode::NormalizedSnr => Ok(1.0),
            PowerMode::PhysicalDbm => noise_power(self.noise_psd_dbm_hz, self.bandwidth_hz),
        }
    }

    /// BS power budget `P`.
    pub fn power(&self) -> Result<f64> {
        match self.power_mode {
            PowerMode::NormalizedSnr => self
                .snr_db
                .map(|snr| 10f64.powf(snr / 10.0))
                .ok_or_else(|| Error::config("snr_db", "missing")),
            PowerMode::PhysicalDbm => self
                .tx_power_dbm
                .map(dbm_to_watts)
                .ok_or_else(|| Error::config("tx_power_dbm", "missing")),
        }
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    SystemConfig::from_toml(&std::fs::read_to_string(path)?)
}

pub fn write_config(config: &SystemConfig, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, config.to_toml())?;
    Ok(())
}
