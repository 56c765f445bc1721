//! Joint active/passive beamforming for a RIS-aided THz multiuser MIMO downlink.
//!
//! The RIS can run as one shared surface ([`PartitionMode::Whole`]) or split into
//! contiguous subarrays, one per user ([`PartitionMode::Subarray`]). Two joint
//! optimizers are provided:
//!
//! - [`ls::ls_optimize`]: greedy element-by-element search over quantized RIS
//!   phases with a WMMSE precoder at the base station for every candidate.
//! - [`bcd::bcd_solve`]: block coordinate ascent on the fractional-programming
//!   reformulation of the weighted sum-rate, with continuous RIS phases and a
//!   prox-linear precoder step.
//!
//! [`metrics::evaluate`] is the single source of truth for SINR and rates, and
//! [`harness`] drives seeded Monte-Carlo sweeps that write CSV results.
//!
//! Matrix conventions used throughout:
//!
//! | quantity           | shape                         |
//! |--------------------|-------------------------------|
//! | direct `H_d,j`     | user antennas x BS antennas   |
//! | BS to RIS `G`      | RIS elements x BS antennas    |
//! | RIS to user `H_r,j`| user antennas x RIS elements  |
//! | precoder `W`       | BS antennas x users           |
//!
//! An equivalent channel `ȟ_j = v_j^H H_j` is stored as a column vector holding
//! the entries of the row; its action on a precoder column is the unconjugated
//! product [`linalg::dotu`].

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bcd;
pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ls;
pub mod metrics;
pub mod subarray;
pub mod wmmse;

pub use channel::{ChannelSet, RicianParams, ScenarioGeometry, UpaGeometry};
pub use error::{Error, Result};
pub use harness::config::SystemConfig;
pub use metrics::RateReport;
pub use subarray::{PartitionMode, PartitionPlan, PhaseVector};
pub use wmmse::PrecoderMatrix;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
