//! Dynamic RIS subarray structure.
//!
//! In subarray mode the `N²` RIS elements are cut into `P = J` contiguous
//! blocks and block `j` reflects only towards user `j`: user `j`'s effective
//! channel contains the reflection of its own block and nothing else. In whole
//! mode every user sees the full surface.

use std::ops::Range;

use rand::Rng;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{cis, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    Whole,
    Subarray,
}

impl PartitionMode {
    pub fn label(&self) -> &'static str {
        match self {
            PartitionMode::Whole => "whole",
            PartitionMode::Subarray => "subarray",
        }
    }
}

/// Element blocks and their pairing with users (user `j` owns block `j`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPlan {
    mode: PartitionMode,
    elements: usize,
    users: usize,
    blocks: Vec<Range<usize>>,
}

/// Splits `elements` RIS elements for `users` users. Blocks are zero-based
/// half-open ranges.
pub fn make_partition(elements: usize, users: usize, mode: PartitionMode) -> Result<PartitionPlan> {
    if elements == 0 {
        return Err(Error::config(
            "ris_side",
            "the RIS needs at least one element",
        ));
    }
    if users == 0 {
        return Err(Error::config("users", "at least one user is required"));
    }
    let blocks = match mode {
        PartitionMode::Whole => std::iter::once(0..elements).collect(),
        PartitionMode::Subarray => {
            if !elements.is_multiple_of(users) {
                return Err(Error::config(
                    "users",
                    format!(
                        "subarray mode needs the element count to be divisible by the user count: \
                         {elements} mod {users} = {}",
                        elements % users
                    ),
                ));
            }
            let size = elements / users;
            (0..users).map(|p| p * size..(p + 1) * size).collect()
        }
    };
    Ok(PartitionPlan {
        mode,
        elements,
        users,
        blocks,
    })
}

impl PartitionPlan {
    pub fn mode(&self) -> PartitionMode {
        self.mode
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Number of subarrays `P` (1 in whole mode).
    pub fn subarrays(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Range<usize>] {
        &self.blocks
    }

    /// Elements reflecting towards user `j`.
    pub fn active_block(&self, j: usize) -> Range<usize> {
        match self.mode {
            PartitionMode::Whole => 0..self.elements,
            PartitionMode::Subarray => self.blocks[j].clone(),
        }
    }

    /// Users whose channels depend on block `p`.
    pub fn users_of_block(&self, p: usize) -> Range<usize> {
        match self.mode {
            PartitionMode::Whole => 0..self.users,
            PartitionMode::Subarray => p..p + 1,
        }
    }
}

/// RIS reflection coefficients `θ_n = e^{jψ_n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    theta: CVector,
}

const UNIT_TOL: f64 = 1e-9;

impl PhaseVector {
    pub fn new(theta: CVector) -> Result<Self> {
        if let Some(n) = theta.iter().position(|z| (z.norm() - 1.0).abs() > UNIT_TOL) {
            return Err(Error::Domain(format!(
                "phase entry {n} has modulus {} (must be 1)",
                theta[n].norm()
            )));
        }
        Ok(Self { theta })
    }

    pub fn from_angles(psi: &[f64]) -> Self {
        Self {
            theta: CVector::from_iterator(psi.len(), psi.iter().map(|&p| cis(p))),
        }
    }

    pub fn ones(n: usize) -> Self {
        Self::from_angles(&vec![0.0; n])
    }

    /// Phases drawn uniformly on the unit circle.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let psi: Vec<f64> = (0..n)
            .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
            .collect();
        Self::from_angles(&psi)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn as_vector(&self) -> &CVector {
        &self.theta
    }

    pub fn get(&self, n: usize) -> num_complex::Complex64 {
        self.theta[n]
    }

    pub fn set_angle(&mut self, n: usize, psi: f64) {
        self.theta[n] = cis(psi);
    }

    /// Sets entry `n` to a value already on the unit circle.
    pub fn set(&mut self, n: usize, value: num_complex::Complex64) {
        debug_assert!((value.norm() - 1.0).abs() <= UNIT_TOL);
        self.theta[n] = value;
    }

    pub fn angles(&self) -> Vec<f64> {
        self.theta.iter().map(|z| z.arg()).collect()
    }
}

/// `H_j = H_d,j + H_r,j[:, B] diag(θ_B) G[B, :]` over user `j`'s active block `B`.
pub fn effective_channel(
    j: usize,
    channels: &ChannelSet,
    theta: &PhaseVector,
    plan: &PartitionPlan,
) -> CMatrix {
    let block = plan.active_block(j);
    let len = block.len();
    let mut scaled = channels.ris_to_user[j]
        .columns(block.start, len)
        .into_owned();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= theta.get(block.start + k);
    }
    &channels.direct[j] + scaled * channels.bs_to_ris.rows(block.start, len)
}

/// `(v^H M)` returned as a column holding the row entries.
fn left_apply(v: &CVector, m: &CMatrix) -> CVector {
    m.transpose() * v.conjugate()
}

/// `ȟ_j = v_j^H H_j`, the 1 x (BS antennas) channel seen after receive combining.
pub fn equivalent_row_channel(
    j: usize,
    channels: &ChannelSet,
    theta: &PhaseVector,
    plan: &PartitionPlan,
    v: &CVector,
) -> CVector {
    left_apply(v, &effective_channel(j, channels, theta, plan))
}

/// Direct part `v_j^H H_d,j` of the equivalent channel.
pub fn direct_row_channel(j: usize, channels: &ChannelSet, v: &CVector) -> CVector {
    left_apply(v, &channels.direct[j])
}

/// `diag(v_j^H H_r,j) G` restricted to user `j`'s active block, so that
/// `ȟ_j = v_j^H H_d,j + θ_B^T · cascade`.
pub fn ris_cascade_matrix(
    j: usize,
    channels: &ChannelSet,
    v: &CVector,
    plan: &PartitionPlan,
) -> CMatrix {
    let block = plan.active_block(j);
    let len = block.len();
    let reflect = left_apply(
        v,
        &channels.ris_to_user[j]
            .columns(block.start, len)
            .into_owned(),
    );
    let mut cascade = channels.bs_to_ris.rows(block.start, len).into_owned();
    for (k, mut row) in cascade.row_iter_mut().enumerate() {
        row *= reflect[k];
    }
    cascade
}

/// Equivalent channels of every user.
pub fn equivalent_channels(
    channels: &ChannelSet,
    theta: &PhaseVector,
    plan: &PartitionPlan,
    receive: &[CVector],
) -> Vec<CVector> {
    (0..channels.users())
        .map(|j| equivalent_row_channel(j, channels, theta, plan, &receive[j]))
        .collect()
}
