//! Quantized joint beamforming by local search (WMMSE-LS).
//!
//! Receive vectors are picked user by user from a quantized angle grid, then
//! RIS phases are fixed element by element from an `r`-bit codebook while the
//! BS precoder is recomputed by WMMSE for every candidate. Undecided entries
//! are filled with random codebook draws.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;

use crate::channel::{steering_vector, ChannelSet, UpaGeometry};
use crate::error::Result;
use crate::linalg::{CVector, ONE};
use crate::metrics::{evaluate, rates_from_equivalent};
use crate::subarray::{equivalent_channels, PartitionPlan, PhaseVector};
use crate::wmmse::{mrt_precoder, wmmse_precoder, PrecoderMatrix, WmmseOptions};
use num_complex::Complex64;

/// `r`-bit RIS codebook `{e^{j 2πk / 2^r}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedPhaseSet {
    bits: u32,
    values: Vec<Complex64>,
}

impl QuantizedPhaseSet {
    pub fn new(bits: u32) -> Self {
        let count = 1usize << bits;
        let values = (0..count)
            .map(|k| {
                // axis points exactly
                if (4 * k) % count == 0 {
                    match 4 * k / count {
                        0 => ONE,
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, TAU * k as f64 / count as f64)
                }
            })
            .collect();
        Self { bits, values }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.values.contains(&z)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        self.values[rng.random_range(0..self.values.len())]
    }
}

/// Quantized receive directions for the users' UPAs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveGrid {
    pub azimuths: Vec<f64>,
    pub elevations: Vec<f64>,
}

impl ReceiveGrid {
    /// `2^q1` azimuths spanning `(0, π]` and `2^q2` elevations spanning `(-π/2, π/2]`.
    pub fn from_bits(q1: u32, q2: u32) -> Self {
        let na = 1usize << q1;
        let ne = 1usize << q2;
        Self {
            azimuths: (1..=na).map(|k| k as f64 * PI / na as f64).collect(),
            elevations: (1..=ne)
                .map(|k| k as f64 * PI / ne as f64 - FRAC_PI_2)
                .collect(),
        }
    }

    /// Step-`π/q` grids: `{0, π/q1, …, π}` and `{-π/2, π/q2 - π/2, …, π/2}`.
    pub fn with_steps(q1: u32, q2: u32) -> Self {
        let q1 = q1.max(1);
        let q2 = q2.max(1);
        Self {
            azimuths: (0..=q1).map(|k| k as f64 * PI / q1 as f64).collect(),
            elevations: (0..=q2)
                .map(|k| k as f64 * PI / q2 as f64 - FRAC_PI_2)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.azimuths.len() * self.elevations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unit-norm candidates `a(φ, ϕ) / sqrt(W·H)`, azimuth-major.
    pub fn candidates(&self, geom: &UpaGeometry) -> Vec<CVector> {
        let scale = Complex64::from(1.0 / (geom.elements() as f64).sqrt());
        self.azimuths
            .iter()
            .flat_map(|&az| {
                self.elevations
                    .iter()
                    .map(move |&el| steering_vector(geom, az, el) * scale)
            })
            .collect()
    }
}

/// Weights, noise and power budget used to score candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub weights: Vec<f64>,
    pub noise: f64,
    pub power: f64,
}

/// Greedy per-user receive-vector selection.
///
/// User `j` scores every grid candidate with users `< j` fixed and users
/// `> j` at one random grid draw; the score is the WSR under a full-power MRT
/// precoder with all RIS phases at 1. Ties keep the lowest candidate index.
pub fn search_receive_vectors<R: Rng + ?Sized>(
    channels: &ChannelSet,
    plan: &PartitionPlan,
    grid: &ReceiveGrid,
    user_geom: &UpaGeometry,
    budget: &LinkBudget,
    rng: &mut R,
) -> Result<Vec<CVector>> {
    let candidates = grid.candidates(user_geom);
    let users = channels.users();
    let theta = PhaseVector::ones(channels.ris_elements());
    let mut chosen: Vec<usize> = Vec::with_capacity(users);

    for j in 0..users {
        let tail: Vec<usize> = (j + 1..users)
            .map(|_| rng.random_range(0..candidates.len()))
            .collect();
        let mut best: Option<(usize, f64)> = None;
        for c in 0..candidates.len() {
            let receive: Vec<CVector> = chosen
                .iter()
                .chain(std::iter::once(&c))
                .chain(&tail)
                .map(|&k| candidates[k].clone())
                .collect();
            let equiv = equivalent_channels(channels, &theta, plan, &receive);
            let precoder = mrt_precoder(&equiv, channels.bs_antennas(), budget.power);
            let score =
                rates_from_equivalent(&equiv, &precoder, &budget.weights, budget.noise)?.wsr;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((c, score));
            }
        }
        chosen.push(best.map_or(0, |(c, _)| c));
    }
    Ok(chosen.into_iter().map(|k| candidates[k].clone()).collect())
}

#[derive(Debug, Clone)]
pub struct LsOutcome {
    pub theta: PhaseVector,
    pub precoder: PrecoderMatrix,
    pub wsr: f64,
    /// Number of WMMSE solves, `2^r · N²`.
    pub evaluations: usize,
}

/// Element-wise local search over the quantized phase codebook.
///
/// For each element `n` the entries after `n` are redrawn once, every codebook
/// value is tried at `n` with a fresh WMMSE precoder, and `n` keeps the best
/// one. The best configuration seen at any point is returned.
#[allow(clippy::too_many_arguments)]
pub fn ls_optimize<R: Rng + ?Sized>(
    channels: &ChannelSet,
    plan: &PartitionPlan,
    receive: &[CVector],
    phase_set: &QuantizedPhaseSet,
    budget: &LinkBudget,
    wmmse: &WmmseOptions,
    rng: &mut R,
) -> Result<LsOutcome> {
    let elements = plan.elements();
    let mut theta = PhaseVector::ones(elements);
    let mut best: Option<(PhaseVector, PrecoderMatrix, f64)> = None;
    let mut evaluations = 0;

    for n in 0..elements {
        for m in n + 1..elements {
            theta.set(m, phase_set.draw(rng));
        }
        let mut best_here: Option<(Complex64, f64)> = None;
        for &candidate in phase_set.values() {
            theta.set(n, candidate);
            let equiv = equivalent_channels(channels, &theta, plan, receive);
            let solved =
                wmmse_precoder(&equiv, &budget.weights, budget.noise, budget.power, wmmse)?;
            evaluations += 1;
            let wsr = evaluate(
                channels,
                &theta,
                &solved.precoder,
                receive,
                plan,
                &budget.weights,
                budget.noise,
            )?
            .wsr;
            if best_here.is_none_or(|(_, r)| wsr > r) {
                best_here = Some((candidate, wsr));
            }
            if best.as_ref().is_none_or(|(_, _, r)| wsr > *r) {
                best = Some((theta.clone(), solved.precoder, wsr));
            }
        }
        if let Some((value, _)) = best_here {
            theta.set(n, value);
        }
    }

    let (theta, precoder, wsr) = match best {
        Some(b) => b,
        None => (
            theta,
            PrecoderMatrix::zeros(channels.bs_antennas(), channels.users()),
            0.0,
        ),
    };
    Ok(LsOutcome {
        theta,
        precoder,
        wsr,
        evaluations,
    })
}
