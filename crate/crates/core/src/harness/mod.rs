//! Seeded Monte-Carlo experiments.
//!
//! Trial `t` uses seed `seed_base + t`. Each seed feeds three independent
//! ChaCha8 streams: user placement, channel draws and the optimizer's own
//! randomness. Every arm of a comparison and every value of a sweep therefore
//! sees the same scenario for a given trial. Trials may run in parallel; results
//! are collected in trial order, so the output never depends on scheduling.

pub mod config;
pub mod output;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bcd::{bcd_solve, BcdOptions, BcdProblem};
use crate::channel::{build_channel_set, pathloss_db, ChannelSet, LinkKind, ScenarioGeometry};
use crate::error::{Error, Result};
use crate::ls::{ls_optimize, search_receive_vectors, LinkBudget, QuantizedPhaseSet, ReceiveGrid};
use crate::subarray::{make_partition, PartitionMode};
use crate::wmmse::WmmseOptions;

pub use config::{load_config, write_config, Algorithm, PowerMode, SystemConfig, WeightsRule};
pub use output::{write_comparison, write_results};

const STREAM_GEOMETRY: u64 = 0;
const STREAM_CHANNEL: u64 = 1;
const STREAM_ALGORITHM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-trial seeds `seed_base, seed_base + 1, …`.
pub fn trial_seeds(config: &SystemConfig) -> Vec<u64> {
    (0..config.trials as u64)
        .map(|t| config.seed_base.wrapping_add(t))
        .collect()
}

/// Geometry and channels of one trial.
pub fn draw_scenario(config: &SystemConfig, seed: u64) -> Result<(ScenarioGeometry, ChannelSet)> {
    let geometry =
        ScenarioGeometry::sample_reference(config.users, &mut stream(seed, STREAM_GEOMETRY));
    let channels = build_channel_set(
        &config.channel_spec(),
        &geometry,
        &config.rician(),
        &mut stream(seed, STREAM_CHANNEL),
    )?;
    Ok((geometry, channels))
}

/// User weights `ω_j` under the configured rule; always strictly positive.
pub fn user_weights(config: &SystemConfig, geometry: &ScenarioGeometry) -> Result<Vec<f64>> {
    match config.weights_rule {
        WeightsRule::Uniform => Ok(vec![1.0; geometry.user_positions.len()]),
        WeightsRule::InversePathloss => {
            let losses = geometry
                .user_positions
                .iter()
                .map(|&u| {
                    pathloss_db(
                        LinkKind::Direct,
                        crate::channel::distance(geometry.bs_position, u),
                        config.carrier_ghz,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            // relative to the smallest loss to stay clear of underflow
            let min = losses.iter().cloned().fold(f64::INFINITY, f64::min);
            let raw: Vec<f64> = losses
                .iter()
                .map(|l| 10f64.powf(-(l - min) / 10.0))
                .collect();
            let total: f64 = raw.iter().sum();
            let users = raw.len() as f64;
            Ok(raw.iter().map(|r| r * users / total).collect())
        }
    }
}

/// Outcome of one algorithm on one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub wsr: f64,
    /// Unweighted per-user rates, bits/s/Hz.
    pub rates: Vec<f64>,
    pub iterations_used: usize,
    pub wall_ms: f64,
    /// WSR trajectory (BCD only: initialization then each outer iteration).
    pub wsr_history: Vec<f64>,
    pub rate_history: Vec<Vec<f64>>,
    /// WSR of the starting point (BCD), or of the LS result.
    pub initial_wsr: f64,
    pub channel_fingerprint: u64,
}

/// Runs `algorithm` in `mode` on the scenario of `seed`.
pub fn run_trial(
    config: &SystemConfig,
    seed: u64,
    algorithm: Algorithm,
    mode: PartitionMode,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let (geometry, channels) = draw_scenario(config, seed)?;
    let plan = make_partition(config.elements(), config.users, mode)?;
    let budget = LinkBudget {
        weights: user_weights(config, &geometry)?,
        noise: config.noise()?,
        power: config.power()?,
    };
    let mut rng = stream(seed, STREAM_ALGORITHM);
    let grid = ReceiveGrid::from_bits(config.azimuth_bits, config.elevation_bits);
    let receive = search_receive_vectors(
        &channels,
        &plan,
        &grid,
        &config.user_geometry(),
        &budget,
        &mut rng,
    )?;
    let wmmse = WmmseOptions {
        tol: config.tol,
        max_iter: config.max_iter,
    };

    let mut record = match algorithm {
        Algorithm::WmmseLs => {
            let out = ls_optimize(
                &channels,
                &plan,
                &receive,
                &QuantizedPhaseSet::new(config.phase_bits),
                &budget,
                &wmmse,
                &mut rng,
            )?;
            let report = crate::metrics::evaluate(
                &channels,
                &out.theta,
                &out.precoder,
                &receive,
                &plan,
                &budget.weights,
                budget.noise,
            )?;
            TrialRecord {
                seed,
                wsr: report.wsr,
                rates: report.rate.clone(),
                iterations_used: out.evaluations,
                wall_ms: 0.0,
                wsr_history: vec![report.wsr],
                rate_history: vec![report.rate],
                initial_wsr: report.wsr,
                channel_fingerprint: 0,
            }
        }
        Algorithm::Bcd => {
            let problem = BcdProblem {
                channels: &channels,
                plan: &plan,
                receive: &receive,
                weights: &budget.weights,
                noise: budget.noise,
                power: budget.power,
            };
            let options = BcdOptions {
                tol: config.tol,
                max_outer: config.max_iter,
                wmmse,
                ..BcdOptions::default()
            };
            let out = bcd_solve(&problem, &options, &mut rng)?;
            let report = crate::metrics::evaluate(
                &channels,
                &out.theta,
                &out.precoder,
                &receive,
                &plan,
                &budget.weights,
                budget.noise,
            )?;
            TrialRecord {
                seed,
                wsr: report.wsr,
                rates: report.rate,
                iterations_used: out.iterations,
                wall_ms: 0.0,
                initial_wsr: out.initial_wsr(),
                wsr_history: out.wsr_history,
                rate_history: out.rate_history,
                channel_fingerprint: 0,
            }
        }
    };
    record.channel_fingerprint = channels.fingerprint();
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Transmit SNR in dB (normalized power mode).
    SnrDb,
    /// BCD outer-iteration index; 0 is the initialization.
    Iterations,
    /// RIS element count `N²` (must be a perfect square).
    NElements,
    /// User count `J`.
    Users,
}

impl SweepVariable {
    pub fn label(&self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Iterations => "iterations",
            SweepVariable::NElements => "n_elements",
            SweepVariable::Users => "users",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "snr_db" | "snr" => Ok(SweepVariable::SnrDb),
            "iterations" => Ok(SweepVariable::Iterations),
            "n_elements" => Ok(SweepVariable::NElements),
            "users" => Ok(SweepVariable::Users),
            other => Err(Error::config(
                "sweep",
                format!("unknown sweep variable `{other}`"),
            )),
        }
    }

    /// Default grid of each sweep.
    pub fn default_values(&self, config: &SystemConfig) -> Vec<f64> {
        match self {
            SweepVariable::SnrDb => (-10..=20).step_by(5).map(f64::from).collect(),
            SweepVariable::Iterations => (0..=config.max_iter.min(100)).map(|i| i as f64).collect(),
            SweepVariable::NElements => vec![36.0, 64.0, 100.0, 144.0],
            SweepVariable::Users => vec![2.0, 4.0, 6.0],
        }
    }
}

fn integer_value(field: &str, value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value.is_finite() {
        Ok(value as usize)
    } else {
        Err(Error::config(
            field,
            format!("sweep value {value} is not a non-negative integer"),
        ))
    }
}

/// Config for one sweep value (the iterations sweep leaves it unchanged).
pub fn config_for_value(
    config: &SystemConfig,
    variable: SweepVariable,
    value: f64,
) -> Result<SystemConfig> {
    let mut derived = config.clone();
    match variable {
        SweepVariable::SnrDb => {
            if config.power_mode != PowerMode::NormalizedSnr {
                return Err(Error::config(
                    "power_mode",
                    "an SNR sweep needs power_mode = normalized_snr",
                ));
            }
            derived.snr_db = Some(value);
        }
        SweepVariable::Iterations => {
            if config.algorithm != Algorithm::Bcd {
                return Err(Error::config(
                    "algorithm",
                    "an iterations sweep needs algorithm = bcd",
                ));
            }
            integer_value("iterations", value)?;
        }
        SweepVariable::NElements => {
            let count = integer_value("n_elements", value)?;
            let side = (count as f64).sqrt().round() as usize;
            if side * side != count || count == 0 {
                return Err(Error::config(
                    "n_elements",
                    format!("{count} is not a positive perfect square"),
                ));
            }
            derived.ris_side = side;
        }
        SweepVariable::Users => {
            derived.users = integer_value("users", value)?;
        }
    }
    derived.validate()?;
    Ok(derived)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub trials: Vec<TrialRecord>,
    pub mean_wsr: f64,
    pub std_wsr: f64,
    pub mean_rates: Vec<f64>,
}

impl SweepPoint {
    fn new(value: f64, trials: Vec<TrialRecord>) -> Self {
        let n = trials.len() as f64;
        let mean_wsr = trials.iter().map(|t| t.wsr).sum::<f64>() / n;
        let var = if trials.len() > 1 {
            trials
                .iter()
                .map(|t| (t.wsr - mean_wsr).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        let users = trials.iter().map(|t| t.rates.len()).max().unwrap_or(0);
        let mean_rates = (0..users)
            .map(|j| trials.iter().filter_map(|t| t.rates.get(j)).sum::<f64>() / n)
            .collect();
        Self {
            value,
            trials,
            mean_wsr,
            std_wsr: var.sqrt(),
            mean_rates,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub variable: SweepVariable,
    pub algorithm: Algorithm,
    pub mode: PartitionMode,
    pub seeds: Vec<u64>,
    pub points: Vec<SweepPoint>,
}

impl ExperimentResult {
    pub fn mean_wsr(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_wsr).collect()
    }
}

fn run_trials(
    config: &SystemConfig,
    seeds: &[u64],
    algorithm: Algorithm,
    mode: PartitionMode,
) -> Result<Vec<TrialRecord>> {
    seeds
        .par_iter()
        .map(|&seed| run_trial(config, seed, algorithm, mode))
        .collect()
}

/// Runs the configured algorithm over every sweep value and trial.
///
/// All values are validated before any trial starts.
pub fn run_sweep(
    config: &SystemConfig,
    variable: SweepVariable,
    values: &[f64],
) -> Result<ExperimentResult> {
    config.validate()?;
    if values.is_empty() {
        return Err(Error::config("values", "a sweep needs at least one value"));
    }
    let derived = values
        .iter()
        .map(|&v| config_for_value(config, variable, v))
        .collect::<Result<Vec<_>>>()?;
    let seeds = trial_seeds(config);

    let points = if variable == SweepVariable::Iterations {
        let records = run_trials(config, &seeds, config.algorithm, config.mode)?;
        values
            .iter()
            .map(|&v| {
                let i = v as usize;
                let trials = records
                    .iter()
                    .map(|r| {
                        let last = r.wsr_history.len() - 1;
                        let mut at = r.clone();
                        at.wsr = r.wsr_history[i.min(last)];
                        at.rates = r.rate_history[i.min(last)].clone();
                        at
                    })
                    .collect();
                SweepPoint::new(v, trials)
            })
            .collect()
    } else {
        derived
            .iter()
            .zip(values)
            .map(|(cfg, &v)| {
                Ok(SweepPoint::new(
                    v,
                    run_trials(cfg, &seeds, cfg.algorithm, cfg.mode)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?
    };

    Ok(ExperimentResult {
        variable,
        algorithm: config.algorithm,
        mode: config.mode,
        seeds,
        points,
    })
}

/// Paired statistics of `minuend - subtrahend` over common trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDifference {
    pub label: String,
    pub mean: f64,
    /// Fraction of trials with a strictly positive difference.
    pub positive_fraction: f64,
    pub trials: usize,
}

impl PairedDifference {
    pub fn between(
        label: impl Into<String>,
        minuend: &[TrialRecord],
        subtrahend: &[TrialRecord],
    ) -> Self {
        let diffs: Vec<f64> = minuend
            .iter()
            .zip(subtrahend)
            .map(|(a, b)| a.wsr - b.wsr)
            .collect();
        let n = diffs.len();
        Self {
            label: label.into(),
            mean: diffs.iter().sum::<f64>() / n.max(1) as f64,
            positive_fraction: diffs.iter().filter(|d| **d > 0.0).count() as f64 / n.max(1) as f64,
            trials: n,
        }
    }
}

pub const ARMS: [(Algorithm, PartitionMode); 4] = [
    (Algorithm::WmmseLs, PartitionMode::Whole),
    (Algorithm::WmmseLs, PartitionMode::Subarray),
    (Algorithm::Bcd, PartitionMode::Whole),
    (Algorithm::Bcd, PartitionMode::Subarray),
];

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    /// One result per entry of [`ARMS`], each with a single point at the configured SNR.
    pub arms: Vec<ExperimentResult>,
    pub differences: Vec<PairedDifference>,
}

impl Comparison {
    pub fn arm(&self, algorithm: Algorithm, mode: PartitionMode) -> &ExperimentResult {
        self.arms
            .iter()
            .find(|a| a.algorithm == algorithm && a.mode == mode)
            .expect("every arm is present")
    }
}

/// Runs all four (algorithm, mode) arms on identical scenarios.
pub fn paired_comparison(config: &SystemConfig, seeds: &[u64]) -> Result<Comparison> {
    config.validate()?;
    // subarray arms need the divisibility check even if the config says whole
    make_partition(config.elements(), config.users, PartitionMode::Subarray)?;
    let value = config.snr_db.unwrap_or(f64::NAN);

    let per_seed: Vec<Vec<TrialRecord>> = seeds
        .par_iter()
        .map(|&seed| {
            ARMS.iter()
                .map(|&(algorithm, mode)| run_trial(config, seed, algorithm, mode))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let arms: Vec<ExperimentResult> = ARMS
        .iter()
        .enumerate()
        .map(|(k, &(algorithm, mode))| ExperimentResult {
            variable: SweepVariable::SnrDb,
            algorithm,
            mode,
            seeds: seeds.to_vec(),
            points: vec![SweepPoint::new(
                value,
                per_seed.iter().map(|r| r[k].clone()).collect(),
            )],
        })
        .collect();

    let trials = |a: Algorithm, m: PartitionMode| -> &[TrialRecord] {
        &arms
            .iter()
            .find(|r| r.algorithm == a && r.mode == m)
            .expect("arm present")
            .points[0]
            .trials
    };
    let differences = vec![
        PairedDifference::between(
            "bcd - wmmse_ls (subarray)",
            trials(Algorithm::Bcd, PartitionMode::Subarray),
            trials(Algorithm::WmmseLs, PartitionMode::Subarray),
        ),
        PairedDifference::between(
            "bcd - wmmse_ls (whole)",
            trials(Algorithm::Bcd, PartitionMode::Whole),
            trials(Algorithm::WmmseLs, PartitionMode::Whole),
        ),
        PairedDifference::between(
            "subarray - whole (bcd)",
            trials(Algorithm::Bcd, PartitionMode::Subarray),
            trials(Algorithm::Bcd, PartitionMode::Whole),
        ),
        PairedDifference::between(
            "subarray - whole (wmmse_ls)",
            trials(Algorithm::WmmseLs, PartitionMode::Subarray),
            trials(Algorithm::WmmseLs, PartitionMode::Whole),
        ),
    ];
    Ok(Comparison { arms, differences })
}
