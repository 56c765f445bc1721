//! Result files.
//!
//! `results.csv` and `manifest.txt` are a pure function of the config and
//! seeds. Wall-clock timings go to a separate `timing.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::{PowerMode, SystemConfig};
use super::{Comparison, ExperimentResult};
use crate::error::Result;

fn format_value(value: f64) -> String {
    if value.is_nan() {
        String::new()
    } else {
        format!("{value}")
    }
}

fn results_csv(result: &ExperimentResult) -> String {
    let users = result
        .points
        .iter()
        .flat_map(|p| p.trials.iter().map(|t| t.rates.len()))
        .max()
        .unwrap_or(0);
    let mut out = String::from("sweep_value,trial,seed,wsr");
    for j in 1..=users {
        let _ = write!(out, ",rate_user_{j}");
    }
    out.push_str(",iterations_used\n");
    for point in &result.points {
        for (t, trial) in point.trials.iter().enumerate() {
            let _ = write!(
                out,
                "{},{},{},{:.12e}",
                format_value(point.value),
                t,
                trial.seed,
                trial.wsr
            );
            for j in 0..users {
                match trial.rates.get(j) {
                    Some(r) => {
                        let _ = write!(out, ",{r:.12e}");
                    }
                    None => out.push(','),
                }
            }
            let _ = writeln!(out, ",{}", trial.iterations_used);
        }
    }
    out
}

fn timing_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("sweep_value,trial,seed,wall_ms\n");
    for point in &result.points {
        for (t, trial) in point.trials.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{:.3}",
                format_value(point.value),
                t,
                trial.seed,
                trial.wall_ms
            );
        }
    }
    out
}

fn manifest(config: &SystemConfig, result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tool = ris-sim {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "config_sha256 = {}", config.hash());
    let _ = writeln!(out, "sweep = {}", result.variable.label());
    let _ = writeln!(out, "algorithm = {}", result.algorithm.label());
    let _ = writeln!(out, "mode = {}", result.mode.label());
    let seeds: Vec<String> = result.seeds.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "seeds = {}", seeds.join(","));
    let power = match config.power_mode {
        PowerMode::NormalizedSnr => {
            "normalized_snr: P/sigma^2 = 10^(snr_db/10), zone-referenced channel gains"
        }
        PowerMode::PhysicalDbm => {
            "physical_dbm: absolute transmit power and noise, absolute path loss"
        }
    };
    let _ = writeln!(out, "power_semantics = {power}");
    let _ = writeln!(out, "\n[config]\n{}", config.to_toml());
    out
}

/// Writes `results.csv`, `timing.csv`, `manifest.txt` and `config.toml` into `dir`.
pub fn write_results(
    config: &SystemConfig,
    result: &ExperimentResult,
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(result))?;
    fs::write(dir.join("timing.csv"), timing_csv(result))?;
    fs::write(dir.join("manifest.txt"), manifest(config, result))?;
    fs::write(dir.join("config.toml"), config.to_toml())?;
    Ok(())
}

/// Writes one subdirectory per arm plus `differences.csv`.
pub fn write_comparison(
    config: &SystemConfig,
    comparison: &Comparison,
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for arm in &comparison.arms {
        let name = format!("{}_{}", arm.algorithm.label(), arm.mode.label());
        write_results(config, arm, dir.join(name))?;
    }
    let mut out = String::from("difference,mean,positive_fraction,trials\n");
    for d in &comparison.differences {
        let _ = writeln!(
            out,
            "{},{:.12e},{},{}",
            d.label, d.mean, d.positive_fraction, d.trials
        );
    }
    fs::write(dir.join("differences.csv"), out)?;
    Ok(())
}
