use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_beamforming::harness::{
    load_config, paired_comparison, run_sweep, trial_seeds, write_comparison, write_results,
    SweepVariable, SystemConfig,
};

#[derive(Parser)]
#[command(
    name = "ris-sim",
    version,
    about = "Monte-Carlo beamforming experiments for RIS-aided THz MU-MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed_base: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one variable for the configured algorithm and mode.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// snr_db, iterations, n_elements or users.
        #[arg(long, default_value = "snr_db")]
        variable: String,
        /// Comma-separated values; a default grid per variable when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Run all four algorithm/mode arms on the same channel draws.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Print the default config as TOML.
    Config,
}

fn prepare(common: &Common) -> ris_beamforming::Result<SystemConfig> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = common.seed_base {
        config.seed_base = seed;
    }
    if let Some(trials) = common.trials {
        config.trials = trials;
    }
    config.validate()?;
    if let Some(threads) = common.threads {
        // only fails if a pool exists already, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(config)
}

fn run(cli: Cli) -> ris_beamforming::Result<()> {
    match cli.command {
        Command::Sweep {
            common,
            variable,
            values,
        } => {
            let config = prepare(&common)?;
            let variable = SweepVariable::parse(&variable)?;
            let values = values.unwrap_or_else(|| variable.default_values(&config));
            let result = run_sweep(&config, variable, &values)?;
            write_results(&config, &result, &common.out)?;
            println!(
                "{:>12} {:>12} {:>12}",
                variable.label(),
                "mean_wsr",
                "std_wsr"
            );
            for p in &result.points {
                println!("{:>12} {:>12.4} {:>12.4}", p.value, p.mean_wsr, p.std_wsr);
            }
        }
        Command::Compare { common } => {
            let config = prepare(&common)?;
            let comparison = paired_comparison(&config, &trial_seeds(&config))?;
            write_comparison(&config, &comparison, &common.out)?;
            for arm in &comparison.arms {
                let p = &arm.points[0];
                println!(
                    "{:<10} {:<10} mean_wsr {:>10.4} std {:>8.4}",
                    arm.algorithm.label(),
                    arm.mode.label(),
                    p.mean_wsr,
                    p.std_wsr
                );
            }
            for d in &comparison.differences {
                println!(
                    "{:<28} mean {:>+10.4} positive {:>5.1}%",
                    d.label,
                    d.mean,
                    100.0 * d.positive_fraction
                );
            }
        }
        Command::Config => {
            print!("{}", SystemConfig::default().to_toml());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
