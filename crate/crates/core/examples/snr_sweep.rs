//! SNR sweep of the BCD algorithm in both partition modes, written to CSV.

use ris_beamforming::harness::{run_sweep, write_results, SweepVariable, SystemConfig};
use ris_beamforming::PartitionMode;

fn main() -> ris_beamforming::Result<()> {
    let values = [-10.0, 0.0, 10.0, 20.0];
    let out = std::env::temp_dir().join("ris-snr-sweep");
    for mode in [PartitionMode::Whole, PartitionMode::Subarray] {
        let config = SystemConfig {
            mode,
            trials: 4,
            ..SystemConfig::default()
        };
        let result = run_sweep(&config, SweepVariable::SnrDb, &values)?;
        write_results(&config, &result, out.join(mode.label()))?;
        for p in &result.points {
            println!(
                "{:<8} snr {:>5} dB: mean WSR {:.3} (std {:.3})",
                mode.label(),
                p.value,
                p.mean_wsr,
                p.std_wsr
            );
        }
    }
    println!("results in {}", out.display());
    Ok(())
}
