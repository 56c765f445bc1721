//! Both algorithms in both partition modes on shared channel draws.

use ris_beamforming::harness::{paired_comparison, SystemConfig};

fn main() -> ris_beamforming::Result<()> {
    let config = SystemConfig::default();
    let seeds: Vec<u64> = (0..6).collect();
    let cmp = paired_comparison(&config, &seeds)?;
    for arm in &cmp.arms {
        println!(
            "{:<9} {:<9} mean WSR {:.3}",
            arm.algorithm.label(),
            arm.mode.label(),
            arm.points[0].mean_wsr
        );
    }
    for d in &cmp.differences {
        println!(
            "{:<28} {:+.3} ({:.0}% of trials positive)",
            d.label,
            d.mean,
            100.0 * d.positive_fraction
        );
    }
    Ok(())
}
