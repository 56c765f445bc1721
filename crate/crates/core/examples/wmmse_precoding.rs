//! WMMSE precoder for fixed RIS phases, compared with maximum-ratio transmission.

use ris_beamforming::harness::{draw_scenario, SystemConfig};
use ris_beamforming::linalg::CVector;
use ris_beamforming::metrics::rates_from_equivalent;
use ris_beamforming::subarray::{equivalent_channels, make_partition, PartitionMode, PhaseVector};
use ris_beamforming::wmmse::{mrt_precoder, wmmse_precoder, WmmseOptions};

fn main() -> ris_beamforming::Result<()> {
    let config = SystemConfig::default();
    let (_, channels) = draw_scenario(&config, 2)?;
    let plan = make_partition(100, 4, PartitionMode::Whole)?;
    let receive = vec![CVector::from_element(4, 0.5.into()); 4];
    let equiv = equivalent_channels(&channels, &PhaseVector::ones(100), &plan, &receive);
    let weights = [1.0; 4];
    let power = config.power()?;

    let mrt = mrt_precoder(&equiv, 4, power);
    let mrt_rate = rates_from_equivalent(&equiv, &mrt, &weights, 1.0)?.wsr;
    let out = wmmse_precoder(&equiv, &weights, 1.0, power, &WmmseOptions::default())?;
    println!("MRT   WSR {mrt_rate:.4} bits/s/Hz");
    println!(
        "WMMSE WSR {:.4} bits/s/Hz after {} iterations",
        out.wsr, out.iterations
    );
    println!(
        "WMMSE power {:.4} of budget {power:.4}",
        out.precoder.total_power()
    );
    Ok(())
}
