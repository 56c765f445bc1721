//! Local search over 1-bit RIS phases with a WMMSE precoder per candidate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_beamforming::harness::{draw_scenario, user_weights, SystemConfig};
use ris_beamforming::ls::{
    ls_optimize, search_receive_vectors, LinkBudget, QuantizedPhaseSet, ReceiveGrid,
};
use ris_beamforming::subarray::{make_partition, PartitionMode};
use ris_beamforming::wmmse::WmmseOptions;

fn main() -> ris_beamforming::Result<()> {
    let config = SystemConfig::default();
    let (geometry, channels) = draw_scenario(&config, 4)?;
    let budget = LinkBudget {
        weights: user_weights(&config, &geometry)?,
        noise: config.noise()?,
        power: config.power()?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for mode in [PartitionMode::Whole, PartitionMode::Subarray] {
        let plan = make_partition(100, 4, mode)?;
        let grid = ReceiveGrid::from_bits(2, 1);
        let receive = search_receive_vectors(
            &channels,
            &plan,
            &grid,
            &config.user_geometry(),
            &budget,
            &mut rng,
        )?;
        let out = ls_optimize(
            &channels,
            &plan,
            &receive,
            &QuantizedPhaseSet::new(1),
            &budget,
            &WmmseOptions::default(),
            &mut rng,
        )?;
        println!(
            "{:<8} WSR {:.4} bits/s/Hz from {} candidate evaluations",
            mode.label(),
            out.wsr,
            out.evaluations
        );
    }
    Ok(())
}
