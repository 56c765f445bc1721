//! Splits a 10x10 surface among four users and shows that a user's equivalent
//! channel ignores the phases of blocks paired with other users.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_beamforming::harness::{draw_scenario, SystemConfig};
use ris_beamforming::linalg::CVector;
use ris_beamforming::subarray::{
    equivalent_row_channel, make_partition, PartitionMode, PhaseVector,
};

fn main() -> ris_beamforming::Result<()> {
    let config = SystemConfig::default();
    let (_, channels) = draw_scenario(&config, 0)?;
    let plan = make_partition(100, 4, PartitionMode::Subarray)?;
    for (p, block) in plan.blocks().iter().enumerate() {
        println!(
            "block {p}: elements {}..={} -> user {p}",
            block.start + 1,
            block.end
        );
    }

    let receive = CVector::from_element(4, 0.5.into());
    let theta = PhaseVector::ones(100);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut perturbed = theta.clone();
    for k in plan.blocks()[1].clone() {
        perturbed.set(k, PhaseVector::random(1, &mut rng).get(0));
    }
    for j in 0..4 {
        let before = equivalent_row_channel(j, &channels, &theta, &plan, &receive);
        let after = equivalent_row_channel(j, &channels, &perturbed, &plan, &receive);
        println!(
            "user {j}: change after perturbing block 1 = {:.3e}",
            (after - before).norm()
        );
    }
    Ok(())
}
