//! Joint continuous-phase and precoder optimization by block coordinate ascent,
//! printing the WSR trajectory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_beamforming::bcd::{bcd_solve, BcdOptions, BcdProblem};
use ris_beamforming::harness::{draw_scenario, user_weights, SystemConfig};
use ris_beamforming::ls::{search_receive_vectors, LinkBudget, ReceiveGrid};
use ris_beamforming::subarray::{make_partition, PartitionMode};

fn main() -> ris_beamforming::Result<()> {
    let config = SystemConfig::default();
    let (geometry, channels) = draw_scenario(&config, 6)?;
    let budget = LinkBudget {
        weights: user_weights(&config, &geometry)?,
        noise: config.noise()?,
        power: config.power()?,
    };
    let plan = make_partition(100, 4, PartitionMode::Subarray)?;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let receive = search_receive_vectors(
        &channels,
        &plan,
        &ReceiveGrid::from_bits(2, 1),
        &config.user_geometry(),
        &budget,
        &mut rng,
    )?;
    let problem = BcdProblem {
        channels: &channels,
        plan: &plan,
        receive: &receive,
        weights: &budget.weights,
        noise: budget.noise,
        power: budget.power,
    };
    let out = bcd_solve(&problem, &BcdOptions::default(), &mut rng)?;
    for (i, wsr) in out.wsr_history.iter().enumerate().step_by(10) {
        println!("iteration {i:>3}: WSR {wsr:.4}");
    }
    println!(
        "final WSR {:.4} after {} iterations",
        out.wsr, out.iterations
    );
    println!("per-user rates {:.3?}", out.rate_history.last().unwrap());
    Ok(())
}
