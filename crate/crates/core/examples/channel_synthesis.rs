//! Draws one channel realization at the reference deployment and prints its
//! shapes, path losses and Frobenius norms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_beamforming::channel::{build_channel_set, ChannelSpec, GainNormalization};
use ris_beamforming::{RicianParams, ScenarioGeometry, UpaGeometry};

fn main() -> ris_beamforming::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let geometry = ScenarioGeometry::sample_reference(4, &mut rng);
    let spec = ChannelSpec {
        bs: UpaGeometry::half_wavelength(2, 2),
        ris: UpaGeometry::half_wavelength(10, 10),
        user: UpaGeometry::half_wavelength(2, 2),
        carrier_ghz: 100.0,
        normalization: GainNormalization::Absolute,
    };
    let channels = build_channel_set(&spec, &geometry, &RicianParams::default(), &mut rng)?;

    let db = |gain: f64| -20.0 * gain.log10();
    let g = &channels.bs_to_ris;
    println!(
        "G: {}x{}, path loss {:.1} dB",
        g.nrows(),
        g.ncols(),
        db(channels.pathloss_reflect_g)
    );
    for j in 0..channels.users() {
        let u = geometry.user_positions[j];
        println!(
            "user {j} at ({:6.1}, {:5.1}) m: direct {:.1} dB |H_d| {:.2e}, RIS->user {:.1} dB |H_r| {:.2e}",
            u[0],
            u[1],
            db(channels.pathloss_direct[j]),
            channels.direct[j].norm(),
            db(channels.pathloss_reflect_r[j]),
            channels.ris_to_user[j].norm(),
        );
    }
    println!("fingerprint {:016x}", channels.fingerprint());
    Ok(())
}
