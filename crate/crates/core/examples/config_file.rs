//! Writes the default configuration, edits it and loads it back.

use ris_beamforming::harness::{load_config, write_config, SystemConfig};

fn main() -> ris_beamforming::Result<()> {
    let path = std::env::temp_dir().join("ris-config.toml");
    write_config(&SystemConfig::default(), &path)?;
    let text = std::fs::read_to_string(&path)?.replace("users = 4", "users = 3");
    std::fs::write(&path, text)?;
    match load_config(&path) {
        Ok(_) => println!("accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    let config = SystemConfig {
        mode: ris_beamforming::PartitionMode::Whole,
        users: 3,
        ..SystemConfig::default()
    };
    write_config(&config, &path)?;
    println!(
        "whole-surface mode with three users: sha256 {}",
        load_config(&path)?.hash()
    );
    Ok(())
}
