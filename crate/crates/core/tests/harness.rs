//! Experiment driver: sweeps, paired comparisons, output files and the CLI.

use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ris_beamforming::channel::ScenarioGeometry;
use ris_beamforming::harness::{
    draw_scenario, paired_comparison, run_sweep, user_weights, write_results, Algorithm,
    SweepVariable, SystemConfig, WeightsRule, ARMS,
};
use ris_beamforming::subarray::{make_partition, PartitionMode};
use ris_beamforming::Error;

fn small(trials: usize) -> SystemConfig {
    SystemConfig {
        ris_side: 4,
        users: 2,
        trials,
        max_iter: 30,
        ..SystemConfig::default()
    }
}

#[test]
fn snr_sweep_has_one_point_per_value_and_repeats_exactly() {
    let config = small(1);
    let a = run_sweep(&config, SweepVariable::SnrDb, &[-10.0, 0.0, 10.0]).unwrap();
    let b = run_sweep(&config, SweepVariable::SnrDb, &[-10.0, 0.0, 10.0]).unwrap();
    assert_eq!(a.points.len(), 3);
    assert!(a.points.iter().all(|p| p.trials.len() == 1));
    assert_eq!(
        a.points.iter().map(|p| p.trials[0].wsr).collect::<Vec<_>>(),
        b.points.iter().map(|p| p.trials[0].wsr).collect::<Vec<_>>()
    );
    // every sweep value sees the same channels
    let prints: Vec<u64> = a
        .points
        .iter()
        .map(|p| p.trials[0].channel_fingerprint)
        .collect();
    assert!(prints.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn iterations_sweep_reads_padded_history() {
    let config = small(3);
    let values: Vec<f64> = (0..=40).map(f64::from).collect();
    let result = run_sweep(&config, SweepVariable::Iterations, &values).unwrap();
    let curve = result.mean_wsr();
    assert_eq!(curve.len(), 41);
    assert!(curve.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{curve:?}");
}

#[test]
fn users_sweep_partitions_the_large_surface() {
    for (users, size) in [(2, 72), (4, 36), (6, 24)] {
        let plan = make_partition(144, users, PartitionMode::Subarray).unwrap();
        assert!(plan.blocks().iter().all(|b| b.len() == size));
    }
}

#[test]
fn invalid_sweeps_fail_before_running() {
    let config = SystemConfig {
        users: 4,
        ..small(1)
    };
    let err = run_sweep(&config, SweepVariable::NElements, &[36.0, 49.0]).unwrap_err();
    assert!(matches!(err, Error::Config { .. }), "{err}");
    assert!(run_sweep(&config, SweepVariable::NElements, &[50.0]).is_err());
    assert!(run_sweep(&config, SweepVariable::SnrDb, &[]).is_err());
    let ls = SystemConfig {
        algorithm: Algorithm::WmmseLs,
        ..config
    };
    let err = run_sweep(&ls, SweepVariable::Iterations, &[0.0, 1.0]).unwrap_err();
    assert!(err.to_string().contains("algorithm"), "{err}");
}

#[test]
fn comparison_arms_share_channels() {
    let config = small(1);
    let cmp = paired_comparison(&config, &[5]).unwrap();
    assert_eq!(cmp.arms.len(), ARMS.len());
    let prints: Vec<u64> = cmp
        .arms
        .iter()
        .map(|a| a.points[0].trials[0].channel_fingerprint)
        .collect();
    assert!(prints.iter().all(|p| *p == prints[0]));
    let (_, channels) = draw_scenario(&config, 5).unwrap();
    assert_eq!(prints[0], channels.fingerprint());

    let bcd = &cmp.arm(Algorithm::Bcd, PartitionMode::Subarray).points[0].trials[0];
    assert!(bcd.wsr >= bcd.initial_wsr);
    let ls = &cmp.arm(Algorithm::WmmseLs, PartitionMode::Subarray).points[0].trials[0];
    let d = &cmp.differences[0];
    assert!((d.mean - (bcd.wsr - ls.wsr)).abs() < 1e-12);
}

#[test]
fn weights_are_positive_and_sum_to_user_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let geometry = ScenarioGeometry::sample_reference(4, &mut rng);
    for rule in [WeightsRule::Uniform, WeightsRule::InversePathloss] {
        let config = SystemConfig {
            weights_rule: rule,
            ..SystemConfig::default()
        };
        let w = user_weights(&config, &geometry).unwrap();
        assert!(w.iter().all(|x| *x > 0.0));
        assert!((w.iter().sum::<f64>() - 4.0).abs() < 1e-12);
    }
}

#[test]
fn result_files_are_written() {
    let config = small(2);
    let result = run_sweep(&config, SweepVariable::SnrDb, &[0.0, 5.0]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_results(&config, &result, dir.path()).unwrap();

    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_value,trial,seed,wsr,rate_user_1,rate_user_2,iterations_used"
    );
    assert_eq!(lines.count(), 4);
    let timing = std::fs::read_to_string(dir.path().join("timing.csv")).unwrap();
    assert!(timing.starts_with("sweep_value,trial,seed,wall_ms"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains(&config.hash()));
    assert!(manifest.contains("seeds = 0,1"));
    let saved = ris_beamforming::harness::load_config(dir.path().join("config.toml")).unwrap();
    assert_eq!(saved, config);
}

#[test]
fn cli_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let text = SystemConfig::default()
        .to_toml()
        .replace("users = 4", "users = 3");
    std::fs::write(&path, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ris-sim"))
        .args(["sweep", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let message = String::from_utf8_lossy(&out.stderr);
    assert!(
        message.contains("users") && message.contains("divisible"),
        "{message}"
    );
    assert!(!dir.path().join("out").exists());
}

#[test]
fn cli_compare_writes_every_arm() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, small(1).to_toml()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ris-sim"))
        .args(["compare", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path().join("cmp"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cmp = dir.path().join("cmp");
    assert!(cmp.join("differences.csv").exists());
    for (algorithm, mode) in ARMS {
        assert!(cmp
            .join(format!("{}_{}", algorithm.label(), mode.label()))
            .join("results.csv")
            .exists());
    }
}
