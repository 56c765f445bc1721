//! Acceptance criteria 1 to 7. Every criterion is evaluated and reported on its
//! own line; the test fails if any criterion fails.

use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ris_beamforming::bcd::{
    alpha_from_eta, fp_objective, optimal_auxiliaries, precoder_gradient, update_phases,
    QuadraticForm,
};
use ris_beamforming::harness::{
    paired_comparison, run_sweep, run_trial, Algorithm, SweepVariable, SystemConfig,
};
use ris_beamforming::linalg::{cis, CMatrix, CVector};
use ris_beamforming::ls::{ls_optimize, LinkBudget, QuantizedPhaseSet};
use ris_beamforming::metrics::{evaluate, rates_from_equivalent};
use ris_beamforming::subarray::{
    direct_row_channel, equivalent_row_channel, make_partition, ris_cascade_matrix, PartitionMode,
    PhaseVector,
};
use ris_beamforming::wmmse::{wmmse_precoder, PrecoderMatrix, WmmseOptions};
use ris_beamforming::{ChannelSet, Complex64};

// criterion 1
const ORDERING_SNRS: [f64; 3] = [0.0, 5.0, 10.0];
const ORDERING_TRIALS: usize = 50;
const SIGN_AGREEMENT: f64 = 0.9;
// criterion 2
const CONVERGENCE_SNR: f64 = 0.0;
const CONVERGENCE_SEEDS: usize = 20;
const CONVERGENCE_ITERATION: usize = 60;
const CONVERGENCE_RELATIVE_CHANGE: f64 = 1e-3;
const CONVERGED_FRACTION: f64 = 0.9;
// criteria 3 and 4
const SCALING_SNR: f64 = 5.0;
const SCALING_TRIALS: usize = 30;
const ELEMENT_COUNTS: [f64; 4] = [36.0, 64.0, 100.0, 144.0];
const USER_COUNTS: [f64; 3] = [2.0, 4.0, 6.0];
// criterion 5
const ORACLE_SEEDS: u64 = 30;
// criterion 6
const IDENTITY_INSTANCES: u64 = 50;

struct Verdict {
    criterion: &'static str,
    pass: bool,
    detail: String,
}

fn verdict(criterion: &'static str, pass: bool, detail: String) -> Verdict {
    Verdict {
        criterion,
        pass,
        detail,
    }
}

fn defaults(snr_db: f64, trials: usize) -> SystemConfig {
    SystemConfig {
        snr_db: Some(snr_db),
        trials,
        ..SystemConfig::default()
    }
}

fn ordering() -> Verdict {
    let mut pass = true;
    let mut lines = Vec::new();
    for snr in ORDERING_SNRS {
        let config = defaults(snr, ORDERING_TRIALS);
        let seeds: Vec<u64> = (0..ORDERING_TRIALS as u64).collect();
        let cmp = paired_comparison(&config, &seeds).expect("comparison runs");
        for d in &cmp.differences {
            let ok = d.mean > 0.0 && d.positive_fraction >= SIGN_AGREEMENT;
            pass &= ok;
            lines.push(format!(
                "snr {snr:>4} {:<28} mean {:+.4} positive {:>5.1}% {}",
                d.label,
                d.mean,
                100.0 * d.positive_fraction,
                if ok { "ok" } else { "FAIL" }
            ));
        }
    }
    verdict("1 ordering", pass, lines.join("\n    "))
}

fn convergence() -> Verdict {
    let config = SystemConfig {
        algorithm: Algorithm::Bcd,
        ..defaults(CONVERGENCE_SNR, CONVERGENCE_SEEDS)
    };
    let mut monotone = true;
    let mut converged = 0;
    let mut lengths = Vec::new();
    for seed in 0..CONVERGENCE_SEEDS as u64 {
        let record = run_trial(&config, seed, Algorithm::Bcd, config.mode).expect("trial runs");
        let best: Vec<f64> = record
            .wsr_history
            .iter()
            .scan(f64::MIN, |b, &r| {
                *b = b.max(r);
                Some(*b)
            })
            .collect();
        monotone &= best.windows(2).all(|w| w[1] >= w[0]);
        let at = |i: usize| record.wsr_history[i.min(record.wsr_history.len() - 1)];
        let change = (at(CONVERGENCE_ITERATION) - at(CONVERGENCE_ITERATION - 1)).abs()
            / at(CONVERGENCE_ITERATION - 1).abs().max(f64::MIN_POSITIVE);
        if change < CONVERGENCE_RELATIVE_CHANGE {
            converged += 1;
        }
        lengths.push(record.wsr_history.len() - 1);
    }
    let fraction = converged as f64 / CONVERGENCE_SEEDS as f64;
    let pass = monotone && fraction >= CONVERGED_FRACTION;
    verdict(
        "2 convergence",
        pass,
        format!(
            "best-so-far monotone {monotone}; converged by iteration {CONVERGENCE_ITERATION} on {:.0}% of seeds; outer iterations used {lengths:?}",
            100.0 * fraction
        ),
    )
}

fn element_scaling() -> Verdict {
    let mut curves = Vec::new();
    for mode in [PartitionMode::Whole, PartitionMode::Subarray] {
        let config = SystemConfig {
            mode,
            ..defaults(SCALING_SNR, SCALING_TRIALS)
        };
        curves.push(
            run_sweep(&config, SweepVariable::NElements, &ELEMENT_COUNTS)
                .expect("sweep runs")
                .mean_wsr(),
        );
    }
    let increasing = curves.iter().all(|c| c.windows(2).all(|w| w[1] > w[0]));
    let dominance = curves[1].iter().zip(&curves[0]).all(|(s, w)| s >= w);
    verdict(
        "3 element scaling",
        increasing && dominance,
        format!(
            "N² {ELEMENT_COUNTS:?}: whole {:.3?}, subarray {:.3?}; strictly increasing {increasing}; subarray >= whole {dominance}",
            curves[0], curves[1]
        ),
    )
}

fn user_scaling() -> Verdict {
    let mut curves = Vec::new();
    for mode in [PartitionMode::Whole, PartitionMode::Subarray] {
        let config = SystemConfig {
            mode,
            ris_side: 12,
            ..defaults(SCALING_SNR, SCALING_TRIALS)
        };
        curves.push(
            run_sweep(&config, SweepVariable::Users, &USER_COUNTS)
                .expect("sweep runs")
                .mean_wsr(),
        );
    }
    let pass = curves[1].iter().zip(&curves[0]).all(|(s, w)| s > w);
    verdict(
        "4 user scaling",
        pass,
        format!(
            "J {USER_COUNTS:?} at N²=144: whole {:.3?}, subarray {:.3?}",
            curves[0], curves[1]
        ),
    )
}

fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

fn unit_vector(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(n, |_, _| complex(rng));
    let norm = v.norm();
    v / Complex64::from(norm)
}

fn random_channels(
    users: usize,
    nr: usize,
    nt: usize,
    elements: usize,
    rng: &mut ChaCha8Rng,
) -> ChannelSet {
    ChannelSet {
        direct: (0..users).map(|_| random_matrix(nr, nt, rng)).collect(),
        bs_to_ris: random_matrix(elements, nt, rng),
        ris_to_user: (0..users)
            .map(|_| random_matrix(nr, elements, rng))
            .collect(),
        pathloss_direct: vec![1.0; users],
        pathloss_reflect_g: 1.0,
        pathloss_reflect_r: vec![1.0; users],
    }
}

/// WSR of every codebook configuration, each with its WMMSE precoder.
fn brute_force(
    channels: &ChannelSet,
    elements: usize,
    users: usize,
    receive: &[CVector],
    set: &QuantizedPhaseSet,
    budget: &LinkBudget,
) -> Vec<f64> {
    let plan = make_partition(elements, users, PartitionMode::Whole).unwrap();
    let count = set.len().pow(elements as u32);
    (0..count)
        .map(|mut code| {
            let mut theta = PhaseVector::ones(elements);
            for n in 0..elements {
                theta.set(n, set.values()[code % set.len()]);
                code /= set.len();
            }
            let equiv =
                ris_beamforming::subarray::equivalent_channels(channels, &theta, &plan, receive);
            let w = wmmse_precoder(
                &equiv,
                &budget.weights,
                budget.noise,
                budget.power,
                &WmmseOptions::default(),
            )
            .unwrap()
            .precoder;
            evaluate(
                channels,
                &theta,
                &w,
                receive,
                &plan,
                &budget.weights,
                budget.noise,
            )
            .unwrap()
            .wsr
        })
        .collect()
}

fn ls_oracles() -> Verdict {
    let mut single_exact = true;
    let mut four_contained = true;
    for seed in 0..ORACLE_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let users = 2;
        let channels = random_channels(users, 2, 2, 1, &mut rng);
        let receive: Vec<CVector> = (0..users).map(|_| unit_vector(2, &mut rng)).collect();
        let budget = LinkBudget {
            weights: vec![1.0; users],
            noise: 1.0,
            power: 10.0,
        };
        let plan = make_partition(1, users, PartitionMode::Whole).unwrap();
        for bits in [1, 2] {
            let set = QuantizedPhaseSet::new(bits);
            let out = ls_optimize(
                &channels,
                &plan,
                &receive,
                &set,
                &budget,
                &WmmseOptions::default(),
                &mut rng,
            )
            .unwrap();
            let all = brute_force(&channels, 1, users, &receive, &set, &budget);
            single_exact &= out.wsr == all.iter().cloned().fold(f64::MIN, f64::max);
        }

        let channels = random_channels(1, 1, 2, 4, &mut rng);
        let receive = vec![CVector::from_element(1, Complex64::new(1.0, 0.0))];
        let budget = LinkBudget {
            weights: vec![1.0],
            noise: 1.0,
            power: 10.0,
        };
        let set = QuantizedPhaseSet::new(1);
        let plan = make_partition(4, 1, PartitionMode::Whole).unwrap();
        let out = ls_optimize(
            &channels,
            &plan,
            &receive,
            &set,
            &budget,
            &WmmseOptions::default(),
            &mut rng,
        )
        .unwrap();
        let all = brute_force(&channels, 4, 1, &receive, &set, &budget);
        four_contained &= all.len() == 16 && all.contains(&out.wsr);
    }
    verdict(
        "5 ls oracles",
        single_exact && four_contained,
        format!("N²=1 equals exhaustive {single_exact}; N²=4 in 16-point set {four_contained}; {ORACLE_SEEDS} seeds"),
    )
}

fn numerical_identities() -> Verdict {
    let mut worst = [0.0f64; 6];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..IDENTITY_INSTANCES {
        // (a) fixed point of the alpha update
        let eta = 10.0 * rng.random::<f64>();
        let a = alpha_from_eta(eta);
        worst[0] = worst[0].max((a * a - eta * eta * (a + 1.0)).abs());

        let users = 3;
        let (nt, nr, elements) = (3, 2, 6);
        let channels = random_channels(users, nr, nt, elements, &mut rng);
        let receive: Vec<CVector> = (0..users).map(|_| unit_vector(nr, &mut rng)).collect();
        let plan = make_partition(elements, users, PartitionMode::Subarray).unwrap();
        let theta = PhaseVector::random(elements, &mut rng);
        let weights: Vec<f64> = (0..users).map(|_| 0.5 + rng.random::<f64>()).collect();
        let precoder = PrecoderMatrix::new(random_matrix(nt, users, &mut rng));
        let noise = 0.5 + rng.random::<f64>();
        let equiv =
            ris_beamforming::subarray::equivalent_channels(&channels, &theta, &plan, &receive);

        // (b) gradient of -f at optimal auxiliaries against central differences
        let aux = optimal_auxiliaries(&equiv, &precoder, &weights, noise).unwrap();
        let neg_f = |w: &PrecoderMatrix| -fp_objective(&aux, &equiv, w, &weights, noise);
        let h = 1e-5;
        for j in 0..users {
            let grad = precoder_gradient(j, &precoder.column(j), &equiv, &aux, &weights);
            for k in 0..nt {
                let partial = |dir: Complex64| {
                    let shifted = |s: f64| {
                        let mut w = precoder.clone();
                        let mut col = w.column(j);
                        col[k] += dir * (s * h);
                        w.set_column(j, &col);
                        neg_f(&w)
                    };
                    (shifted(1.0) - shifted(-1.0)) / (2.0 * h)
                };
                let fd = Complex64::new(partial(Complex64::new(1.0, 0.0)), partial(Complex64::i()));
                worst[1] = worst[1].max((grad[k] - fd).norm() / grad[k].norm().max(1.0));
            }
        }

        // (c) objective at optimal auxiliaries equals the WSR
        let wsr = rates_from_equivalent(&equiv, &precoder, &weights, noise)
            .unwrap()
            .wsr;
        worst[2] =
            worst[2].max((fp_objective(&aux, &equiv, &precoder, &weights, noise) - wsr).abs());

        // (d) every single-element phase update is non-increasing
        let n = 5;
        let m = random_matrix(n, n + 1, &mut rng);
        let form = QuadraticForm {
            a: &m * m.adjoint(),
            b: CVector::from_fn(n, |_, _| complex(&mut rng)),
        };
        let mut current =
            CVector::from_fn(n, |_, _| cis(std::f64::consts::TAU * rng.random::<f64>()));
        for _ in 0..n {
            let before = form.value(&current);
            let next = update_phases(&current, &form, 1);
            worst[3] = worst[3].max(form.value(&next) - before);
            current = next;
        }

        // (e) linearization of the equivalent channel in the phases
        for (j, v) in receive.iter().enumerate() {
            let block = plan.active_block(j);
            let active = theta.as_vector().rows(block.start, block.len());
            let linear = direct_row_channel(j, &channels, v)
                + ris_cascade_matrix(j, &channels, v, &plan).transpose() * active;
            let direct = equivalent_row_channel(j, &channels, &theta, &plan, v);
            worst[4] = worst[4].max((linear - direct).norm());
        }

        // (f) single-user WMMSE equals maximum-ratio transmission
        let h = CVector::from_fn(nt, |_, _| complex(&mut rng));
        let power = 0.1 + 10.0 * rng.random::<f64>();
        let w = wmmse_precoder(
            std::slice::from_ref(&h),
            &[1.0],
            1.0,
            power,
            &WmmseOptions::default(),
        )
        .unwrap()
        .precoder;
        let mrt = h.conjugate() * Complex64::from(power.sqrt() / h.norm());
        // a common phase is irrelevant
        let phase = mrt.dotc(&w.column(0));
        let phase = phase / phase.norm();
        worst[5] = worst[5].max((w.column(0) - mrt * phase).norm());
    }
    let limits = [1e-10, 1e-4, 1e-8, 1e-10, 1e-10, 1e-8];
    let names = [
        "alpha fixed point",
        "gradient",
        "fp consistency",
        "phase descent",
        "linearization",
        "mrt",
    ];
    let pass = worst.iter().zip(&limits).all(|(w, l)| w <= l);
    let detail = names
        .iter()
        .zip(worst.iter().zip(&limits))
        .map(|(n, (w, l))| format!("{n} {w:.2e} (<= {l:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    verdict("6 numerical identities", pass, detail)
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_ris-sim");
    let root = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = root.path().join(name);
        let status = Command::new(bin)
            .args([
                "sweep",
                "--variable",
                "snr_db",
                "--values",
                "-10,0,10",
                "--trials",
                "3",
                "--seed-base",
                "7",
            ])
            .args(["--threads", threads, "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        (
            std::fs::read(out.join("results.csv")).unwrap(),
            std::fs::read(out.join("manifest.txt")).unwrap(),
        )
    };
    let first = run("a", "1");
    let second = run("b", "4");
    let rows = String::from_utf8_lossy(&first.0).lines().count();
    verdict(
        "7 determinism",
        first == second && rows == 1 + 3 * 3,
        format!(
            "results.csv and manifest.txt byte-identical {}; {rows} lines",
            first == second
        ),
    )
}

#[test]
fn acceptance() {
    let verdicts = vec![
        ordering(),
        convergence(),
        element_scaling(),
        user_scaling(),
        ls_oracles(),
        numerical_identities(),
        determinism(),
    ];
    println!();
    for v in &verdicts {
        println!(
            "[{}] criterion {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.criterion,
            v.detail
        );
    }
    let failed: Vec<&str> = verdicts
        .iter()
        .filter(|v| !v.pass)
        .map(|v| v.criterion)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
