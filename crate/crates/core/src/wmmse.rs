//! Weighted MMSE precoding at the base station for fixed equivalent channels.

use crate::error::{Error, Result};
use crate::linalg::{dotu, hermitian_eigen, norm_sqr, CMatrix, CVector};
use crate::metrics::rates_from_equivalent;
use num_complex::Complex64;

/// BS precoder: column `j` is `w_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderMatrix {
    w: CMatrix,
}

impl PrecoderMatrix {
    pub fn new(w: CMatrix) -> Self {
        Self { w }
    }

    pub fn zeros(antennas: usize, users: usize) -> Self {
        Self::new(CMatrix::zeros(antennas, users))
    }

    pub fn antennas(&self) -> usize {
        self.w.nrows()
    }

    pub fn users(&self) -> usize {
        self.w.ncols()
    }

    pub fn column(&self, j: usize) -> CVector {
        self.w.column(j).into_owned()
    }

    pub fn set_column(&mut self, j: usize, w: &CVector) {
        self.w.set_column(j, w);
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    /// `Σ_j ‖w_j‖²`
    pub fn total_power(&self) -> f64 {
        self.w.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Scales every column by `sqrt(P / Σ‖w_j‖²)` when the budget is exceeded.
pub fn project_power(precoder: &PrecoderMatrix, power: f64) -> PrecoderMatrix {
    let total = precoder.total_power();
    if total <= power {
        return precoder.clone();
    }
    PrecoderMatrix::new(precoder.matrix() * Complex64::from((power / total).sqrt()))
}

/// Maximum-ratio transmission with the budget split evenly over users with a
/// nonzero channel.
pub fn mrt_precoder(equiv: &[CVector], antennas: usize, power: f64) -> PrecoderMatrix {
    let active = equiv.iter().filter(|h| norm_sqr(h) > 0.0).count();
    let mut precoder = PrecoderMatrix::zeros(antennas, equiv.len());
    if active == 0 {
        return precoder;
    }
    let per_user = (power / active as f64).sqrt();
    for (j, h) in equiv.iter().enumerate() {
        let norm = norm_sqr(h).sqrt();
        if norm > 0.0 {
            precoder.set_column(j, &(h.conjugate() * Complex64::from(per_user / norm)));
        }
    }
    precoder
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmmseOptions {
    /// Stop once the WSR gain of one iteration drops below this (bits/s/Hz).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WmmseOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WmmseOutcome {
    pub precoder: PrecoderMatrix,
    pub wsr: f64,
    pub iterations: usize,
    /// WSR of the initial point followed by the WSR after every iteration.
    pub history: Vec<f64>,
}

/// Solves `w_j = (Φ + μI)^{-1} m_j` with the smallest `μ ≥ 0` meeting `Σ‖w_j‖² ≤ P`.
fn solve_power_constrained(phi: &CMatrix, rhs: &CMatrix, power: f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(phi);
    let projected = vectors.adjoint() * rhs;
    let weight: Vec<f64> = projected
        .row_iter()
        .map(|row| row.iter().map(|z| z.norm_sqr()).sum())
        .collect();
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let floor = scale * 1e-13;

    let inverse = |mu: f64| -> Vec<f64> {
        values
            .iter()
            .map(|&l| if l + mu > floor { 1.0 / (l + mu) } else { 0.0 })
            .collect()
    };
    let power_at = |mu: f64| -> f64 {
        inverse(mu)
            .iter()
            .zip(&weight)
            .map(|(d, c)| c * d * d)
            .sum()
    };

    let mu = if power_at(0.0) <= power {
        0.0
    } else {
        let mut lo = 0.0;
        let mut hi = (weight.iter().sum::<f64>() / power)
            .sqrt()
            .max(f64::MIN_POSITIVE);
        while power_at(hi) > power {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if power_at(mid) > power {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    };

    let mut scaled = projected;
    for (k, d) in inverse(mu).into_iter().enumerate() {
        let mut row = scaled.row_mut(k);
        row *= Complex64::from(d);
    }
    vectors * scaled
}

/// Iterative WMMSE for single-stream users with row channels `ȟ_j`.
///
/// Each iteration computes MMSE receive scalars `u_j = ȟ_j w_j / D_j`
/// (with `D_j = Σ_i |ȟ_j w_i|² + σ²`), MSE weights `λ_j = ω_j / e_j` with
/// `e_j = 1 - |ȟ_j w_j|² / D_j`, and then the transmit update
/// `w_j = λ_j u_j (Σ_i λ_i |u_i|² ȟ_i^H ȟ_i + μI)^{-1} ȟ_j^H`.
/// It starts from full-power MRT and keeps the WSR non-decreasing.
pub fn wmmse_precoder(
    equiv: &[CVector],
    weights: &[f64],
    noise: f64,
    power: f64,
    options: &WmmseOptions,
) -> Result<WmmseOutcome> {
    if !(noise > 0.0) {
        return Err(Error::Domain(format!(
            "noise power must be positive, got {noise}"
        )));
    }
    if !(power > 0.0) {
        return Err(Error::Domain(format!(
            "power budget must be positive, got {power}"
        )));
    }
    let users = equiv.len();
    let antennas = equiv.first().map_or(0, |h| h.len());

    let mut precoder = mrt_precoder(equiv, antennas, power);
    let mut wsr = rates_from_equivalent(equiv, &precoder, weights, noise)?.wsr;
    let mut history = vec![wsr];
    if equiv.iter().all(|h| norm_sqr(h) == 0.0) {
        return Ok(WmmseOutcome {
            precoder,
            wsr,
            iterations: 0,
            history,
        });
    }

    let mut iterations = 0;
    for _ in 0..options.max_iter {
        iterations += 1;
        let mut phi = CMatrix::zeros(antennas, antennas);
        let mut rhs = CMatrix::zeros(antennas, users);
        for (j, h) in equiv.iter().enumerate() {
            let mut total = noise;
            let mut own = Complex64::new(0.0, 0.0);
            for i in 0..users {
                let s = dotu(h, &precoder.column(i));
                total += s.norm_sqr();
                if i == j {
                    own = s;
                }
            }
            let u = own / total;
            let mse = (1.0 - own.norm_sqr() / total).max(f64::MIN_POSITIVE);
            let lambda = weights[j] / mse;
            let hc = h.conjugate();
            phi += (&hc * h.transpose()) * Complex64::from(lambda * u.norm_sqr());
            rhs.set_column(j, &(hc * (u * lambda)));
        }
        let candidate = PrecoderMatrix::new(solve_power_constrained(&phi, &rhs, power));
        let candidate_wsr = rates_from_equivalent(equiv, &candidate, weights, noise)?.wsr;
        history.push(candidate_wsr);
        if candidate_wsr < wsr {
            // the update is an exact block minimizer, so only rounding lands here
            break;
        }
        let gain = candidate_wsr - wsr;
        precoder = candidate;
        wsr = candidate_wsr;
        if gain < options.tol {
            break;
        }
    }

    Ok(WmmseOutcome {
        precoder,
        wsr,
        iterations,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cis;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_rows(users: usize, antennas: usize, seed: u64) -> Vec<CVector> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..users)
            .map(|_| {
                CVector::from_fn(antennas, |_, _| {
                    c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 2.0
                })
            })
            .collect()
    }

    #[test]
    fn projection_examples() {
        let zero = PrecoderMatrix::zeros(2, 2);
        assert_eq!(project_power(&zero, 1.0), zero);

        let w = PrecoderMatrix::new(CMatrix::from_element(2, 2, c(1.0, 0.0)));
        // total power 4 = 4P with P = 1
        let p = project_power(&w, 1.0);
        for z in p.matrix().iter() {
            assert!((z - c(0.5, 0.0)).norm() < 1e-15);
        }
        let pp = project_power(&p, 1.0);
        assert!((pp.matrix() - p.matrix()).norm() < 1e-15);
    }

    #[test]
    fn scalar_matched_filter() {
        let h = c(0.3, -0.4);
        let out = wmmse_precoder(
            &[CVector::from_element(1, h)],
            &[1.0],
            0.5,
            2.0,
            &WmmseOptions::default(),
        )
        .unwrap();
        let expected = h.conj() / h.norm() * 2f64.sqrt();
        assert!((out.precoder.column(0)[0] - expected).norm() < 1e-12);
        let rate = (1.0 + 2.0 * h.norm_sqr() / 0.5).log2();
        assert!((out.wsr - rate).abs() < 1e-12);
    }

    #[test]
    fn single_user_is_mrt() {
        let h = random_rows(1, 4, 3);
        let out = wmmse_precoder(&h, &[1.0], 1.0, 3.0, &WmmseOptions::default()).unwrap();
        let norm = h[0].norm();
        let mrt = h[0].conjugate() * Complex64::from(3f64.sqrt() / norm);
        assert!((out.precoder.column(0) - mrt).norm() < 1e-8);
    }

    /// Grid search over precoders in the power ball of a 2-antenna, 1-user link.
    #[test]
    fn single_user_matches_grid_search() {
        let h = vec![CVector::from_vec(vec![c(0.8, 0.1), c(-0.3, 0.5)])];
        let (noise, power) = (0.2, 1.0);
        let out = wmmse_precoder(&h, &[1.0], noise, power, &WmmseOptions::default()).unwrap();

        // w = (a, b e^{jφ}) up to a common phase, a² + b² ≤ 1
        let mut best = 0.0_f64;
        let steps = 100;
        for ia in 0..=steps {
            let a = ia as f64 / steps as f64;
            let b = (1.0 - a * a).max(0.0).sqrt();
            for ip in 0..628 {
                let phi = ip as f64 * 0.01;
                let w = CVector::from_vec(vec![c(a, 0.0), cis(phi) * b]);
                let g = dotu(&h[0], &w).norm_sqr();
                best = best.max((1.0 + power * g / noise).log2());
            }
        }
        assert!(out.wsr >= best - 1e-9);
        assert!(out.wsr - best < 1e-3);
    }

    /// Orthogonal users: no interference, so the optimum is MRT with waterfilling.
    #[test]
    fn orthogonal_users_match_grid_search() {
        let h = vec![
            CVector::from_vec(vec![c(1.2, 0.0), c(0.0, 0.0)]),
            CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 0.5)]),
        ];
        let (noise, power) = (1.0, 2.0);
        let out = wmmse_precoder(&h, &[1.0, 1.0], noise, power, &WmmseOptions::default()).unwrap();

        let mut best = 0.0_f64;
        for k in 0..=20_000 {
            let p1 = power * k as f64 / 20_000.0;
            let p2 = power - p1;
            let r = (1.0 + p1 * 1.44 / noise).log2() + (1.0 + p2 * 0.25 / noise).log2();
            best = best.max(r);
        }
        assert!(
            (out.wsr - best).abs() < 1e-2,
            "wmmse {} vs grid {best}",
            out.wsr
        );
    }

    #[test]
    fn zero_channels_give_zero_precoder() {
        let h = vec![CVector::zeros(3), CVector::zeros(3)];
        let out = wmmse_precoder(&h, &[1.0, 1.0], 1.0, 1.0, &WmmseOptions::default()).unwrap();
        assert_eq!(out.wsr, 0.0);
        assert_eq!(out.precoder.total_power(), 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let h = random_rows(1, 2, 1);
        assert!(wmmse_precoder(&h, &[1.0], 0.0, 1.0, &WmmseOptions::default()).is_err());
        assert!(wmmse_precoder(&h, &[1.0], 1.0, 0.0, &WmmseOptions::default()).is_err());
    }

    #[test]
    fn more_users_than_antennas() {
        let h = random_rows(6, 4, 17);
        let out = wmmse_precoder(&h, &[1.0; 6], 0.1, 10.0, &WmmseOptions::default()).unwrap();
        assert!(out.precoder.total_power() <= 10.0 + 1e-9);
        assert!(out.wsr >= out.history[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn monotone_and_feasible(seed in 0u64..10_000, users in 1usize..5, antennas in 1usize..5, snr_db in -10.0f64..30.0) {
            let h = random_rows(users, antennas, seed);
            let power = 10f64.powf(snr_db / 10.0);
            let weights: Vec<f64> = (0..users).map(|j| 0.5 + j as f64 * 0.25).collect();
            let opts = WmmseOptions { tol: 0.0, max_iter: 60 };
            let out = wmmse_precoder(&h, &weights, 1.0, power, &opts).unwrap();
            prop_assert!(out.precoder.total_power() <= power + 1e-9);
            for pair in out.history.windows(2) {
                prop_assert!(pair[1] >= pair[0] - 1e-9, "history {:?}", out.history);
            }
        }
    }
}
