//! Block coordinate ascent on the fractional-programming form of the WSR.
//!
//! The objective is
//!
//! ```text
//! f(α, β, W, Θ) = Σ_j ω_j (log2(1 + α_j) - α_j)
//!               + 2 sqrt(ω_j (1 + α_j)) Re(β_j^* ȟ_j w_j)
//!               - |β_j|² (Σ_i |ȟ_j w_i|² + σ²)
//! ```
//!
//! which equals the WSR when `α_j` is the SINR of user `j` and `β_j` is given by
//! [`update_beta`]. Every outer iteration updates, in order, the RIS phases
//! (one block per subarray, by element-wise coordinate descent on a quadratic
//! form), `β`, the precoder (one accelerated prox-linear step), `α` and `β`.
//!
//! At fixed `α` this objective differs from its natural-log counterpart only by
//! a constant, so every block update also ascends the natural-log form. That
//! form is a tight minorant of `ln 2` times the WSR, which makes the WSR
//! sequence non-decreasing.

use rand::Rng;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{dotu, hermitian_spectral_norm, norm_sqr, CMatrix, CVector, ZERO};
use crate::metrics::{evaluate, rates_from_equivalent};
use crate::subarray::{direct_row_channel, ris_cascade_matrix, PartitionPlan, PhaseVector};
use crate::wmmse::{project_power, wmmse_precoder, PrecoderMatrix, WmmseOptions};
use num_complex::Complex64;

/// Fractional-programming auxiliaries.
#[derive(Debug, Clone, PartialEq)]
pub struct FpAuxiliaries {
    pub alpha: Vec<f64>,
    pub beta: Vec<Complex64>,
}

impl FpAuxiliaries {
    pub fn zeros(users: usize) -> Self {
        Self {
            alpha: vec![0.0; users],
            beta: vec![ZERO; users],
        }
    }
}

/// Equivalent channels written as affine functions of the RIS phases:
/// `ȟ_j(θ) = d_j + C_j^T θ_B` over user `j`'s active block `B`.
#[derive(Debug, Clone)]
pub struct LinearizedChannels {
    pub direct: Vec<CVector>,
    pub cascade: Vec<CMatrix>,
    plan: PartitionPlan,
}

impl LinearizedChannels {
    pub fn new(channels: &ChannelSet, receive: &[CVector], plan: &PartitionPlan) -> Self {
        let users = channels.users();
        Self {
            direct: (0..users)
                .map(|j| direct_row_channel(j, channels, &receive[j]))
                .collect(),
            cascade: (0..users)
                .map(|j| ris_cascade_matrix(j, channels, &receive[j], plan))
                .collect(),
            plan: plan.clone(),
        }
    }

    pub fn plan(&self) -> &PartitionPlan {
        &self.plan
    }

    pub fn users(&self) -> usize {
        self.direct.len()
    }

    pub fn equivalent(&self, j: usize, theta: &PhaseVector) -> CVector {
        let block = self.plan.active_block(j);
        let active = theta.as_vector().rows(block.start, block.len());
        &self.direct[j] + self.cascade[j].transpose() * active
    }

    pub fn equivalent_all(&self, theta: &PhaseVector) -> Vec<CVector> {
        (0..self.users())
            .map(|j| self.equivalent(j, theta))
            .collect()
    }
}

/// `η_j = Re(β_j^* ȟ_j w_j) / sqrt(ω_j)`
pub fn eta(beta: Complex64, h: &CVector, w: &CVector, weight: f64) -> f64 {
    (beta.conj() * dotu(h, w)).re / weight.sqrt()
}

/// `α = (η² + η sqrt(η² + 4)) / 2`, clamped at zero for negative `η`.
pub fn alpha_from_eta(eta: f64) -> f64 {
    (0.5 * (eta * eta + eta * (eta * eta + 4.0).sqrt())).max(0.0)
}

/// Closed-form `α` update from the current `β`.
pub fn update_alpha(
    aux: &FpAuxiliaries,
    equiv: &[CVector],
    precoder: &PrecoderMatrix,
    weights: &[f64],
) -> Vec<f64> {
    equiv
        .iter()
        .enumerate()
        .map(|(j, h)| alpha_from_eta(eta(aux.beta[j], h, &precoder.column(j), weights[j])))
        .collect()
}

/// `β_j = sqrt(ω_j (1 + α_j)) ȟ_j w_j / (Σ_i |ȟ_j w_i|² + σ²)`
pub fn update_beta(
    alpha: &[f64],
    equiv: &[CVector],
    precoder: &PrecoderMatrix,
    weights: &[f64],
    noise: f64,
) -> Vec<Complex64> {
    equiv
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let mut total = noise;
            let mut own = ZERO;
            for i in 0..precoder.users() {
                let s = dotu(h, &precoder.column(i));
                total += s.norm_sqr();
                if i == j {
                    own = s;
                }
            }
            own * ((weights[j] * (1.0 + alpha[j])).sqrt() / total)
        })
        .collect()
}

/// Auxiliaries that make [`fp_objective`] equal the WSR: `α_j = γ_j`, `β_j` from [`update_beta`].
pub fn optimal_auxiliaries(
    equiv: &[CVector],
    precoder: &PrecoderMatrix,
    weights: &[f64],
    noise: f64,
) -> Result<FpAuxiliaries> {
    let alpha = rates_from_equivalent(equiv, precoder, weights, noise)?.sinr;
    let beta = update_beta(&alpha, equiv, precoder, weights, noise);
    Ok(FpAuxiliaries { alpha, beta })
}

/// The fractional-programming objective `f(α, β, W, Θ)` (module docs).
pub fn fp_objective(
    aux: &FpAuxiliaries,
    equiv: &[CVector],
    precoder: &PrecoderMatrix,
    weights: &[f64],
    noise: f64,
) -> f64 {
    equiv
        .iter()
        .enumerate()
        .map(|(j, h)| {
            let (alpha, beta, omega) = (aux.alpha[j], aux.beta[j], weights[j]);
            let total: f64 = (0..precoder.users())
                .map(|i| dotu(h, &precoder.column(i)).norm_sqr())
                .sum::<f64>()
                + noise;
            omega * ((1.0 + alpha).log2() - alpha)
                + 2.0
                    * (omega * (1.0 + alpha)).sqrt()
                    * (beta.conj() * dotu(h, &precoder.column(j))).re
                - beta.norm_sqr() * total
        })
        .sum()
}

/// `f_ψ(θ) = θ^H A θ - 2 Re(θ^H B)` on one block of RIS elements.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub a: CMatrix,
    pub b: CVector,
}

impl QuadraticForm {
    pub fn value(&self, theta: &CVector) -> f64 {
        let quad = (theta.adjoint() * &self.a * theta)[(0, 0)].re;
        let lin = (theta.adjoint() * &self.b)[(0, 0)].re;
        quad - 2.0 * lin
    }
}

/// Phase subproblem of block `p`.
///
/// With `a_ji = conj(C_j w_i)` and `d_ji = d_j w_i`, the part of `-f` that
/// depends on the block is `f_ψ` with
/// `A = Σ_j |β_j|² Σ_i a_ji a_ji^H` and
/// `B = Σ_j sqrt(ω_j(1+α_j)) β_j a_jj - |β_j|² Σ_i d_ji a_ji`,
/// summed over the users reflected by the block.
pub fn build_quadratic_form(
    p: usize,
    lin: &LinearizedChannels,
    precoder: &PrecoderMatrix,
    aux: &FpAuxiliaries,
    weights: &[f64],
) -> QuadraticForm {
    let size = lin.plan().blocks()[p].len();
    let mut a = CMatrix::zeros(size, size);
    let mut b = CVector::zeros(size);
    let w = precoder.matrix();
    for j in lin.plan().users_of_block(p) {
        let beta2 = aux.beta[j].norm_sqr();
        // columns a_ji, i = 0..J
        let projected = (&lin.cascade[j] * w).conjugate();
        a += (&projected * projected.adjoint()) * Complex64::from(beta2);
        let scale = (weights[j] * (1.0 + aux.alpha[j])).sqrt();
        b += projected.column(j) * (aux.beta[j] * scale);
        for i in 0..precoder.users() {
            let d = dotu(&lin.direct[j], &precoder.column(i));
            b -= projected.column(i) * (d * beta2);
        }
    }
    QuadraticForm { a, b }
}

/// Element-wise minimization of `f_ψ`: `θ_n ← e^{j arg(B_n - Σ_{m≠n} A_nm θ_m)}`.
///
/// Runs `sweeps` passes in index order. An element whose target is exactly
/// zero keeps its value.
pub fn update_phases(theta: &CVector, form: &QuadraticForm, sweeps: usize) -> CVector {
    let mut theta = theta.clone();
    let n = theta.len();
    for _ in 0..sweeps {
        for k in 0..n {
            let mut target = form.b[k];
            for m in 0..n {
                if m != k {
                    target -= form.a[(k, m)] * theta[m];
                }
            }
            let r = target.norm();
            if r > 0.0 {
                theta[k] = target / r;
            }
        }
    }
    theta
}

/// Gradient of `-f` with respect to `w_j` at `ŵ_j`:
/// `-2 sqrt(ω_j(1+α_j)) β_j ȟ_j^H + 2 Σ_i |β_i|² ȟ_i^H ȟ_i ŵ_j`.
pub fn precoder_gradient(
    j: usize,
    w_hat: &CVector,
    equiv: &[CVector],
    aux: &FpAuxiliaries,
    weights: &[f64],
) -> CVector {
    let mut grad =
        equiv[j].conjugate() * (aux.beta[j] * (-2.0 * (weights[j] * (1.0 + aux.alpha[j])).sqrt()));
    for (i, h) in equiv.iter().enumerate() {
        let s = dotu(h, w_hat);
        grad += h.conjugate() * (s * 2.0 * aux.beta[i].norm_sqr());
    }
    grad
}

/// `L = 2 ‖Σ_i |β_i|² ȟ_i^H ȟ_i‖`
pub fn lipschitz_constant(equiv: &[CVector], aux: &FpAuxiliaries) -> f64 {
    let n = equiv.first().map_or(0, |h| h.len());
    let mut q = CMatrix::zeros(n, n);
    for (i, h) in equiv.iter().enumerate() {
        let hc = h.conjugate();
        q += (&hc * h.transpose()) * Complex64::from(aux.beta[i].norm_sqr());
    }
    2.0 * hermitian_spectral_norm(&q)
}

/// One prox-linear step `w_j = ŵ_j - Gra_j / L` from the extrapolated point
/// `ŵ_j = w̄_j + τ (w̄_j - ẅ_j)`, followed by projection onto the power ball.
#[allow(clippy::too_many_arguments)]
pub fn update_precoder_proxlinear(
    current: &PrecoderMatrix,
    previous: &PrecoderMatrix,
    tau: f64,
    equiv: &[CVector],
    weights: &[f64],
    aux: &FpAuxiliaries,
    power: f64,
) -> Result<PrecoderMatrix> {
    let w_hat = PrecoderMatrix::new(
        current.matrix() + (current.matrix() - previous.matrix()) * Complex64::from(tau),
    );
    let grads: Vec<CVector> = (0..current.users())
        .map(|j| precoder_gradient(j, &w_hat.column(j), equiv, aux, weights))
        .collect();
    let l = lipschitz_constant(equiv, aux);
    if !(l > 0.0) {
        if grads.iter().all(|g| norm_sqr(g) == 0.0) {
            return Ok(project_power(&w_hat, power));
        }
        return Err(Error::DegenerateAuxiliary);
    }
    let mut stepped = w_hat;
    for (j, g) in grads.iter().enumerate() {
        let w = stepped.column(j) - g * Complex64::from(1.0 / l);
        stepped.set_column(j, &w);
    }
    Ok(project_power(&stepped, power))
}

/// Extrapolation weight schedule for the precoder step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    /// `τ = 0`: plain prox-linear steps.
    None,
    /// `τ_i = (t_{i-1} - 1) / t_i`, `t_i = (1 + sqrt(1 + 4 t_{i-1}²)) / 2`,
    /// reset to `τ = 0, t = 1` whenever the step lowers the objective.
    Nesterov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdOptions {
    /// Stop once `|R_i - R_{i-1}|` drops below this (bits/s/Hz).
    pub tol: f64,
    pub max_outer: usize,
    pub phase_sweeps: usize,
    pub extrapolation: Extrapolation,
    pub wmmse: WmmseOptions,
}

impl Default for BcdOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_outer: 200,
            phase_sweeps: 1,
            extrapolation: Extrapolation::Nesterov,
            wmmse: WmmseOptions::default(),
        }
    }
}

/// Iterate of the BCD loop.
#[derive(Debug, Clone)]
pub struct BcdState {
    pub theta: PhaseVector,
    pub precoder: PrecoderMatrix,
    pub previous_precoder: PrecoderMatrix,
    pub aux: FpAuxiliaries,
    pub iteration: usize,
    pub wsr_history: Vec<f64>,
    momentum: f64,
}

#[derive(Debug, Clone)]
pub struct BcdOutcome {
    /// Best configuration seen.
    pub theta: PhaseVector,
    pub precoder: PrecoderMatrix,
    pub wsr: f64,
    /// WSR at initialization followed by the WSR after every outer iteration.
    pub wsr_history: Vec<f64>,
    /// Per-user rates aligned with `wsr_history`.
    pub rate_history: Vec<Vec<f64>>,
    pub iterations: usize,
    pub aux: FpAuxiliaries,
}

impl BcdOutcome {
    pub fn initial_wsr(&self) -> f64 {
        self.wsr_history[0]
    }

    /// Running maximum of `wsr_history`.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.wsr_history
            .iter()
            .scan(f64::MIN, |best, &r| {
                *best = best.max(r);
                Some(*best)
            })
            .collect()
    }
}

/// Problem data shared by every BCD step.
pub struct BcdProblem<'a> {
    pub channels: &'a ChannelSet,
    pub plan: &'a PartitionPlan,
    pub receive: &'a [CVector],
    pub weights: &'a [f64],
    pub noise: f64,
    pub power: f64,
}

impl BcdProblem<'_> {
    fn wsr(
        &self,
        theta: &PhaseVector,
        precoder: &PrecoderMatrix,
    ) -> Result<crate::metrics::RateReport> {
        evaluate(
            self.channels,
            theta,
            precoder,
            self.receive,
            self.plan,
            self.weights,
            self.noise,
        )
    }
}

/// Random phases, WMMSE precoder, and closed-form auxiliaries.
pub fn initialize<R: Rng + ?Sized>(
    problem: &BcdProblem<'_>,
    lin: &LinearizedChannels,
    options: &BcdOptions,
    rng: &mut R,
) -> Result<BcdState> {
    let theta = PhaseVector::random(problem.plan.elements(), rng);
    let equiv = lin.equivalent_all(&theta);
    let precoder = wmmse_precoder(
        &equiv,
        problem.weights,
        problem.noise,
        problem.power,
        &options.wmmse,
    )?
    .precoder;
    let aux = optimal_auxiliaries(&equiv, &precoder, problem.weights, problem.noise)?;
    let wsr = problem.wsr(&theta, &precoder)?.wsr;
    Ok(BcdState {
        theta,
        previous_precoder: precoder.clone(),
        precoder,
        aux,
        iteration: 0,
        wsr_history: vec![wsr],
        momentum: 1.0,
    })
}

/// Phase step restricted to the blocks in `blocks`, in order.
pub fn update_phase_blocks(
    state: &mut BcdState,
    problem: &BcdProblem<'_>,
    lin: &LinearizedChannels,
    blocks: impl IntoIterator<Item = usize>,
    sweeps: usize,
) {
    for p in blocks {
        let range = problem.plan.blocks()[p].clone();
        let form = build_quadratic_form(p, lin, &state.precoder, &state.aux, problem.weights);
        let current = state
            .theta
            .as_vector()
            .rows(range.start, range.len())
            .into_owned();
        let updated = update_phases(&current, &form, sweeps);
        for (k, z) in updated.iter().enumerate() {
            state.theta.set(range.start + k, *z);
        }
    }
}

/// One outer iteration: phases (block by block), `β`, precoder, then `(α, β)`.
///
/// The final auxiliary update jumps to the fixed point of the alternating
/// closed forms, `α_j = γ_j`, so the objective is tight at every iterate.
pub fn step(
    state: &mut BcdState,
    problem: &BcdProblem<'_>,
    lin: &LinearizedChannels,
    options: &BcdOptions,
) -> Result<f64> {
    update_phase_blocks(
        state,
        problem,
        lin,
        0..problem.plan.subarrays(),
        options.phase_sweeps,
    );

    let equiv = lin.equivalent_all(&state.theta);
    state.aux.beta = update_beta(
        &state.aux.alpha,
        &equiv,
        &state.precoder,
        problem.weights,
        problem.noise,
    );

    // restart on a drop of the surrogate, which keeps the WSR sequence monotone
    let surrogate =
        |w: &PrecoderMatrix| fp_objective(&state.aux, &equiv, w, problem.weights, problem.noise);
    let before = surrogate(&state.precoder);
    let (tau, next_momentum) = match options.extrapolation {
        Extrapolation::None => (0.0, 1.0),
        Extrapolation::Nesterov => {
            let t = state.momentum;
            let next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            ((t - 1.0) / next, next)
        }
    };
    let prox = |tau: f64| {
        update_precoder_proxlinear(
            &state.precoder,
            &state.previous_precoder,
            tau,
            &equiv,
            problem.weights,
            &state.aux,
            problem.power,
        )
    };
    let mut candidate = prox(tau)?;
    state.momentum = next_momentum;
    if tau > 0.0 && surrogate(&candidate) < before {
        candidate = prox(0.0)?;
        state.momentum = 1.0;
    }
    state.previous_precoder = std::mem::replace(&mut state.precoder, candidate);

    state.aux = optimal_auxiliaries(&equiv, &state.precoder, problem.weights, problem.noise)?;

    state.iteration += 1;
    let wsr = problem.wsr(&state.theta, &state.precoder)?.wsr;
    state.wsr_history.push(wsr);
    Ok(wsr)
}

/// Full BCD solve from a random phase initialization.
pub fn bcd_solve<R: Rng + ?Sized>(
    problem: &BcdProblem<'_>,
    options: &BcdOptions,
    rng: &mut R,
) -> Result<BcdOutcome> {
    let lin = LinearizedChannels::new(problem.channels, problem.receive, problem.plan);
    let mut state = initialize(problem, &lin, options, rng)?;
    let initial = problem.wsr(&state.theta, &state.precoder)?;
    let mut rate_history = vec![initial.rate];
    let mut best = (state.theta.clone(), state.precoder.clone(), initial.wsr);

    for _ in 0..options.max_outer {
        let previous = *state.wsr_history.last().expect("history starts non-empty");
        let wsr = step(&mut state, problem, &lin, options)?;
        rate_history.push(problem.wsr(&state.theta, &state.precoder)?.rate);
        if wsr > best.2 {
            best = (state.theta.clone(), state.precoder.clone(), wsr);
        }
        if (wsr - previous).abs() < options.tol {
            break;
        }
    }

    Ok(BcdOutcome {
        theta: best.0,
        precoder: best.1,
        wsr: best.2,
        iterations: state.iteration,
        wsr_history: state.wsr_history,
        rate_history,
        aux: state.aux,
    })
}
