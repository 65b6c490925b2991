//! Charging schedules and the collision loop.
//!
//! A run alternates one collision with a fresh qubit and, when `γ > 0`, one
//! photon-loss step. Only collision time counts towards `Ωτ`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, LossyBoundCurve};
use crate::channels::{
    apply_damping, damp_populations, population_step_raw, CollisionChannel,
};
use crate::error::{Error, Result};
use crate::model::{
    ladder_amplitude, BatteryKind, BatteryModel, BatteryState, DensityMatrix, PopulationVector, QubitState,
};
use crate::numerics::golden_section_max;
use crate::observables::{
    ergotropy_of_state, mean_energy, purity_of_state, top_level_population, RecordRow, SimulationRecord,
};

/// Number of uniform probes used to bracket the greedy optimum.
pub const GREEDY_PROBES: usize = 40;
/// A greedy step gaining less than this (units of `E`) ends the schedule.
pub const GREEDY_MIN_GAIN: f64 = 1e-12;
/// Levels holding less population than this do not set the greedy search range.
pub const GREEDY_SUPPORT_CUTOFF: f64 = 1e-6;
/// Top-level population above which an oscillator run warns about truncation.
pub const TRUNCATION_WARNING: f64 = 1e-6;
/// Default horizon `Ωτ_max` of advantage-onset searches.
pub const DEFAULT_ONSET_HORIZON: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Fixed,
    FullSwap,
    GreedyCumulative,
    GreedyTransient,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreedyObjective {
    /// Maximize `Ē(k)/τ_k` after the step.
    Cumulative,
    /// Maximize `ΔĒ(k)/θ_k` of the step alone.
    Transient,
}

impl GreedyObjective {
    pub fn policy(self) -> Policy {
        match self {
            GreedyObjective::Cumulative => Policy::GreedyCumulative,
            GreedyObjective::Transient => Policy::GreedyTransient,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleStep {
    pub theta: f64,
    pub qubit: QubitState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub steps: Vec<ScheduleStep>,
    /// Photon-loss parameter applied after each collision.
    pub gamma: f64,
    pub policy: Policy,
    /// Whether the last collision is also followed by a loss step.
    pub damp_after_last: bool,
}

impl Schedule {
    pub fn new(steps: Vec<ScheduleStep>, gamma: f64, policy: Policy) -> Self {
        Self { steps, gamma, policy, damp_after_last: true }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// `Ωτ = Σ θ_k`.
    pub fn total_time(&self) -> f64 {
        self.steps.iter().map(|s| s.theta).sum()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn validate(&self, model: &BatteryModel) -> Result<()> {
        if !(self.gamma.is_finite() && (0.0..1.0).contains(&self.gamma)) {
            return Err(Error::domain(format!("damping gamma must lie in [0, 1), got {}", self.gamma)));
        }
        let max = PI * model.dim() as f64;
        for (k, s) in self.steps.iter().enumerate() {
            if !(s.theta.is_finite() && s.theta > 0.0 && s.theta <= max) {
                return Err(Error::domain(format!(
                    "swap angle {} of step {} outside (0, π·d]",
                    s.theta,
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// `steps` identical collisions at angle `theta`.
pub fn fixed_schedule(qubit: QubitState, theta: f64, steps: usize, gamma: f64) -> Schedule {
    Schedule::new(vec![ScheduleStep { theta, qubit }; steps], gamma, Policy::Fixed)
}

/// As many collisions at `theta` as fit into `Ωτ_max`.
pub fn fixed_schedule_until(qubit: QubitState, theta: f64, omega_tau_max: f64, gamma: f64) -> Schedule {
    let steps = (omega_tau_max / theta + 1e-9).floor().max(0.0) as usize;
    fixed_schedule(qubit, theta, steps, gamma)
}

/// Excited qubits with `ϑ_k = π/(2f(k))`, moving the battery from `|k−1⟩` to
/// `|k⟩` exactly at step `k`.
pub fn full_swap_schedule(model: &BatteryModel, steps: usize) -> Result<Schedule> {
    if steps >= model.dim() {
        return Err(Error::domain(format!(
            "a {}-level battery holds at most {} full swaps, asked for {steps}",
            model.dim(),
            model.dim() - 1
        )));
    }
    let steps = (1..=steps)
        .map(|k| Ok(ScheduleStep { theta: FRAC_PI_2 / ladder_amplitude(model, k)?, qubit: QubitState::excited() }))
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule::new(steps, 0.0, Policy::FullSwap))
}

/// Mean energy gain `ΔĒ(θ)/E` of one incoherent collision.
fn incoherent_gain(p: &[f64], f: &[f64], q: f64, theta: f64, lo: usize, hi: usize) -> f64 {
    (lo..=hi)
        .map(|n| p[n] * ((1.0 - q) * (f[n + 1] * theta).sin().powi(2) - q * (f[n] * theta).sin().powi(2)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyChoice {
    pub theta: f64,
    /// Energy gain of the step, units of `E`.
    pub gain: f64,
    pub objective_value: f64,
}

/// Picks the next swap angle for incoherent qubits with ground population `q`
/// given the current populations, the energy already stored and the time
/// already spent. Returns `None` when no angle gains energy.
///
/// The search runs over `(0, π/f(n₀+1)]`, where `n₀` is the lowest level with
/// appreciable population, so that the first excitation lobe of every
/// populated level is inside the range.
pub fn greedy_schedule_step(
    populations: &PopulationVector,
    model: &BatteryModel,
    q: f64,
    energy: f64,
    elapsed: f64,
    objective: GreedyObjective,
) -> Option<GreedyChoice> {
    let p = populations.as_slice();
    let f = model.padded_amplitudes();
    let e_q = model.quantum();
    let lo = p.iter().position(|&x| x >= GREEDY_SUPPORT_CUTOFF)?;
    let lo_any = p.iter().position(|&x| x > 0.0)?;
    let hi = p.iter().rposition(|&x| x > 0.0)?;
    if f[lo + 1] == 0.0 {
        return None;
    }
    let theta_hi = PI / f[lo + 1];
    let score = |theta: f64| {
        let gain = e_q * incoherent_gain(p, &f, q, theta, lo_any, hi);
        match objective {
            GreedyObjective::Cumulative => (energy + gain) / (elapsed + theta),
            GreedyObjective::Transient => gain / theta,
        }
    };

    let step = theta_hi / GREEDY_PROBES as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    for i in 1..=GREEDY_PROBES {
        let s = score(i as f64 * step);
        if s > best.1 {
            best = (i, s);
        }
    }
    let a = (best.0 as f64 - 1.0) * step;
    let b = ((best.0 + 1) as f64 * step).min(theta_hi);
    let (mut theta, mut value) = golden_section_max(|t| if t > 0.0 { score(t) } else { f64::NEG_INFINITY }, a, b, 1e-12 * theta_hi.max(1.0));
    if best.1 > value {
        theta = best.0 as f64 * step;
        value = best.1;
    }
    let gain = e_q * incoherent_gain(p, &f, q, theta, lo_any, hi);
    if !(gain > GREEDY_MIN_GAIN * e_q) {
        return None;
    }
    Some(GreedyChoice { theta, gain, objective_value: value })
}

/// Greedy incoherent schedule from the ground state, built until the next
/// step would exceed `Ωτ_max`, no angle gains energy, or `max_steps` is hit.
pub fn greedy_schedule(
    model: &BatteryModel,
    q: f64,
    objective: GreedyObjective,
    omega_tau_max: f64,
    gamma: f64,
    max_steps: usize,
) -> Result<Schedule> {
    let qubit = QubitState::incoherent(q)?;
    let f = model.padded_amplitudes();
    let mut p = PopulationVector::ground(model.dim());
    let (mut energy, mut elapsed) = (0.0, 0.0);
    let mut steps = Vec::new();
    while steps.len() < max_steps {
        let Some(choice) = greedy_schedule_step(&p, model, q, energy, elapsed, objective) else {
            break;
        };
        if elapsed + choice.theta > omega_tau_max {
            break;
        }
        p = PopulationVector::from_vec_unchecked(population_step_raw(p.as_slice(), q, choice.theta, &f));
        if gamma > 0.0 {
            p = damp_populations(model, &p, gamma)?;
        }
        energy = mean_energy(&p, model);
        elapsed += choice.theta;
        steps.push(ScheduleStep { theta: choice.theta, qubit });
    }
    Ok(Schedule::new(steps, gamma, objective.policy()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Record every `n`-th step (the initial and final states are always kept).
    pub record_every: usize,
    pub keep_distributions: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { record_every: 1, keep_distributions: false }
    }
}

fn record_row(state: &BatteryState, model: &BatteryModel, step: usize, omega_tau: f64, energy: f64, transient: f64) -> Result<RecordRow> {
    let cumulative = if omega_tau > 0.0 { energy / omega_tau } else { 0.0 };
    Ok(RecordRow {
        step,
        omega_tau,
        mean_energy: energy,
        ergotropy: ergotropy_of_state(state, model)?,
        transient_power: transient,
        cumulative_power: cumulative,
        purity: purity_of_state(state),
        top_level_population: top_level_population(state),
    })
}

/// Runs `schedule` from `initial`, keeping energy-diagonal states on the
/// population fast path whenever every qubit is incoherent.
pub fn run_protocol(
    model: &BatteryModel,
    schedule: &Schedule,
    initial: &BatteryState,
    options: &RunOptions,
) -> Result<SimulationRecord> {
    schedule.validate(model)?;
    if initial.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), actual: initial.dim() });
    }
    let every = options.record_every.max(1);
    let incoherent = schedule.steps.iter().all(|s| s.qubit.is_incoherent());
    let mut state = match initial {
        BatteryState::Density(rho) if incoherent && rho.max_coherence() == 0.0 => {
            BatteryState::Populations(PopulationVector::new(rho.populations())?)
        }
        BatteryState::Populations(p) if !incoherent => BatteryState::Density(DensityMatrix::from_populations(p)),
        other => other.clone(),
    };
    let f = model.padded_amplitudes();

    let mut record = SimulationRecord::default();
    let mut dists = options.keep_distributions.then(Vec::new);
    let mut energy = mean_energy(&state, model);
    record.rows.push(record_row(&state, model, 0, 0.0, energy, 0.0)?);
    if let Some(d) = dists.as_mut() {
        d.push(state.populations());
    }

    let mut channel: Option<(ScheduleStep, CollisionChannel)> = None;
    let mut elapsed = 0.0;
    let mut warned = false;
    let truncated = model.kind() == BatteryKind::Oscillator;
    let last = schedule.steps.len();
    for (idx, step) in schedule.steps.iter().enumerate() {
        let k = idx + 1;
        state = match state {
            BatteryState::Populations(p) => BatteryState::Populations(PopulationVector::from_vec_unchecked(
                population_step_raw(p.as_slice(), step.qubit.q(), step.theta, &f),
            )),
            BatteryState::Density(rho) => {
                let reuse = matches!(&channel, Some((s, _)) if s == step);
                if !reuse {
                    channel = Some((*step, CollisionChannel::new(model, &step.qubit, step.theta)?));
                }
                let (_, ch) = channel.as_mut().expect("channel prepared above");
                BatteryState::Density(ch.apply(&rho)?)
            }
        };
        if schedule.gamma > 0.0 && (k < last || schedule.damp_after_last) {
            state = match state {
                BatteryState::Populations(p) => BatteryState::Populations(damp_populations(model, &p, schedule.gamma)?),
                BatteryState::Density(rho) => BatteryState::Density(apply_damping(model, &rho, schedule.gamma)?),
            };
        }
        elapsed += step.theta;
        let new_energy = mean_energy(&state, model);
        let transient = (new_energy - energy) / step.theta;
        energy = new_energy;

        let top = top_level_population(&state);
        // spins and uniform ladders are genuinely bounded, only the oscillator is cut off
        if truncated && top > TRUNCATION_WARNING && !warned {
            log::warn!("top level population {top:e} at step {k}: the {}-level truncation is being reached", model.dim());
            warned = true;
        }
        if k % every == 0 || k == last {
            record.rows.push(record_row(&state, model, k, elapsed, energy, transient)?);
            if let Some(d) = dists.as_mut() {
                d.push(state.populations());
            }
        }
    }
    if let BatteryState::Density(rho) = &state {
        let tr = (rho.trace().re - 1.0).abs();
        if tr > 1e-10 {
            return Err(Error::invariant(format!("trace drifted by {tr:e} over the run")));
        }
    }
    record.distributions = dists;
    Ok(record)
}

/// Displaced-vacuum limit `θ → 0` of coherent charging with `|+⟩` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingLimit {
    /// `Ē = E(Ωτ)²/4`, units of `E`.
    pub mean_energy: f64,
    /// Poisson photon-number law with mean `(Ωτ/2)²`, first `levels` entries.
    pub distribution: Vec<f64>,
}

pub fn driving_limit_oscillator(omega_tau: f64, levels: usize) -> DrivingLimit {
    let mean = (omega_tau / 2.0).powi(2);
    let distribution = (0..levels)
        .map(|n| {
            if mean == 0.0 {
                return if n == 0 { 1.0 } else { 0.0 };
            }
            let ln_fact: f64 = (1..=n).map(|i| (i as f64).ln()).sum();
            (n as f64 * mean.ln() - mean - ln_fact).exp()
        })
        .collect();
    DrivingLimit { mean_energy: mean, distribution }
}

/// Spin rotation limit: `Ē + Ej = Ej(1 − cos Ωτ)`, full charge at `Ωτ = π`.
pub fn driving_limit_spin(omega_tau: f64, j: f64) -> f64 {
    j * (1.0 - omega_tau.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdvantageOnset {
    pub theta: f64,
    pub gamma: f64,
    /// First `Ωτ` at which the coherent energy exceeds the incoherent bound.
    pub tau_ad: Option<f64>,
    /// Collisions simulated.
    pub steps: usize,
}

/// Runs fixed-`θ` charging with `|+⟩` qubits (and loss `γ` after every
/// collision) until the battery energy first exceeds the incoherent bound at
/// the same `Ωτ`, or the horizon is reached.
pub fn find_advantage_onset(model: &BatteryModel, theta: f64, gamma: f64, horizon: f64) -> Result<AdvantageOnset> {
    let bound: Box<dyn Fn(f64) -> f64> = match model.kind() {
        BatteryKind::Oscillator => {
            let curve = LossyBoundCurve::new(gamma, horizon);
            Box::new(move |t| curve.at(t))
        }
        BatteryKind::Spin if gamma == 0.0 => {
            let j = model.spin_j().expect("spin model");
            Box::new(move |t| bounds::spin_energy_bound(t, j))
        }
        kind => return Err(Error::UnsupportedModel { operation: "advantage-onset search", kind }),
    };
    let schedule = fixed_schedule_until(QubitState::plus(), theta, horizon, gamma);
    schedule.validate(model)?;
    let e_q = model.quantum();
    let mut channel = CollisionChannel::new(model, &QubitState::plus(), theta)?;
    let mut rho = DensityMatrix::ground(model.dim());
    for k in 1..=schedule.len() {
        rho = channel.apply(&rho)?;
        if gamma > 0.0 {
            rho = apply_damping(model, &rho, gamma)?;
        }
        let t = k as f64 * theta;
        if mean_energy(&rho, model) > e_q * bound(t) {
            return Ok(AdvantageOnset { theta, gamma, tau_ad: Some(t), steps: k });
        }
    }
    Ok(AdvantageOnset { theta, gamma, tau_ad: None, steps: schedule.len() })
}

/// [`find_advantage_onset`] over a `θ × γ` grid in parallel; rows come back
/// sorted by `(γ, θ)` whatever the completion order.
pub fn sweep_onset(model: &BatteryModel, thetas: &[f64], gammas: &[f64], horizon: f64) -> Result<Vec<AdvantageOnset>> {
    if thetas.is_empty() || gammas.is_empty() {
        return Err(Error::domain("onset sweep needs at least one theta and one gamma"));
    }
    let grid: Vec<(f64, f64)> = gammas.iter().flat_map(|&g| thetas.iter().map(move |&t| (t, g))).collect();
    let mut rows = grid
        .par_iter()
        .map(|&(t, g)| find_advantage_onset(model, t, g, horizon))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.theta.total_cmp(&b.theta)));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_swap_oscillator_time() {
        let model = BatteryModel::oscillator(10).unwrap();
        let s = full_swap_schedule(&model, 4).unwrap();
        let expect = FRAC_PI_2 * (1.0 + 1.0 / 2f64.sqrt() + 1.0 / 3f64.sqrt() + 0.5);
        assert_abs_diff_eq!(s.total_time(), expect, epsilon = 1e-12);
        assert_abs_diff_eq!(s.total_time(), 4.374, epsilon = 1e-3);
        assert!(full_swap_schedule(&model, 10).is_err());
    }

    #[test]
    fn full_swap_keeps_fock_states() {
        let model = BatteryModel::oscillator(8).unwrap();
        let s = full_swap_schedule(&model, 7).unwrap();
        let rec = run_protocol(&model, &s, &BatteryState::ground(&model), &RunOptions { record_every: 1, keep_distributions: true })
            .unwrap();
        for (k, (row, dist)) in rec.rows.iter().zip(rec.distributions.as_ref().unwrap()).enumerate() {
            assert_abs_diff_eq!(dist[k], 1.0, epsilon = 1e-10);
            assert_abs_diff_eq!(row.mean_energy, k as f64, epsilon = 1e-10);
            assert_abs_diff_eq!(row.ergotropy, row.mean_energy, epsilon = 1e-10);
            assert_abs_diff_eq!(row.purity, 1.0, epsilon = 1e-10);
            if k > 0 {
                assert_abs_diff_eq!(row.transient_power, 2.0 * (k as f64).sqrt() / PI, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn empty_schedule_records_initial_state() {
        let model = BatteryModel::oscillator(5).unwrap();
        let s = Schedule::new(vec![], 0.0, Policy::Fixed);
        let rec = run_protocol(&model, &s, &BatteryState::ground(&model), &RunOptions::default()).unwrap();
        assert_eq!(rec.rows.len(), 1);
        assert_eq!(rec.rows[0].omega_tau, 0.0);
        assert_eq!(rec.rows[0].mean_energy, 0.0);
    }

    #[test]
    fn schedule_validation() {
        let model = BatteryModel::oscillator(5).unwrap();
        let s = fixed_schedule(QubitState::plus(), 0.0, 3, 0.0);
        assert!(run_protocol(&model, &s, &BatteryState::ground(&model), &RunOptions::default()).is_err());
        let s = fixed_schedule(QubitState::plus(), 0.1, 3, 1.0);
        assert!(s.validate(&model).is_err());
        let s = fixed_schedule(QubitState::plus(), 0.1, 3, 0.0);
        let other = BatteryState::ground(&BatteryModel::oscillator(6).unwrap());
        assert!(run_protocol(&model, &s, &other, &RunOptions::default()).is_err());
    }

    #[test]
    fn spin_damping_is_rejected_in_runs() {
        let model = BatteryModel::spin(2.0).unwrap();
        let s = fixed_schedule(QubitState::plus(), 0.1, 3, 1e-3);
        let err = run_protocol(&model, &s, &BatteryState::ground(&model), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedModel { .. }));
    }

    #[test]
    fn greedy_first_step_from_vacuum() {
        let model = BatteryModel::oscillator(50).unwrap();
        let r0 = bounds::r0();
        for obj in [GreedyObjective::Cumulative, GreedyObjective::Transient] {
            let c = greedy_schedule_step(&PopulationVector::ground(50), &model, 0.0, 0.0, 0.0, obj).unwrap();
            assert_abs_diff_eq!(c.theta, r0.maximizer, epsilon = 1e-5);
            assert_abs_diff_eq!(c.theta, 1.1656, epsilon = 1e-4);
            assert_abs_diff_eq!(c.gain / c.theta, r0.value, epsilon = 1e-10);
        }
        // brute-force scan oracle
        let best = (1..=200_000)
            .map(|i| i as f64 * PI / 200_000.0)
            .max_by(|a, b| (a.sin().powi(2) / a).total_cmp(&(b.sin().powi(2) / b)))
            .unwrap();
        assert_abs_diff_eq!(best, r0.maximizer, epsilon = 2e-5);
    }

    #[test]
    fn greedy_terminates_for_ground_qubits() {
        let model = BatteryModel::oscillator(10).unwrap();
        assert!(greedy_schedule_step(&PopulationVector::ground(10), &model, 1.0, 0.0, 0.0, GreedyObjective::Cumulative)
            .is_none());
        let s = greedy_schedule(&model, 1.0, GreedyObjective::Cumulative, 10.0, 0.0, 100).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn driving_limits() {
        let v = driving_limit_oscillator(0.0, 5);
        assert_eq!(v.mean_energy, 0.0);
        assert_eq!(v.distribution, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let d = driving_limit_oscillator(2.0, 30);
        assert_abs_diff_eq!(d.mean_energy, 1.0);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(d.distribution[0], e, epsilon = 1e-15);
        assert_abs_diff_eq!(d.distribution[3], e / 6.0, epsilon = 1e-15);
        let mean: f64 = d.distribution.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert_abs_diff_eq!(mean, 1.0, epsilon = 1e-12);

        assert_abs_diff_eq!(driving_limit_spin(PI, 4.5), 9.0);
        assert_abs_diff_eq!(driving_limit_spin(FRAC_PI_2, 4.5), 4.5, epsilon = 1e-12);
    }

    #[test]
    fn onset_rejects_unsupported_models() {
        let ladder = BatteryModel::uniform_ladder(10).unwrap();
        assert!(find_advantage_onset(&ladder, 0.1, 0.0, 5.0).is_err());
        let spin = BatteryModel::spin(2.0).unwrap();
        assert!(find_advantage_onset(&spin, 0.1, 1e-3, 5.0).is_err());
        assert!(sweep_onset(&BatteryModel::oscillator(5).unwrap(), &[], &[0.0], 1.0).is_err());
    }
}
