//! Energies, ergotropy, powers and the per-step simulation record.
//!
//! Energies are in units of `E` and measured from the ground state; powers are
//! in units of `EΩ` and times are the dimensionless `Ωτ`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BatteryModel, BatteryState, DensityMatrix, PopulationVector, MIN_EIGENVALUE_TOL};

/// Slack allowed when checking `ergotropy ≤ mean_energy` on recorded rows.
pub const ERGOTROPY_SLACK: f64 = 1e-9;

/// Anything with energy-level populations.
pub trait Populations {
    fn level_populations(&self) -> Vec<f64>;
}

impl Populations for PopulationVector {
    fn level_populations(&self) -> Vec<f64> {
        self.as_slice().to_vec()
    }
}

impl Populations for DensityMatrix {
    fn level_populations(&self) -> Vec<f64> {
        self.populations()
    }
}

impl Populations for BatteryState {
    fn level_populations(&self) -> Vec<f64> {
        self.populations()
    }
}

/// `E Σ n p(n)`: mean energy above the ground state.
pub fn mean_energy<S: Populations + ?Sized>(state: &S, model: &BatteryModel) -> f64 {
    energy_of_populations(&state.level_populations(), model)
}

pub fn energy_of_populations(p: &[f64], model: &BatteryModel) -> f64 {
    model.quantum() * p.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>()
}

/// Mean energy in the battery's own convention (`⟨E J_z⟩` for a spin).
pub fn absolute_energy<S: Populations + ?Sized>(state: &S, model: &BatteryModel) -> f64 {
    mean_energy(state, model) + model.ground_energy()
}

/// Energy of the passive state built from `weights` (any order).
fn passive_energy(mut weights: Vec<f64>, model: &BatteryModel) -> f64 {
    // stable sort keeps tied eigenvalues in a fixed order; ties contribute
    // the same energy either way
    weights.sort_by(|a, b| b.total_cmp(a));
    energy_of_populations(&weights, model)
}

/// Ergotropy of a diagonal state: mean energy minus the energy of the
/// populations sorted in descending order along the ladder.
pub fn ergotropy_of_populations(p: &[f64], model: &BatteryModel) -> f64 {
    (energy_of_populations(p, model) - passive_energy(p.to_vec(), model)).max(0.0)
}

/// Levels whose population is below this are left out of the ergotropy
/// eigenproblem; their coherences are bounded by `√(p(n)p(m))`.
pub const ERGOTROPY_SUPPORT_CUTOFF: f64 = 1e-32;

/// `tr(ρH) − tr(ρ_passive H)`.
pub fn ergotropy(rho: &DensityMatrix, model: &BatteryModel) -> Result<f64> {
    let m = rho.matrix();
    let p = rho.populations();
    let Some(top) = p.iter().rposition(|&x| x > ERGOTROPY_SUPPORT_CUTOFF) else {
        return Ok(0.0);
    };
    // subnormal tails far from the support upset the QR sweeps
    let block = m.view((0, 0), (top + 1, top + 1));
    let herm = (block + block.adjoint()).scale(0.5);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue of the battery state".into()));
    }
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if min < MIN_EIGENVALUE_TOL {
        return Err(Error::invariant(format!("state has negative eigenvalue {min:e}")));
    }
    if min < -1e-14 {
        log::warn!("clamping negative eigenvalue {min:e} of the battery state");
    }
    ev.iter_mut().for_each(|x| *x = x.max(0.0));
    ev.resize(p.len(), 0.0);
    Ok((mean_energy(rho, model) - passive_energy(ev, model)).max(0.0))
}

pub fn ergotropy_of_state(state: &BatteryState, model: &BatteryModel) -> Result<f64> {
    match state {
        BatteryState::Populations(p) => Ok(ergotropy_of_populations(p.as_slice(), model)),
        BatteryState::Density(rho) => ergotropy(rho, model),
    }
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(C64::norm_sqr).sum()
}

pub fn purity_of_state(state: &BatteryState) -> f64 {
    match state {
        BatteryState::Populations(p) => p.as_slice().iter().map(|x| x * x).sum(),
        BatteryState::Density(rho) => purity(rho),
    }
}

/// Population of the highest level, `p(d−1)`.
pub fn top_level_population<S: Populations + ?Sized>(state: &S) -> f64 {
    state.level_populations().last().copied().unwrap_or(0.0)
}

/// `𝒫(k) = ΔĒ(k)/t_k`.
pub fn transient_power(delta_energy: f64, step_time: f64) -> Result<f64> {
    if !(step_time > 0.0) {
        return Err(Error::domain(format!("step duration must be positive, got {step_time}")));
    }
    Ok(delta_energy / step_time)
}

/// `𝒫̄ = Ē(K)/τ`.
pub fn cumulative_power(energy: f64, total_time: f64) -> Result<f64> {
    if !(total_time > 0.0) {
        return Err(Error::domain(format!("charging time must be positive, got {total_time}")));
    }
    Ok(energy / total_time)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordRow {
    pub step: usize,
    pub omega_tau: f64,
    pub mean_energy: f64,
    pub ergotropy: f64,
    pub transient_power: f64,
    pub cumulative_power: f64,
    pub purity: f64,
    pub top_level_population: f64,
}

/// Time series of one protocol run. Row 0 is the initial state at `Ωτ = 0`,
/// whose powers are reported as zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimulationRecord {
    pub rows: Vec<RecordRow>,
    /// Level populations per row, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributions: Option<Vec<Vec<f64>>>,
}

impl SimulationRecord {
    pub fn last(&self) -> Option<&RecordRow> {
        self.rows.last()
    }

    pub fn final_energy(&self) -> f64 {
        self.last().map_or(0.0, |r| r.mean_energy)
    }

    pub fn total_time(&self) -> f64 {
        self.last().map_or(0.0, |r| r.omega_tau)
    }

    /// Checks the time axis, the ergotropy bound and the finiteness of powers.
    pub fn check_invariants(&self) -> Result<()> {
        for pair in self.rows.windows(2) {
            if !(pair[1].omega_tau > pair[0].omega_tau) {
                return Err(Error::invariant(format!(
                    "charging time not increasing at step {}",
                    pair[1].step
                )));
            }
        }
        for r in &self.rows {
            if r.ergotropy > r.mean_energy + ERGOTROPY_SLACK {
                return Err(Error::invariant(format!(
                    "ergotropy {} exceeds mean energy {} at step {}",
                    r.ergotropy, r.mean_energy, r.step
                )));
            }
            if !(r.transient_power.is_finite() && r.cumulative_power.is_finite()) {
                return Err(Error::invariant(format!("non-finite power at step {}", r.step)));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn osc(d: usize) -> BatteryModel {
        BatteryModel::oscillator(d).unwrap()
    }

    #[test]
    fn energies_of_fock_states() {
        let m = osc(6);
        assert_eq!(mean_energy(&DensityMatrix::ground(6), &m), 0.0);
        assert_eq!(mean_energy(&DensityMatrix::basis(6, 4), &m), 4.0);
        let m2 = m.with_quantum(2.5).unwrap();
        assert_eq!(mean_energy(&PopulationVector::basis(6, 3), &m2), 7.5);
    }

    #[test]
    fn spin_energy_offset() {
        let m = BatteryModel::spin(2.0).unwrap();
        let p = PopulationVector::basis(5, 1);
        assert_eq!(mean_energy(&p, &m), 1.0);
        assert_eq!(absolute_energy(&p, &m), -1.0);
    }

    #[test]
    fn ergotropy_examples() {
        let m = osc(3);
        assert_eq!(ergotropy(&DensityMatrix::ground(3), &m).unwrap(), 0.0);

        let p = [0.5, 0.2, 0.3];
        assert_abs_diff_eq!(energy_of_populations(&p, &m), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(ergotropy_of_populations(&p, &m), 0.1, epsilon = 1e-15);
        let rho = DensityMatrix::from_populations(&PopulationVector::new(p.to_vec()).unwrap());
        assert_abs_diff_eq!(ergotropy(&rho, &m).unwrap(), 0.1, epsilon = 1e-12);

        let psi = DensityMatrix::pure(&[C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::from(0.64)]).unwrap();
        assert_abs_diff_eq!(ergotropy(&psi, &m).unwrap(), mean_energy(&psi, &m), epsilon = 1e-12);
    }

    #[test]
    fn purity_examples() {
        assert_abs_diff_eq!(purity(&DensityMatrix::basis(4, 2)), 1.0);
        assert_abs_diff_eq!(purity(&DensityMatrix::maximally_mixed(5)), 0.2, epsilon = 1e-15);
        assert_eq!(top_level_population(&PopulationVector::basis(4, 3)), 1.0);
    }

    #[test]
    fn power_definitions() {
        assert_eq!(transient_power(0.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(transient_power(1.0, std::f64::consts::FRAC_PI_2).unwrap(), 2.0 / std::f64::consts::PI);
        assert!(transient_power(1.0, 0.0).is_err());
        assert!(cumulative_power(1.0, 0.0).is_err());
        assert_eq!(cumulative_power(3.0, 1.5).unwrap(), 2.0);
    }

    #[test]
    fn record_invariants() {
        let row = |step, t: f64, e: f64, erg: f64| RecordRow {
            step,
            omega_tau: t,
            mean_energy: e,
            ergotropy: erg,
            transient_power: 0.0,
            cumulative_power: 0.0,
            purity: 1.0,
            top_level_population: 0.0,
        };
        let good = SimulationRecord { rows: vec![row(0, 0.0, 0.0, 0.0), row(1, 0.5, 1.0, 0.9)], distributions: None };
        assert!(good.check_invariants().is_ok());
        let bad_time = SimulationRecord { rows: vec![row(0, 0.0, 0.0, 0.0), row(1, 0.0, 1.0, 0.9)], distributions: None };
        assert!(bad_time.check_invariants().is_err());
        let bad_erg = SimulationRecord { rows: vec![row(0, 0.0, 1.0, 1.1)], distributions: None };
        assert!(bad_erg.check_invariants().is_err());
    }
}
