//! Upper bounds on the energy reachable by incoherent (energy-diagonal)
//! charging protocols within a charging time `Ωτ`.
//!
//! All bounds follow from the best single-collision excitation rate
//! `max_x sin²x/x = R₀`: a level with transition amplitude `f` is excited at
//! most at rate `R₀ f` per unit `Ωτ`. Energies are returned in units of `E`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use serde::Serialize;

use crate::model::spin_raising_amplitude;
use crate::numerics::{bisect, golden_section_max, rk4_integrate, rk4_step};

/// RK4 step used for the lossy bound ODE.
pub const LOSSY_STEP: f64 = 1e-3;
/// Bisection tolerance for the spin bound.
pub const SPIN_BISECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct R0Constant {
    /// `R₀ = max_x sin²x/x`.
    pub value: f64,
    /// The maximizing `x*`; the best swap angle on level `n` is `x*/√(n+1)`.
    pub maximizer: f64,
}

impl R0Constant {
    /// Best incoherent swap angle for an excitation out of oscillator level `n`.
    pub fn optimal_swap_angle(&self, n: usize) -> f64 {
        self.maximizer / ((n + 1) as f64).sqrt()
    }
}

pub(crate) fn excitation_rate(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.sin().powi(2) / x
    }
}

/// Maximizes `sin²x/x` on `(0, π)` by golden-section search.
pub fn compute_r0() -> R0Constant {
    let (maximizer, value) = golden_section_max(excitation_rate, 0.0, PI, 1e-12);
    R0Constant { value, maximizer }
}

/// Process-wide cached [`compute_r0`].
pub fn r0() -> &'static R0Constant {
    static R0: OnceLock<R0Constant> = OnceLock::new();
    R0.get_or_init(compute_r0)
}

/// `Ē_max = R₀Ωτ(1 + R₀Ωτ/4)`; negative times are treated as zero.
pub fn oscillator_energy_bound(omega_tau: f64) -> f64 {
    let x = r0().value * omega_tau.max(0.0);
    x * (1.0 + x / 4.0)
}

/// `𝒫̄_max = R₀(1 + R₀Ωτ/4)` in units of `EΩ`.
pub fn oscillator_power_bound(omega_tau: f64) -> f64 {
    let r = r0().value;
    r * (1.0 + r * omega_tau.max(0.0) / 4.0)
}

/// `arctan[(2J+1)/(2f₊(j,J))]`, extended continuously to `π/2` at `J = j`.
/// Equals `arcsin[(J+½)/(j+½)]`, an increasing function of `J`.
fn spin_phase(jz: f64, j: f64) -> f64 {
    let f = spin_raising_amplitude(j, jz);
    if f == 0.0 {
        FRAC_PI_2
    } else {
        ((2.0 * jz + 1.0) / (2.0 * f)).atan()
    }
}

/// Largest `⟨J_z⟩` any incoherent protocol can reach within `Ωτ`, starting
/// from `⟨J_z⟩ = −j`. Solves
/// `arctan[(2J+1)/(2f₊(j,J))] − arctan[(1−2j)/(2f₊(j,−j))] = R₀Ωτ`
/// for `J` by bisection, saturating at `J = j`.
pub fn spin_jz_bound(omega_tau: f64, j: f64) -> f64 {
    let start = spin_phase(-j, j);
    let target = start + r0().value * omega_tau.max(0.0);
    if target <= start {
        return -j;
    }
    if target >= FRAC_PI_2 {
        return j;
    }
    bisect(|jz| spin_phase(jz, j) - target, -j, j, SPIN_BISECTION_TOL)
        .expect("spin phase is continuous and brackets the target")
        .min(j)
}

/// Bound on the energy above the ground state, `E(J + j)` in units of `E`.
pub fn spin_energy_bound(omega_tau: f64, j: f64) -> f64 {
    spin_jz_bound(omega_tau, j) + j
}

/// Charging time at which [`spin_jz_bound`] first reaches `J = j`.
pub fn spin_bound_saturation_time(j: f64) -> f64 {
    (FRAC_PI_2 - spin_phase(-j, j)) / r0().value
}

/// Estimated minimal incoherent full-charge time
/// `Ωτ* = [arctan((2j+1)/2) − arctan((1−2j)/2)]/R₀`, which tends to `π/R₀`.
pub fn spin_full_charge_time(j: f64) -> f64 {
    (((2.0 * j + 1.0) / 2.0).atan() - ((1.0 - 2.0 * j) / 2.0).atan()) / r0().value
}

/// Cap `2jR₀/π` (units of `EΩ`) on the average power of a full incoherent charge.
pub fn spin_power_cap(j: f64) -> f64 {
    2.0 * j * r0().value / PI
}

/// Right-hand side of the lossy bound ODE,
/// `dĒ/d(Ωτ) = R₀(1−γ)√(Ē+1) − (2/π)γĒ`.
pub fn lossy_rate(energy: f64, gamma: f64) -> f64 {
    r0().value * (1.0 - gamma) * (energy.max(0.0) + 1.0).sqrt() - 2.0 / PI * gamma * energy
}

/// Incoherent energy bound with photon loss `γ` between collisions, by RK4
/// integration from `Ē(0) = 0` with step [`LOSSY_STEP`]. Waiting times are
/// not counted in `Ωτ`.
pub fn lossy_energy_bound(omega_tau: f64, gamma: f64) -> f64 {
    rk4_integrate(|e| lossy_rate(e, gamma), 0.0, omega_tau.max(0.0), LOSSY_STEP)
}

/// Large-time limit of [`lossy_energy_bound`] for `γ > 0`: the root of
/// `R₀(1−γ)√(Ē+1) = (2/π)γĒ`.
pub fn lossy_fixed_point(gamma: f64) -> Option<f64> {
    if gamma <= 0.0 {
        return None;
    }
    // with s = √(Ē+1): (2γ/π)s² − R₀(1−γ)s − 2γ/π = 0
    let a = 2.0 * gamma / PI;
    let b = r0().value * (1.0 - gamma);
    let s = (b + (b * b + 4.0 * a * a).sqrt()) / (2.0 * a);
    Some(s * s - 1.0)
}

/// Tabulated [`lossy_energy_bound`] for many queries on `[0, Ωτ_max]`; each
/// query matches the direct integration bit for bit.
#[derive(Debug, Clone)]
pub struct LossyBoundCurve {
    gamma: f64,
    nodes: Vec<f64>,
}

impl LossyBoundCurve {
    pub fn new(gamma: f64, omega_tau_max: f64) -> Self {
        let n = (omega_tau_max.max(0.0) / LOSSY_STEP).floor() as usize + 1;
        let rate = |e| lossy_rate(e, gamma);
        let mut nodes = Vec::with_capacity(n + 1);
        let mut e = 0.0;
        nodes.push(e);
        for _ in 0..n {
            e = rk4_step(&rate, e, LOSSY_STEP);
            nodes.push(e);
        }
        Self { gamma, nodes }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn at(&self, omega_tau: f64) -> f64 {
        let t = omega_tau.max(0.0);
        let full = (t / LOSSY_STEP).floor() as usize;
        if full >= self.nodes.len() {
            return lossy_energy_bound(t, self.gamma);
        }
        let rest = t - full as f64 * LOSSY_STEP;
        if rest > 0.0 {
            rk4_step(&|e| lossy_rate(e, self.gamma), self.nodes[full], rest)
        } else {
            self.nodes[full]
        }
    }
}
