//! Battery and charging-qubit data model.
//!
//! Every battery is a uniform ladder of `dim` levels `|0⟩ … |dim-1⟩` spaced by
//! the energy quantum `E`. Level `n` of a spin-`j` battery is the magnetic
//! sublevel `m = n - j`, so `|0⟩` is always the ground state and states never
//! carry the spin energy offset; observables add it back when asked for
//! absolute energies.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances shared by the state invariants.
pub const TRACE_TOL: f64 = 1e-12;
pub const HERMITICITY_TOL: f64 = 1e-12;
pub const MIN_EIGENVALUE_TOL: f64 = -1e-10;
pub const POPULATION_CLAMP_TOL: f64 = -1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryKind {
    Oscillator,
    Spin,
    UniformLadder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryModel {
    kind: BatteryKind,
    dim: usize,
    quantum: f64,
}

impl BatteryModel {
    /// Harmonic oscillator truncated to `dim` Fock levels.
    pub fn oscillator(dim: usize) -> Result<Self> {
        Self::new(BatteryKind::Oscillator, dim)
    }

    /// Ideal ladder with unit transition amplitudes.
    pub fn uniform_ladder(dim: usize) -> Result<Self> {
        Self::new(BatteryKind::UniformLadder, dim)
    }

    /// Spin-`j` battery with `2j + 1` levels; `j` must be a positive integer
    /// or half-integer.
    pub fn spin(j: f64) -> Result<Self> {
        let two_j = 2.0 * j;
        if !two_j.is_finite() || two_j < 1.0 || (two_j - two_j.round()).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "spin quantum number must be a positive half-integer, got {j}"
            )));
        }
        Self::new(BatteryKind::Spin, two_j.round() as usize + 1)
    }

    /// Spin battery given its number of levels `dim = 2j + 1`.
    pub fn spin_with_dim(dim: usize) -> Result<Self> {
        Self::new(BatteryKind::Spin, dim)
    }

    fn new(kind: BatteryKind, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("battery needs at least 2 levels, got {dim}")));
        }
        Ok(Self { kind, dim, quantum: 1.0 })
    }

    /// Sets the energy quantum `E` (default 1).
    pub fn with_quantum(mut self, quantum: f64) -> Result<Self> {
        if !(quantum.is_finite() && quantum > 0.0) {
            return Err(Error::domain(format!("energy quantum must be > 0, got {quantum}")));
        }
        self.quantum = quantum;
        Ok(self)
    }

    pub fn kind(&self) -> BatteryKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn quantum(&self) -> f64 {
        self.quantum
    }

    /// Spin quantum number `j`, for spin batteries only.
    pub fn spin_j(&self) -> Option<f64> {
        (self.kind == BatteryKind::Spin).then(|| (self.dim - 1) as f64 / 2.0)
    }

    /// Energy of the ground state in the battery's own convention: `-E j` for
    /// the spin (`H_B = E J_z`), zero otherwise.
    pub fn ground_energy(&self) -> f64 {
        self.spin_j().map_or(0.0, |j| -self.quantum * j)
    }

    /// Maximum storable energy above the ground state.
    pub fn capacity(&self) -> f64 {
        self.quantum * (self.dim - 1) as f64
    }

    /// Transition amplitudes `f(0), f(1), …, f(dim)` padded with the
    /// boundary zeros `f(0) = f(dim) = 0`.
    pub fn padded_amplitudes(&self) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.dim + 1);
        f.push(0.0);
        f.extend((1..self.dim).map(|n| self.amplitude_unchecked(n)));
        f.push(0.0);
        f
    }

    fn amplitude_unchecked(&self, n: usize) -> f64 {
        match self.kind {
            BatteryKind::Oscillator => (n as f64).sqrt(),
            BatteryKind::UniformLadder => 1.0,
            BatteryKind::Spin => {
                let j = (self.dim - 1) as f64 / 2.0;
                spin_raising_amplitude(j, n as f64 - 1.0 - j)
            }
        }
    }
}

/// `f₊(j, m) = √(j(j+1) − m(m+1))`, the matrix element of `J₊` from `m` to `m+1`.
pub fn spin_raising_amplitude(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// `f₋(j, m) = √(j(j+1) − m(m−1))`, the matrix element of `J₋` from `m` to `m−1`.
pub fn spin_lowering_amplitude(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt()
}

/// Amplitude `f(n)` of the transition `n−1 ↔ n`, defined for `1 ≤ n ≤ dim−1`.
pub fn ladder_amplitude(model: &BatteryModel, n: usize) -> Result<f64> {
    if n == 0 || n >= model.dim {
        return Err(Error::domain(format!(
            "ladder index {n} outside 1..={} for a {}-level battery",
            model.dim - 1,
            model.dim
        )));
    }
    Ok(model.amplitude_unchecked(n))
}

/// Charging qubit `ρ_Q = q|g⟩⟨g| + (1−q)|e⟩⟨e| + c√(q(1−q))(e^{−iα}|g⟩⟨e| + h.c.)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QubitState {
    q: f64,
    c: f64,
    alpha: f64,
}

impl QubitState {
    pub fn new(q: f64, c: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("ground population q must lie in [0, 1], got {q}")));
        }
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::domain(format!("coherence c must lie in [0, 1], got {c}")));
        }
        if !(alpha.is_finite() && (0.0..TAU).contains(&alpha)) {
            return Err(Error::domain(format!("phase alpha must lie in [0, 2π), got {alpha}")));
        }
        Ok(Self { q, c, alpha })
    }

    /// Energy-diagonal qubit with ground population `q`.
    pub fn incoherent(q: f64) -> Result<Self> {
        Self::new(q, 0.0, 0.0)
    }

    /// Pure superposition `√q|g⟩ + √(1−q)e^{iα}|e⟩`.
    pub fn pure(q: f64, alpha: f64) -> Result<Self> {
        Self::new(q, 1.0, alpha)
    }

    /// `|e⟩`, the fully charged unit.
    pub fn excited() -> Self {
        Self { q: 0.0, c: 0.0, alpha: 0.0 }
    }

    /// `|+⟩ = (|g⟩ + |e⟩)/√2`.
    pub fn plus() -> Self {
        Self { q: 0.5, c: 1.0, alpha: 0.0 }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_incoherent(&self) -> bool {
        self.coherence().norm() == 0.0
    }

    /// The off-diagonal element `⟨g|ρ_Q|e⟩ = c√(q(1−q)) e^{−iα}`.
    pub fn coherence(&self) -> C64 {
        C64::from_polar(self.c * (self.q * (1.0 - self.q)).sqrt(), -self.alpha)
    }

    /// Density matrix in the ordered basis `(|g⟩, |e⟩)`.
    pub fn density(&self) -> Matrix2<C64> {
        let z = self.coherence();
        Matrix2::new(C64::from(self.q), z, z.conj(), C64::from(1.0 - self.q))
    }
}

pub fn qubit_density(qs: &QubitState) -> Matrix2<C64> {
    qs.density()
}

/// Full battery density matrix in the level basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Wraps a matrix without checking it; use [`validate_state`] to inspect it.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), actual: m.ncols() });
        }
        Ok(Self(m))
    }

    pub fn ground(dim: usize) -> Self {
        Self::basis(dim, 0)
    }

    /// `|n⟩⟨n|`.
    pub fn basis(dim: usize, n: usize) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        m[(n, n)] = C64::from(1.0);
        Self(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(DMatrix::from_diagonal_element(dim, dim, C64::from(1.0 / dim as f64)))
    }

    pub fn from_populations(p: &PopulationVector) -> Self {
        let v = nalgebra::DVector::from_iterator(p.dim(), p.as_slice().iter().map(|&x| C64::from(x)));
        Self(DMatrix::from_diagonal(&v))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) amplitude vector.
    pub fn pure(amplitudes: &[C64]) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::domain("pure state needs a nonzero finite amplitude vector"));
        }
        let v = nalgebra::DVector::from_iterator(
            amplitudes.len(),
            amplitudes.iter().map(|a| a / norm2.sqrt()),
        );
        Ok(Self(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.0[(n, n)].re).collect()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Largest modulus of an off-diagonal entry.
    pub fn max_coherence(&self) -> f64 {
        let d = self.dim();
        let mut best = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                if i != j {
                    best = best.max(self.0[(i, j)].norm());
                }
            }
        }
        best
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()).scale(0.5);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Diagonal battery state `p(n)`, used whenever the dynamics never create
/// energy coherences.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationVector(Vec<f64>);

impl PopulationVector {
    /// Validates the populations, clamping tiny negative roundoff to zero.
    pub fn new(mut p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::domain("population vector needs at least 2 levels"));
        }
        for (n, x) in p.iter_mut().enumerate() {
            if !x.is_finite() || *x < POPULATION_CLAMP_TOL {
                return Err(Error::invariant(format!("population p({n}) = {x} is negative")));
            }
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > TRACE_TOL {
            return Err(Error::invariant(format!("populations sum to {sum}, not 1")));
        }
        Ok(Self(p))
    }

    pub(crate) fn from_vec_unchecked(p: Vec<f64>) -> Self {
        Self(p)
    }

    pub fn ground(dim: usize) -> Self {
        Self::basis(dim, 0)
    }

    pub fn basis(dim: usize, n: usize) -> Self {
        let mut p = vec![0.0; dim];
        p[n] = 1.0;
        Self(p)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Battery state as carried through a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub enum BatteryState {
    Populations(PopulationVector),
    Density(DensityMatrix),
}

impl BatteryState {
    pub fn ground(model: &BatteryModel) -> Self {
        BatteryState::Populations(PopulationVector::ground(model.dim()))
    }

    pub fn dim(&self) -> usize {
        match self {
            BatteryState::Populations(p) => p.dim(),
            BatteryState::Density(rho) => rho.dim(),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        match self {
            BatteryState::Populations(p) => p.as_slice().to_vec(),
            BatteryState::Density(rho) => rho.populations(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            BatteryState::Populations(p) => DensityMatrix::from_populations(p),
            BatteryState::Density(rho) => rho.clone(),
        }
    }
}

impl From<PopulationVector> for BatteryState {
    fn from(p: PopulationVector) -> Self {
        BatteryState::Populations(p)
    }
}

impl From<DensityMatrix> for BatteryState {
    fn from(rho: DensityMatrix) -> Self {
        BatteryState::Density(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDiagnostics {
    /// `|tr ρ − 1|`.
    pub trace_error: f64,
    /// `max |ρ_ij − ρ_ji*|`.
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub fn trace_ok(&self) -> bool {
        self.trace_error <= TRACE_TOL
    }

    pub fn hermitian_ok(&self) -> bool {
        self.hermiticity_error <= HERMITICITY_TOL
    }

    pub fn positivity_ok(&self) -> bool {
        self.min_eigenvalue >= MIN_EIGENVALUE_TOL
    }

    pub fn is_valid(&self) -> bool {
        self.trace_ok() && self.hermitian_ok() && self.positivity_ok()
    }

    /// Names the first violated invariant, if any.
    pub fn check(&self) -> Result<()> {
        if !self.trace_ok() {
            return Err(Error::invariant(format!("trace deviates from 1 by {:e}", self.trace_error)));
        }
        if !self.hermitian_ok() {
            return Err(Error::invariant(format!(
                "state is not Hermitian (max deviation {:e})",
                self.hermiticity_error
            )));
        }
        if !self.positivity_ok() {
            return Err(Error::invariant(format!(
                "state has negative eigenvalue {:e}",
                self.min_eigenvalue
            )));
        }
        Ok(())
    }
}

pub fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut err = 0.0f64;
    for j in 0..d {
        for i in 0..=j {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

/// Checks trace, hermiticity and positivity of `rho` without modifying it.
pub fn validate_state(rho: &DensityMatrix) -> StateDiagnostics {
    let ev = rho.eigenvalues();
    StateDiagnostics {
        trace_error: (rho.trace() - C64::from(1.0)).norm(),
        hermiticity_error: hermiticity_error(rho.matrix()),
        min_eigenvalue: ev.first().copied().unwrap_or(0.0),
    }
}
