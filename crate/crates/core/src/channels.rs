//! Collision and loss channels acting on the battery.
//!
//! One collision is the partial swap `U = exp(−iθ(A⊗|e⟩⟨g| + A†⊗|g⟩⟨e|))`.
//! Its qubit-energy blocks are closed-form functions of the ladder
//! amplitudes,
//!
//! ```text
//! ⟨g|U|g⟩ = L_g = cos(θ√(A†A))      ⟨e|U|g⟩ = −i L₋
//! ⟨e|U|e⟩ = L_e = cos(θ√(AA†))      ⟨g|U|e⟩ = −i L₊,   L₊ = L₋ᵀ
//! ```
//!
//! with `(L₋)[n−1][n] = sin(f(n)θ)`, so no matrix exponential is ever formed.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::band::BandOperator;
use crate::error::{Error, Result};
use crate::model::{BatteryKind, BatteryModel, DensityMatrix, PopulationVector, QubitState};

/// Residual Kraus weight below which the damping series is truncated.
pub const DAMPING_RESIDUAL: f64 = 1e-16;

const I: C64 = C64::new(0.0, 1.0);

/// Real closed-form blocks of the collision unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderLindbladOps {
    /// Diagonal of `L_g`: `cos(f(n)θ)`, with `f(0) = 0`.
    pub l_g: Vec<f64>,
    /// Diagonal of `L_e`: `cos(f(n+1)θ)`, with `f(d) = 0`.
    pub l_e: Vec<f64>,
    /// `(L₋)[n][n+1] = sin(f(n+1)θ)` for `n = 0..d−1`.
    pub l_minus: Vec<f64>,
}

impl LadderLindbladOps {
    pub fn dim(&self) -> usize {
        self.l_g.len()
    }

    pub fn l_g_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.l_g))
    }

    pub fn l_e_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.l_e))
    }

    /// Lowering jump operator `L₋`.
    pub fn l_minus_matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for n in 0..d - 1 {
            m[(n, n + 1)] = self.l_minus[n];
        }
        m
    }

    /// Raising jump operator `L₊ = L₋ᵀ`.
    pub fn l_plus_matrix(&self) -> DMatrix<f64> {
        self.l_minus_matrix().transpose()
    }

    fn diag_band(v: &[f64], scale: C64) -> BandOperator {
        let mut op = BandOperator::zeros(v.len());
        for (z, &x) in op.diag.iter_mut().zip(v) {
            *z = scale * x;
        }
        op
    }

    /// `scale · L_g` as a band operator.
    fn g_band(&self, scale: C64) -> BandOperator {
        Self::diag_band(&self.l_g, scale)
    }

    fn e_band(&self, scale: C64) -> BandOperator {
        Self::diag_band(&self.l_e, scale)
    }
}

pub fn ladder_lindblad_ops(model: &BatteryModel, theta: f64) -> Result<LadderLindbladOps> {
    if !theta.is_finite() {
        return Err(Error::domain(format!("swap angle must be finite, got {theta}")));
    }
    let f = model.padded_amplitudes();
    let d = model.dim();
    Ok(LadderLindbladOps {
        l_g: (0..d).map(|n| (f[n] * theta).cos()).collect(),
        l_e: (0..d).map(|n| (f[n + 1] * theta).cos()).collect(),
        l_minus: (1..d).map(|n| (f[n] * theta).sin()).collect(),
    })
}

/// Kraus decomposition `Φρ = Σ M ρ M†` of one collision.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub operators: Vec<BandOperator>,
}

impl KrausSet {
    pub fn dim(&self) -> usize {
        self.operators.first().map_or(0, BandOperator::dim)
    }

    pub fn dense(&self) -> Vec<DMatrix<C64>> {
        self.operators.iter().map(BandOperator::to_dense).collect()
    }

    /// `‖Σ M†M − 1‖_max`.
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim();
        let mut sum = DMatrix::<C64>::zeros(d, d);
        for m in self.dense() {
            sum += m.adjoint() * m;
        }
        sum -= DMatrix::identity(d, d);
        sum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Eigen-decomposition `ρ_Q = Σ w |ψ⟩⟨ψ|` as `(w, ⟨g|ψ⟩, ⟨e|ψ⟩)`. Falls back
/// to the energy basis when `ρ_Q` is diagonal (including the degenerate
/// `q = 1/2, c = 0` case).
pub fn qubit_eigensystem(qs: &QubitState) -> [(f64, C64, C64); 2] {
    let q = qs.q();
    let z = qs.coherence();
    if z.norm() == 0.0 {
        return [(q, C64::from(1.0), C64::default()), (1.0 - q, C64::default(), C64::from(1.0))];
    }
    let disc = ((q - 0.5).powi(2) + z.norm_sqr()).sqrt();
    let vector = |lambda: f64| {
        // Two equivalent null vectors of ρ_Q − λ; keep the better conditioned.
        let v1 = (z, C64::from(lambda - q));
        let v2 = (C64::from(lambda - (1.0 - q)), z.conj());
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        let (v, n) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        let n = n.sqrt();
        (v.0 / n, v.1 / n)
    };
    let hi = 0.5 + disc;
    let lo = (0.5 - disc).max(0.0);
    let (a0, b0) = vector(hi);
    let (a1, b1) = vector(0.5 - disc);
    [(hi, a0, b0), (lo, a1, b1)]
}

/// Kraus operators `M_{m,n} = √q_n ⟨χ_m|U|ψ_n⟩` with `χ ∈ {g, e}`.
pub fn collision_kraus(model: &BatteryModel, qs: &QubitState, theta: f64) -> Result<KrausSet> {
    let ops = ladder_lindblad_ops(model, theta)?;
    let d = model.dim();
    let mut operators = Vec::with_capacity(4);
    for (w, a, b) in qubit_eigensystem(qs) {
        if w < f64::EPSILON {
            continue;
        }
        let s = w.sqrt();
        // ⟨g|U|ψ⟩ = a L_g − i b L₊
        let mut mg = ops.g_band(s * a);
        // ⟨e|U|ψ⟩ = −i a L₋ + b L_e
        let mut me = ops.e_band(s * b);
        for n in 0..d - 1 {
            mg.lower[n] = -I * s * b * ops.l_minus[n];
            me.upper[n] = -I * s * a * ops.l_minus[n];
        }
        for m in [mg, me] {
            if m.diag.iter().chain(&m.upper).chain(&m.lower).any(|z| z.norm() > 0.0) {
                operators.push(m);
            }
        }
    }
    Ok(KrausSet { operators })
}

/// A collision channel with its Kraus set prepared for repeated application.
#[derive(Debug, Clone)]
pub struct CollisionChannel {
    kraus: KrausSet,
    scratch: DMatrix<C64>,
}

impl CollisionChannel {
    pub fn new(model: &BatteryModel, qs: &QubitState, theta: f64) -> Result<Self> {
        let kraus = collision_kraus(model, qs, theta)?;
        let d = model.dim();
        Ok(Self { kraus, scratch: DMatrix::zeros(d, d) })
    }

    pub fn kraus(&self) -> &KrausSet {
        &self.kraus
    }

    pub fn apply_matrix(&mut self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let d = self.kraus.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: rho.nrows() });
        }
        let mut out = DMatrix::zeros(d, d);
        for m in &self.kraus.operators {
            m.sandwich_add(rho, &mut self.scratch, &mut out);
        }
        Ok(out)
    }

    pub fn apply(&mut self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        DensityMatrix::from_matrix(self.apply_matrix(rho.matrix())?)
    }
}

/// One collision `ρ ↦ Tr_Q[U (ρ ⊗ ρ_Q) U†]`.
pub fn apply_collision(
    rho: &DensityMatrix,
    model: &BatteryModel,
    qs: &QubitState,
    theta: f64,
) -> Result<DensityMatrix> {
    CollisionChannel::new(model, qs, theta)?.apply(rho)
}

/// The same channel assembled as `c Φ_coh + (1−c) Φ_inc`, where `Φ_coh` uses
/// the pure qubit with the same `q, α` and `Φ_inc` the dephased one.
pub fn apply_collision_convex(
    rho: &DensityMatrix,
    model: &BatteryModel,
    qs: &QubitState,
    theta: f64,
) -> Result<DensityMatrix> {
    let coh = apply_collision(rho, model, &QubitState::pure(qs.q(), qs.alpha())?, theta)?;
    let inc = apply_collision(rho, model, &QubitState::incoherent(qs.q())?, theta)?;
    let c = qs.c();
    DensityMatrix::from_matrix(coh.into_matrix().scale(c) + inc.into_matrix().scale(1.0 - c))
}

/// Rate-equation step for energy-diagonal states and incoherent qubits:
/// `p'(n) = P₀(n)p(n) + P₋(n+1)p(n+1) + P₊(n−1)p(n−1)`.
pub fn incoherent_population_step(
    p: &PopulationVector,
    q: f64,
    theta: f64,
    model: &BatteryModel,
) -> Result<PopulationVector> {
    let d = model.dim();
    if p.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: p.dim() });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::domain(format!("ground population q must lie in [0, 1], got {q}")));
    }
    let f = model.padded_amplitudes();
    Ok(PopulationVector::from_vec_unchecked(population_step_raw(p.as_slice(), q, theta, &f)))
}

/// Unchecked kernel; `f` holds the padded amplitudes `f(0..=d)`.
pub(crate) fn population_step_raw(p: &[f64], q: f64, theta: f64, f: &[f64]) -> Vec<f64> {
    let d = p.len();
    // up[n] = P₊(n), down[n] = P₋(n)
    let up: Vec<f64> = (0..d).map(|n| (1.0 - q) * (f[n + 1] * theta).sin().powi(2)).collect();
    let down: Vec<f64> = (0..d).map(|n| q * (f[n] * theta).sin().powi(2)).collect();
    let mut out = vec![0.0; d];
    for n in 0..d {
        let mut x = (1.0 - up[n] - down[n]) * p[n];
        if n + 1 < d {
            x += down[n + 1] * p[n + 1];
        }
        if n > 0 {
            x += up[n - 1] * p[n - 1];
        }
        out[n] = x.max(0.0);
    }
    out
}

fn check_damping(model: &BatteryModel, gamma: f64) -> Result<()> {
    if model.kind() == BatteryKind::Spin {
        return Err(Error::UnsupportedModel { operation: "photon-loss damping", kind: model.kind() });
    }
    if !(gamma.is_finite() && (0.0..1.0).contains(&gamma)) {
        return Err(Error::domain(format!("damping gamma must lie in [0, 1), got {gamma}")));
    }
    Ok(())
}

/// Number of Kraus terms `0..=K` needed so that the binomial loss tail of the
/// highest populated level `top` falls below [`DAMPING_RESIDUAL`].
fn damping_terms(top: usize, gamma: f64) -> usize {
    if gamma == 0.0 || top == 0 {
        return 0;
    }
    let (lg, l1g) = (gamma.ln(), (-gamma).ln_1p());
    let mut ln_binom = 0.0;
    let terms: Vec<f64> = (0..=top)
        .map(|k| {
            if k > 0 {
                ln_binom += ((top - k + 1) as f64).ln() - (k as f64).ln();
            }
            (ln_binom + k as f64 * lg + (top - k) as f64 * l1g).exp()
        })
        .collect();
    let mut tail = 0.0;
    for k in (0..=top).rev() {
        if tail + terms[k] >= DAMPING_RESIDUAL {
            return k;
        }
        tail += terms[k];
    }
    0
}

/// `a[k][m] = √(C(m+k, k) γ^k (1−γ)^m)`, so that a loss of `k` quanta maps
/// `ρ[m+k][m'+k]` to `ρ'[m][m']` with weight `a[k][m]·a[k][m']`.
fn damping_table(dim: usize, gamma: f64, terms: usize) -> Vec<Vec<f64>> {
    let (lg, l1g) = (gamma.ln(), (-gamma).ln_1p());
    (0..=terms)
        .map(|k| {
            let mut ln_binom = 0.0; // ln C(m+k, k), starting at m = 0
            (0..dim - k)
                .map(|m| {
                    if m > 0 {
                        ln_binom += ((m + k) as f64).ln() - (m as f64).ln();
                    }
                    let ln = ln_binom + if k > 0 { k as f64 * lg } else { 0.0 } + m as f64 * l1g;
                    (0.5 * ln).exp()
                })
                .collect()
        })
        .collect()
}

/// Bosonic attenuation `ρ ↦ Σ_n (e^{κt₀}−1)^n/n! K_n ρ K_n†`,
/// `K_n = aⁿ e^{−κt₀ a†a/2}`, with `γ = 1 − e^{−κt₀}`.
pub fn apply_damping(model: &BatteryModel, rho: &DensityMatrix, gamma: f64) -> Result<DensityMatrix> {
    check_damping(model, gamma)?;
    let d = model.dim();
    if rho.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: rho.dim() });
    }
    if gamma == 0.0 {
        return Ok(rho.clone());
    }
    let src = rho.matrix();
    let top = (0..d).rev().find(|&n| src[(n, n)].re > 0.0).unwrap_or(0);
    let terms = damping_terms(top, gamma);
    let table = damping_table(d, gamma, terms);
    let s = src.as_slice();
    let mut out = DMatrix::<C64>::zeros(d, d);
    let o = out.as_mut_slice();
    for (k, a) in table.iter().enumerate() {
        let n = d - k;
        for col in 0..n {
            let ac = a[col];
            let from = &s[(col + k) * d + k..(col + k) * d + k + n];
            let to = &mut o[col * d..col * d + n];
            for row in 0..n {
                to[row] += from[row] * (a[row] * ac);
            }
        }
    }
    DensityMatrix::from_matrix(out)
}

/// Binomial attenuation of populations:
/// `p'(m) = Σ_{n≥m} C(n,m)(1−γ)^m γ^{n−m} p(n)`.
pub fn damp_populations(model: &BatteryModel, p: &PopulationVector, gamma: f64) -> Result<PopulationVector> {
    check_damping(model, gamma)?;
    let d = model.dim();
    if p.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: p.dim() });
    }
    if gamma == 0.0 {
        return Ok(p.clone());
    }
    let src = p.as_slice();
    let top = (0..d).rev().find(|&n| src[n] > 0.0).unwrap_or(0);
    let table = damping_table(d, gamma, damping_terms(top, gamma));
    let mut out = vec![0.0; d];
    for (k, a) in table.iter().enumerate() {
        for m in 0..d - k {
            out[m] += a[m] * a[m] * src[m + k];
        }
    }
    Ok(PopulationVector::from_vec_unchecked(out))
}

/// Explicit weighted Kraus operators `√w_n K_n` of the attenuation channel on
/// a `dim`-level truncation, cut where the residual weight of the top level
/// falls below [`DAMPING_RESIDUAL`].
pub fn damping_kraus_operators(model: &BatteryModel, gamma: f64) -> Result<Vec<DMatrix<C64>>> {
    check_damping(model, gamma)?;
    let d = model.dim();
    let terms = if gamma == 0.0 { 0 } else { damping_terms(d - 1, gamma) };
    let kt0 = -(-gamma).ln_1p();
    let mut ops = Vec::with_capacity(terms + 1);
    // a^n as a dense matrix, built up by repeated multiplication
    let mut a = DMatrix::<C64>::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::from((n as f64).sqrt());
    }
    let decay = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        (0..d).map(|n| C64::from((-0.5 * kt0 * n as f64).exp())),
    ));
    let mut a_pow = DMatrix::<C64>::identity(d, d);
    let mut ln_fact = 0.0;
    for n in 0..=terms {
        if n > 0 {
            a_pow = &a * a_pow;
            ln_fact += (n as f64).ln();
        }
        // ln[(e^{κt₀} − 1)^n / n!]
        let ln_w = if n == 0 { 0.0 } else { n as f64 * kt0.exp_m1().ln() - ln_fact };
        ops.push((&a_pow * &decay).scale((0.5 * ln_w).exp()));
    }
    Ok(ops)
}

/// `D[M]ρ = MρM† − ½{M†M, ρ}`.
pub fn dissipator(m: &DMatrix<C64>, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let mdm = m.adjoint() * m;
    m * rho * m.adjoint() - (&mdm * rho + rho * &mdm).scale(0.5)
}

fn commutator(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a * b - b * a
}

/// A linear map on battery operators.
pub trait Superoperator {
    fn dim(&self) -> usize;

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64>;

    /// Matrix of the map acting on column-stacked operators.
    fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        let mut out = DMatrix::zeros(d * d, d * d);
        for col in 0..d {
            for row in 0..d {
                let mut e = DMatrix::zeros(d, d);
                e[(row, col)] = C64::from(1.0);
                let image = self.apply(&e);
                for (k, z) in image.iter().enumerate() {
                    out[(k, col * d + row)] = *z;
                }
            }
        }
        out
    }
}

/// `L = Φ − id` for one collision.
#[derive(Debug, Clone)]
pub struct ExactGenerator {
    kraus: Vec<DMatrix<C64>>,
}

impl Superoperator for ExactGenerator {
    fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = -rho.clone();
        for m in &self.kraus {
            out += m * rho * m.adjoint();
        }
        out
    }
}

pub fn generator_exact(model: &BatteryModel, qs: &QubitState, theta: f64) -> Result<ExactGenerator> {
    Ok(ExactGenerator { kraus: collision_kraus(model, qs, theta)?.dense() })
}

/// The collision generator written as Lindblad dissipators of the closed-form
/// blocks:
///
/// ```text
/// L_inc = q(D[L_g] + D[L₋]) + (1−q)(D[L_e] + D[L₊])
/// L_coh = D[√q L₋ + i√(1−q)e^{iα} L_e] + D[√(1−q) L₊ + i√q e^{−iα} L_g]
/// L     = c L_coh + (1−c) L_inc
/// ```
#[derive(Debug, Clone)]
pub struct DissipatorGenerator {
    terms: Vec<(f64, DMatrix<C64>)>,
}

impl Superoperator for DissipatorGenerator {
    fn dim(&self) -> usize {
        self.terms[0].1.nrows()
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        self.terms
            .iter()
            .fold(DMatrix::zeros(d, d), |acc, (w, m)| acc + dissipator(m, rho).scale(*w))
    }
}

pub fn generator_dissipator_form(
    model: &BatteryModel,
    qs: &QubitState,
    theta: f64,
) -> Result<DissipatorGenerator> {
    let ops = ladder_lindblad_ops(model, theta)?;
    let cplx = |m: DMatrix<f64>| m.map(C64::from);
    let (lg, le, lm, lp) = (
        cplx(ops.l_g_matrix()),
        cplx(ops.l_e_matrix()),
        cplx(ops.l_minus_matrix()),
        cplx(ops.l_plus_matrix()),
    );
    let (q, c) = (qs.q(), qs.c());
    let phase = C64::from_polar(1.0, qs.alpha());
    let coh_down = lm.scale(q.sqrt()) + &le * (I * (1.0 - q).sqrt() * phase);
    let coh_up = lp.scale((1.0 - q).sqrt()) + &lg * (I * q.sqrt() * phase.conj());
    let terms = vec![
        (c, coh_down),
        (c, coh_up),
        ((1.0 - c) * q, lg),
        ((1.0 - c) * q, lm),
        ((1.0 - c) * (1.0 - q), le),
        ((1.0 - c) * (1.0 - q), lp),
    ];
    Ok(DissipatorGenerator { terms })
}

/// Truncated ladder operator `A` with `A[n−1][n] = f(n)`.
pub fn ladder_operator(model: &BatteryModel) -> DMatrix<C64> {
    let f = model.padded_amplitudes();
    let d = model.dim();
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::from(f[n]);
    }
    a
}

/// Second-order expansion of the collision generator:
/// `qθ²D[A] + (1−q)θ²D[A†] − i c√(q(1−q))θ [e^{−iα}A + e^{iα}A†, ·]`.
#[derive(Debug, Clone)]
pub struct SmallThetaGenerator {
    a: DMatrix<C64>,
    down: f64,
    up: f64,
    /// Effective driving Hamiltonian `V`.
    drive: DMatrix<C64>,
}

impl SmallThetaGenerator {
    pub fn driving_hamiltonian(&self) -> &DMatrix<C64> {
        &self.drive
    }
}

impl Superoperator for SmallThetaGenerator {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let ad = self.a.adjoint();
        dissipator(&self.a, rho).scale(self.down) + dissipator(&ad, rho).scale(self.up)
            - commutator(&self.drive, rho) * I
    }
}

pub fn generator_small_theta(model: &BatteryModel, qs: &QubitState, theta: f64) -> Result<SmallThetaGenerator> {
    if !theta.is_finite() {
        return Err(Error::domain(format!("swap angle must be finite, got {theta}")));
    }
    let a = ladder_operator(model);
    let (q, c) = (qs.q(), qs.c());
    let amp = c * (q * (1.0 - q)).sqrt() * theta;
    let phase = C64::from_polar(1.0, -qs.alpha());
    let drive = (&a * phase + a.adjoint() * phase.conj()).scale(amp);
    Ok(SmallThetaGenerator { a, down: q * theta * theta, up: (1.0 - q) * theta * theta, drive })
}

/// Closed-form generator of the uniform ladder, where `√(A†A)` and `√(AA†)`
/// are the projectors `1 − |0⟩⟨0|` and `1 − |N⟩⟨N|`:
///
/// ```text
/// L_inc = sin²θ (q D[A] + (1−q) D[A†]) + (1−cos θ)² (q D[|0⟩⟨0|] + (1−q) D[|N⟩⟨N|])
/// L_coh = −i√(q(1−q)) sinθ cosθ [e^{−iα}A + e^{iα}A†, ·]
///         + D[√q sinθ A + i√(1−q) e^{iα}(1−cosθ)|N⟩⟨N|]
///         + D[√(1−q) sinθ A† + i√q e^{−iα}(1−cosθ)|0⟩⟨0|]
/// ```
///
/// The lowering jump comes with the `|N⟩⟨N|` projector because it stems from
/// the `|e⟩` Kraus branch, `L_e = cosθ + (1−cosθ)|N⟩⟨N|`; at `q = 0` this
/// reduces to the incoherent form.
#[derive(Debug, Clone)]
pub struct UniformLadderGenerator {
    dissipators: Vec<(f64, DMatrix<C64>)>,
    drive: DMatrix<C64>,
}

impl Superoperator for UniformLadderGenerator {
    fn dim(&self) -> usize {
        self.drive.nrows()
    }

    fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let d = self.dim();
        let diss = self
            .dissipators
            .iter()
            .fold(DMatrix::zeros(d, d), |acc, (w, m)| acc + dissipator(m, rho).scale(*w));
        diss - commutator(&self.drive, rho) * I
    }
}

pub fn uniform_ladder_generator(model: &BatteryModel, qs: &QubitState, theta: f64) -> Result<UniformLadderGenerator> {
    if model.kind() != BatteryKind::UniformLadder {
        return Err(Error::UnsupportedModel { operation: "uniform-ladder closed form", kind: model.kind() });
    }
    let d = model.dim();
    let a = ladder_operator(model);
    let ad = a.adjoint();
    let mut p0 = DMatrix::<C64>::zeros(d, d);
    p0[(0, 0)] = C64::from(1.0);
    let mut ptop = DMatrix::<C64>::zeros(d, d);
    ptop[(d - 1, d - 1)] = C64::from(1.0);
    let (q, c) = (qs.q(), qs.c());
    let (s, co) = (theta.sin(), theta.cos());
    let phase = C64::from_polar(1.0, qs.alpha());
    let inc = 1.0 - c;
    let dissipators = vec![
        (inc * q * s * s, a.clone()),
        (inc * (1.0 - q) * s * s, ad.clone()),
        (inc * q * (1.0 - co).powi(2), p0.clone()),
        (inc * (1.0 - q) * (1.0 - co).powi(2), ptop.clone()),
        (c, a.scale(q.sqrt() * s) + &ptop * (I * (1.0 - q).sqrt() * phase * (1.0 - co))),
        (c, ad.scale((1.0 - q).sqrt() * s) + &p0 * (I * q.sqrt() * phase.conj() * (1.0 - co))),
    ];
    let amp = c * (q * (1.0 - q)).sqrt() * s * co;
    let drive = (&a * phase.conj() + &ad * phase).scale(amp);
    Ok(UniformLadderGenerator { dissipators, drive })
}
