//! Collisions checked against brute-force evolution in the joint
//! battery ⊗ qubit space, with `U = exp(−iθ(A⊗σ₊ + A†⊗σ₋))` built by
//! diagonalizing the real symmetric interaction.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use qbcharge::channels::{apply_collision, apply_collision_convex, ladder_operator};
use qbcharge::observables::mean_energy;
use qbcharge::{BatteryModel, DensityMatrix, QubitState};

// joint index: qubit * d + n, qubit 0 = |g⟩, 1 = |e⟩
fn joint_unitary(model: &BatteryModel, theta: f64) -> DMatrix<C64> {
    let d = model.dim();
    let a = ladder_operator(model).map(|z| z.re);
    let mut v = DMatrix::<f64>::zeros(2 * d, 2 * d);
    // A ⊗ σ₊ takes |n, g⟩ to f(n)|n−1, e⟩
    for r in 0..d {
        for c in 0..d {
            v[(d + r, c)] = a[(r, c)];
            v[(c, d + r)] = a[(r, c)];
        }
    }
    let eig = SymmetricEigen::new(v);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -theta * e)));
    let vecs = eig.eigenvectors.map(C64::from);
    &vecs * phases * vecs.transpose()
}

fn collide_joint(rho: &DMatrix<C64>, qs: &QubitState, u: &DMatrix<C64>) -> DMatrix<C64> {
    let d = rho.nrows();
    let rq = qs.density();
    let mut joint = DMatrix::<C64>::zeros(2 * d, 2 * d);
    for s in 0..2 {
        for t in 0..2 {
            joint.view_mut((s * d, t * d), (d, d)).copy_from(&(rho * rq[(s, t)]));
        }
    }
    let out = u * joint * u.adjoint();
    out.view((0, 0), (d, d)) + out.view((d, d), (d, d))
}

fn random_state(d: usize, seed: u64) -> DensityMatrix {
    // deterministic pseudo-random Gram matrix
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let g = DMatrix::<C64>::from_fn(d, d, |_, _| C64::new(next(), next()));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(m / tr).unwrap()
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn oscillator_plus_qubit_matches_joint_evolution() {
    let model = BatteryModel::oscillator(10).unwrap();
    let theta = 0.01 * std::f64::consts::PI;
    let qs = QubitState::plus();
    let u = joint_unitary(&model, theta);
    let mut rho = DensityMatrix::ground(10);
    let mut joint = rho.matrix().clone();
    for _ in 0..5 {
        rho = apply_collision(&rho, &model, &qs, theta).unwrap();
        joint = collide_joint(&joint, &qs, &u);
        assert!(max_diff(rho.matrix(), &joint) < 1e-12);
    }
}

#[test]
fn all_models_and_qubits_match_joint_evolution() {
    let models = [
        BatteryModel::oscillator(7).unwrap(),
        BatteryModel::spin(3.0).unwrap(),
        BatteryModel::spin(2.5).unwrap(),
        BatteryModel::uniform_ladder(6).unwrap(),
    ];
    let qubits = [
        QubitState::new(0.3, 0.7, 1.1).unwrap(),
        QubitState::incoherent(0.8).unwrap(),
        QubitState::pure(0.5, 4.0).unwrap(),
        QubitState::excited(),
        QubitState::new(1.0, 0.0, 0.0).unwrap(),
    ];
    for (i, model) in models.iter().enumerate() {
        for (k, qs) in qubits.iter().enumerate() {
            for &theta in &[0.05, 0.9, 2.7, 7.3] {
                let rho = random_state(model.dim(), (i * 10 + k) as u64);
                let u = joint_unitary(model, theta);
                let ours = apply_collision(&rho, model, qs, theta).unwrap();
                let brute = collide_joint(rho.matrix(), qs, &u);
                assert!(max_diff(ours.matrix(), &brute) < 1e-12, "model {i} qubit {k} θ {theta}");
                let convex = apply_collision_convex(&rho, model, qs, theta).unwrap();
                assert!(max_diff(convex.matrix(), &brute) < 1e-12);
            }
        }
    }
}

#[test]
fn joint_unitary_conserves_total_excitations() {
    let model = BatteryModel::oscillator(9).unwrap();
    let qs = QubitState::new(0.35, 0.6, 0.4).unwrap();
    let rho = random_state(9, 7);
    for &theta in &[0.1, 1.3, 4.0] {
        let u = joint_unitary(&model, theta);
        let d = 9;
        let rq = qs.density();
        let mut joint = DMatrix::<C64>::zeros(2 * d, 2 * d);
        for s in 0..2 {
            for t in 0..2 {
                joint.view_mut((s * d, t * d), (d, d)).copy_from(&(rho.matrix() * rq[(s, t)]));
            }
        }
        let out = &u * joint * u.adjoint();
        let qubit_before = 1.0 - qs.q();
        let qubit_after = out.view((d, d), (d, d)).trace().re;
        let battery_after = DensityMatrix::from_matrix(out.view((0, 0), (d, d)) + out.view((d, d), (d, d))).unwrap();
        let gained = mean_energy(&battery_after, &model) - mean_energy(&rho, &model);
        assert!((gained + qubit_after - qubit_before).abs() < 1e-12);
    }
}
