use std::f64::consts::PI;

use qbcharge::bounds::{oscillator_energy_bound, r0};
use qbcharge::channels::{apply_collision, apply_damping};
use qbcharge::observables::mean_energy;
use qbcharge::protocols::{
    driving_limit_oscillator, driving_limit_spin, find_advantage_onset, fixed_schedule, fixed_schedule_until,
    full_swap_schedule, greedy_schedule, run_protocol, sweep_onset,
};
use qbcharge::{BatteryModel, BatteryState, DensityMatrix, GreedyObjective, QubitState, RunOptions};

fn run(model: &BatteryModel, s: &qbcharge::Schedule, every: usize, dists: bool) -> qbcharge::SimulationRecord {
    let rec = run_protocol(model, s, &BatteryState::ground(model), &RunOptions { record_every: every, keep_distributions: dists })
        .unwrap();
    rec.check_invariants().unwrap();
    rec
}

#[test]
fn full_swap_stays_pure_on_every_ladder() {
    for model in [BatteryModel::oscillator(40).unwrap(), BatteryModel::spin(7.5).unwrap(), BatteryModel::uniform_ladder(12).unwrap()] {
        let k = model.dim() - 1;
        let rec = run(&model, &full_swap_schedule(&model, k).unwrap(), 1, false);
        for row in &rec.rows {
            assert!((row.purity - 1.0).abs() < 1e-10);
            assert!((row.mean_energy - row.step as f64).abs() < 1e-9);
        }
        assert!((rec.last().unwrap().top_level_population - 1.0).abs() < 1e-10);
    }
}

#[test]
fn population_path_matches_density_path() {
    let model = BatteryModel::oscillator(30).unwrap();
    let qs = QubitState::incoherent(0.3).unwrap();
    let schedule = fixed_schedule(qs, 0.4, 25, 2e-3);
    let rec = run(&model, &schedule, 25, true);
    let mut rho = DensityMatrix::ground(30);
    for _ in 0..25 {
        rho = apply_damping(&model, &apply_collision(&rho, &model, &qs, 0.4).unwrap(), 2e-3).unwrap();
    }
    let fast = rec.distributions.unwrap().pop().unwrap();
    for (a, b) in fast.iter().zip(rho.populations()) {
        assert!((a - b).abs() < 1e-13);
    }
    assert!(rho.max_coherence() < 1e-15);
}

#[test]
fn final_wait_can_be_skipped() {
    let model = BatteryModel::oscillator(20).unwrap();
    let mut s = fixed_schedule(QubitState::plus(), 0.2, 10, 0.05);
    let with_wait = run(&model, &s, 10, false).final_energy();
    s.damp_after_last = false;
    let without = run(&model, &s, 10, false).final_energy();
    // the last loss step removes γ of the energy
    assert!((with_wait - 0.95 * without).abs() < 1e-12);
}

#[test]
fn coherent_driving_limit_oscillator() {
    let model = BatteryModel::oscillator(60).unwrap();
    let theta = 1e-3 * PI;
    let rec = run(&model, &fixed_schedule_until(QubitState::plus(), theta, 4.0, 0.0), 1000, true);
    let last = rec.last().unwrap().clone();
    let limit = driving_limit_oscillator(last.omega_tau, 60);
    assert!((last.mean_energy / limit.mean_energy - 1.0).abs() < 0.01);
    let p = rec.distributions.unwrap().pop().unwrap();
    let tv: f64 = p.iter().zip(&limit.distribution).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.01, "total variation {tv}");
    // displaced states are nearly pure, so almost all energy is extractable
    assert!(last.ergotropy > 0.99 * last.mean_energy);
}

#[test]
fn coherent_driving_limit_spin() {
    let j = 99.0 / 2.0;
    let model = BatteryModel::spin(j).unwrap();
    let theta = 1e-4 * PI;
    let rec = run(&model, &fixed_schedule(QubitState::plus(), theta, 5000, 0.0), 5000, false);
    let e = rec.final_energy();
    assert!((e / driving_limit_spin(PI / 2.0, j) - 1.0).abs() < 1e-3, "{e}");
    assert!((driving_limit_spin(PI / 2.0, j) - j).abs() < 1e-12);
}

#[test]
fn smaller_angles_charge_faster_in_the_fixed_family() {
    // cumulative power compared at Ωτ = multiples of 0.02π; before Ωτ ≈ 7 the
    // larger angles still lead through their incoherent θ² excitation
    const ORDERED_FROM: f64 = 8.0;
    let model = BatteryModel::oscillator(250).unwrap();
    let fracs = [0.002f64, 0.005, 0.01, 0.02];
    let curves: Vec<Vec<(f64, f64)>> = fracs
        .iter()
        .map(|&f| {
            let every = (0.02 / f).round() as usize;
            run(&model, &fixed_schedule_until(QubitState::plus(), f * PI, 20.0, 0.0), every, false)
                .rows
                .iter()
                .filter(|r| r.step % every == 0 && r.step > 0)
                .map(|r| (r.omega_tau, r.cumulative_power))
                .collect()
        })
        .collect();
    for pair in curves.windows(2) {
        for (small, large) in pair[0].iter().zip(&pair[1]) {
            assert!((small.0 - large.0).abs() < 1e-9);
            if small.0 >= ORDERED_FROM {
                assert!(small.1 >= large.1, "at Ωτ={}: {} < {}", small.0, small.1, large.1);
            }
        }
    }
}

#[test]
fn greedy_protocols_respect_the_bound_and_beat_full_swap() {
    let model = BatteryModel::oscillator(250).unwrap();
    let fs = run(&model, &full_swap_schedule(&model, 100).unwrap(), 1, false);
    for obj in [GreedyObjective::Cumulative, GreedyObjective::Transient] {
        let s = greedy_schedule(&model, 0.0, obj, 30.0, 0.0, 10_000).unwrap();
        assert!((s.steps[0].theta - r0().maximizer).abs() < 1e-5);
        let rec = run(&model, &s, 1, false);
        for row in &rec.rows {
            assert!(row.mean_energy <= oscillator_energy_bound(row.omega_tau) + 1e-9);
        }
        // compare with the full-swap energy at the same charging time
        let t = rec.total_time();
        let fs_energy = fs.rows.iter().take_while(|r| r.omega_tau <= t).last().unwrap().mean_energy;
        assert!(rec.final_energy() >= fs_energy, "{obj:?}: {} < {fs_energy}", rec.final_energy());
    }
}

#[test]
fn greedy_with_loss_stays_below_lossless_greedy() {
    let model = BatteryModel::oscillator(120).unwrap();
    let clean = greedy_schedule(&model, 0.0, GreedyObjective::Cumulative, 20.0, 0.0, 10_000).unwrap();
    let lossy = greedy_schedule(&model, 0.0, GreedyObjective::Cumulative, 20.0, 1e-3, 10_000).unwrap();
    let e0 = run(&model, &clean, 1000, false).final_energy();
    let e1 = run(&model, &lossy, 1000, false).final_energy();
    assert!(e1 < e0);
}

#[test]
fn onset_for_lossless_oscillator_matches_direct_run() {
    let model = BatteryModel::oscillator(250).unwrap();
    let theta = 0.01 * PI;
    let onset = find_advantage_onset(&model, theta, 0.0, 20.0).unwrap();
    let t = onset.tau_ad.expect("coherent charging beats the bound");
    let rec = run(&model, &fixed_schedule(QubitState::plus(), theta, onset.steps, 0.0), 1, false);
    let crossing = rec.rows.iter().find(|r| r.mean_energy > oscillator_energy_bound(r.omega_tau)).unwrap();
    assert_eq!(crossing.step, onset.steps);
    assert!((crossing.omega_tau - t).abs() < 1e-9);
}

#[test]
fn onset_sweep_is_sorted_and_matches_single_points() {
    let model = BatteryModel::oscillator(80).unwrap();
    let thetas = [0.05 * PI, 0.02 * PI];
    let gammas = [1e-2, 0.0];
    let rows = sweep_onset(&model, &thetas, &gammas, 8.0).unwrap();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!((w[0].gamma, w[0].theta) < (w[1].gamma, w[1].theta));
    }
    for r in &rows {
        assert_eq!(*r, find_advantage_onset(&model, r.theta, r.gamma, 8.0).unwrap());
    }
}

#[test]
fn spin_energy_stays_below_capacity() {
    let model = BatteryModel::spin(4.5).unwrap();
    let rec = run(&model, &fixed_schedule(QubitState::excited(), 0.3, 200, 0.0), 10, false);
    for row in &rec.rows {
        assert!(row.mean_energy <= model.capacity() + 1e-12);
    }
    let rho = DensityMatrix::basis(10, 9);
    assert_eq!(mean_energy(&rho, &model), 9.0);
}
