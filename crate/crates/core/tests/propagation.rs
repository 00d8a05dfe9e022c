use std::f64::consts::{FRAC_PI_3, FRAC_PI_6, FRAC_PI_8};

use anyonpt_core::nonnormal::analytic_bound_state_pt;
use anyonpt_core::propagation::{evolve, evolve_to, translate, Frame, PropagatorConfig};
use anyonpt_core::spectra::{critical_velocity, moving_bound_state, BoundState};
use anyonpt_core::{AnyonicParams, Grid, PotentialSpec, WaveFunction};
use num_complex::Complex64;

fn packet(grid: &Grid, d: f64, w: f64, k: f64) -> WaveFunction {
    WaveFunction::from_fn(grid, |x| Complex64::new(-((x - d) / w).powi(2), k * x).exp())
        .unwrap()
        .normalized()
        .unwrap()
}

fn max_diff(a: &WaveFunction, b: &WaveFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn split_step_is_second_order() {
    let grid = Grid::new(-100.0, 100.0, 2048).unwrap();
    let spec = PotentialSpec::barrier(3.0, -0.5).unwrap();
    let params = AnyonicParams::new(FRAC_PI_8, -2.0).unwrap();
    let psi0 = packet(&grid, -6.0, 2.0, 0.5);
    let run = |dt: f64| evolve_to(&psi0, &spec, &params, Frame::Moving, dt, 5.0).unwrap();
    let reference = run(0.000625);
    let errors: Vec<f64> = [0.02, 0.01, 0.005].iter().map(|&dt| max_diff(&run(dt), &reference)).collect();
    for pair in errors.windows(2) {
        let ratio = pair[0] / pair[1];
        assert!(ratio >= 3.5, "halving dt reduced the error only {ratio:.2}x: {errors:?}");
    }
}

#[test]
fn hermitian_evolution_conserves_norm() {
    let grid = Grid::new(-60.0, 60.0, 1536).unwrap();
    let spec = PotentialSpec::poschl_teller(1.0, 0.0).unwrap();
    let params = AnyonicParams::new(0.0, 1.3).unwrap();
    let psi0 = packet(&grid, -5.0, 4.0, 1.0);
    let record = evolve(&psi0, &spec, &params, &PropagatorConfig::new(0.005, 10.0)).unwrap();
    let drift = record.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-8, "norm drift {drift:e}");
}

#[test]
fn complex_barrier_does_not_conserve_norm() {
    let grid = Grid::new(-40.0, 40.0, 1024).unwrap();
    let spec = PotentialSpec::barrier(3.0, -0.5).unwrap();
    let psi0 = packet(&grid, -8.0, 2.0, 1.5);
    let record = evolve(&psi0, &spec, &AnyonicParams::hermitian(), &PropagatorConfig::new(0.005, 5.0)).unwrap();
    let drift = record.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift > 1e-3, "norm drift only {drift:e}");
}

#[test]
fn lab_and_moving_frames_agree() {
    let grid = Grid::new(-40.0, 40.0, 1024).unwrap();
    let spec = PotentialSpec::poschl_teller(1.0, 0.2).unwrap();
    let params = AnyonicParams::new(FRAC_PI_6, 0.5).unwrap();
    let psi0 = packet(&grid, 0.0, 1.5, 0.0);
    let t = 2.0;
    let moving = evolve_to(&psi0, &spec, &params, Frame::Moving, 0.001, t).unwrap();
    let lab = evolve_to(&psi0, &spec, &params, Frame::Lab, 0.001, t).unwrap();
    // ψ(x, t) = Ψ(x + vt, t)
    let shifted = translate(&lab, params.v() * t);
    let scale = moving.max_abs();
    let diff = max_diff(&moving, &shifted) / scale;
    assert!(diff < 1e-4, "relative difference {diff:e}");
}

#[test]
fn translation_round_trip() {
    let grid = Grid::new(-20.0, 20.0, 256).unwrap();
    let psi = packet(&grid, 1.0, 2.0, 0.7);
    let back = translate(&translate(&psi, 3.3), -3.3);
    assert!(max_diff(&psi, &back) < 1e-12);
    let moved = translate(&psi, 4.0);
    assert!((moved.peak_position() + 3.0).abs() < 2.0 * grid.dx());
}

#[test]
fn slow_drift_keeps_the_well_occupied() {
    let grid = Grid::new(-40.0, 40.0, 1024).unwrap();
    let spec = PotentialSpec::poschl_teller(1.0, 0.2).unwrap();
    let vc = critical_velocity(-1.0, FRAC_PI_3).unwrap().unwrap();
    let params = AnyonicParams::new(FRAC_PI_3, 0.2 * vc).unwrap();
    let u = BoundState::new(analytic_bound_state_pt(0.2, &grid).unwrap(), -1.0).unwrap();
    let psi0 = moving_bound_state(&u, &params).unwrap().unwrap();
    let record = evolve(&psi0, &spec, &params, &PropagatorConfig::new(0.005, 10.0)).unwrap();
    for snap in &record.snapshots {
        assert!(snap.wave.peak_position().abs() < 0.5, "t={}: peak at {}", snap.t, snap.wave.peak_position());
    }
}
