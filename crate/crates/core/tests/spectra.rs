use std::f64::consts::FRAC_PI_3;

use anyonpt_core::spectra::{
    critical_velocity, poschl_teller_energies, shifted_point_energy, solve_spectrum, spectrum_eigenvalues,
    stationary_bound_states,
};
use anyonpt_core::{build_h_eff, AnyonicParams, Boundary, Grid, PotentialSpec};
use num_complex::Complex64;

fn well(nu: f64, delta: f64) -> PotentialSpec {
    PotentialSpec::poschl_teller(nu, delta).unwrap()
}

#[test]
fn fractional_depth_ladder_matches_finite_differences() {
    let nu = 2.5;
    let analytic = poschl_teller_energies(nu).unwrap();
    assert_eq!(analytic.energies, vec![-6.25, -2.25, -0.25]);

    let grid = Grid::new(-30.0, 30.0, 1500).unwrap();
    let h = build_h_eff(&well(nu, 0.0), &AnyonicParams::hermitian(), &grid, Boundary::Dirichlet).unwrap();
    let bound: Vec<f64> = spectrum_eigenvalues(&h)
        .unwrap()
        .into_iter()
        .filter(|e| e.re < 0.0)
        .map(|e| e.re)
        .collect();
    assert_eq!(bound.len(), 3, "{bound:?}");
    for (num, exact) in bound.iter().zip(&analytic.energies) {
        assert!((num - exact).abs() < 5e-3, "{num} vs {exact}");
    }
}

#[test]
fn complex_shift_keeps_the_ladder() {
    let grid = Grid::new(-20.0, 20.0, 1000).unwrap();
    let states = stationary_bound_states(&well(2.0, 0.3), &grid).unwrap();
    let energies: Vec<f64> = states.iter().map(|s| s.energy).collect();
    assert_eq!(energies.len(), 2, "{energies:?}");
    assert!((energies[0] + 4.0).abs() < 5e-3);
    assert!((energies[1] + 1.0).abs() < 5e-3);
    for s in &states {
        let sq = s.wave.square_integral();
        assert!(sq.re > 0.0 && sq.im.abs() < 1e-8 * sq.re);
    }
}

#[test]
fn drifting_point_energy_matches_closed_form() {
    let vc = critical_velocity(-1.0, FRAC_PI_3).unwrap().unwrap();
    let params = AnyonicParams::new(FRAC_PI_3, 0.5 * vc).unwrap();
    let grid = Grid::new(-40.0, 40.0, 2000).unwrap();
    let h = build_h_eff(&well(1.0, 0.2), &params, &grid, Boundary::Periodic).unwrap();
    let target = shifted_point_energy(-1.0, &params);
    let nearest = spectrum_eigenvalues(&h)
        .unwrap()
        .into_iter()
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .unwrap();
    assert!((nearest - target).norm() < 1e-3, "{nearest} vs {target}");
}

#[test]
fn point_spectrum_empties_past_critical_drift() {
    let vc = critical_velocity(-1.0, FRAC_PI_3).unwrap().unwrap();
    let grid = Grid::new(-40.0, 40.0, 800).unwrap();
    let count = |f: f64| {
        let params = AnyonicParams::new(FRAC_PI_3, f * vc).unwrap();
        let h = build_h_eff(&well(1.0, 0.2), &params, &grid, Boundary::Periodic).unwrap();
        solve_spectrum(&h).unwrap().point_count()
    };
    assert_eq!(count(0.8), 1);
    assert_eq!(count(1.05), 0);
}

#[test]
fn free_periodic_spectrum_is_the_lattice_dispersion() {
    // -∂² + iv∂ with central differences on a ring of n sites
    let n = 64;
    let grid = Grid::new(0.0, 16.0, n).unwrap();
    let (phi, v) = (0.4, 0.7);
    let params = AnyonicParams::new(phi, v).unwrap();
    let h = build_h_eff(&PotentialSpec::Zero, &params, &grid, Boundary::Periodic).unwrap();
    let dx = grid.dx();
    let rot = Complex64::from_polar(1.0, -phi);
    let mut expected: Vec<Complex64> = (0..n)
        .map(|m| {
            let q = 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            rot * (2.0 - 2.0 * q.cos()) / (dx * dx) - v * q.sin() / dx
        })
        .collect();
    let mut got = spectrum_eigenvalues(&h).unwrap();
    let key = |a: &Complex64, b: &Complex64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
    expected.sort_by(key);
    got.sort_by(key);
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
}
