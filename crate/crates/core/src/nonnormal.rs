//! Transient and asymptotic amplification of the drifting bound state.

use ndarray::Array2;
use num_complex::Complex64;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{trapezoid_complex, Grid, WaveFunction};
use crate::hamiltonian::HamiltonianMatrix;
use crate::linalg;
use crate::output::fmt_num;
use crate::params::AnyonicParams;
use crate::potential::PotentialSpec;
use crate::spectra::{delocalization_margin, BoundState};

/// Largest matrix handed to the dense exponential.
pub const MAX_EXPM_DIM: usize = 2048;
/// `|∫u² dx|` below this is treated as an exceptional point.
pub const SELF_ORTHOGONALITY_FLOOR: f64 = 1e-10;
/// Quadrature range for closed-form states ends where the integrand falls below
/// this fraction of its peak.
pub const TRUNCATION: f64 = 1e-14;
/// Relative disagreement between the two G∞ forms that is tolerated.
const FORM_TOLERANCE: f64 = 1e-8;

/// `1/cosh(x - iδ)` normalized on the grid: the single bound state of the
/// `ν = 1` complex-shifted well.
pub fn analytic_bound_state_pt(delta: f64, grid: &Grid) -> Result<WaveFunction> {
    poschl_teller_ground_state(1.0, delta, grid)
}

/// `cosh(x - iδ)^{-ν}`, the ground state of `-ν(ν+1)/cosh²(x - iδ)` with
/// energy `-ν²`, normalized on the grid.
pub fn poschl_teller_ground_state(nu: f64, delta: f64, grid: &Grid) -> Result<WaveFunction> {
    check_pt_shape(nu, delta)?;
    WaveFunction::from_fn(grid, |x| (-nu * ln_cosh(Complex64::new(x, -delta))).exp())?
        .normalized()
}

fn check_pt_shape(nu: f64, delta: f64) -> Result<()> {
    if !(delta.abs() < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "|δ| = {} reaches π/2: the PT phase is broken",
            delta.abs()
        )));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    Ok(())
}

fn pt_shape(spec: &PotentialSpec) -> Result<(f64, f64)> {
    match spec {
        PotentialSpec::PoschlTeller { nu, delta } => Ok((*nu, *delta)),
        other => Err(Error::Contract(format!(
            "closed-form ground state needs a Pöschl–Teller well, got {other:?}"
        ))),
    }
}

/// `ln cosh z` without overflow for large `|Re z|`.
fn ln_cosh(z: Complex64) -> Complex64 {
    if z.re.abs() < 20.0 {
        return z.cosh().ln();
    }
    // cosh z = e^{±z}(1 + e^{∓2z})/2
    let w = if z.re > 0.0 { z } else { -z };
    w - std::f64::consts::LN_2 + (1.0 + (-2.0 * w).exp()).ln()
}

/// `|∫u² dx|` for the normalized state.
pub fn self_orthogonality(u: &WaveFunction) -> Result<f64> {
    Ok(u.normalized()?.square_integral().norm())
}

fn require_margin(energy: f64, params: &AnyonicParams) -> Result<f64> {
    let margin = delocalization_margin(energy, params);
    if margin <= 0.0 {
        return Err(Error::Delocalized(format!(
            "drift {} is at or above the critical velocity for E = {energy} (margin {margin})",
            params.v()
        )));
    }
    Ok(margin)
}

/// `ũ₁† = u₁* exp[i(vx/2)e^{-iφ}]`, normalized: the bound state of `H_eff†`
/// with eigenvalue `Ẽ₁*`.
pub fn adjoint_bound_state(u: &BoundState, params: &AnyonicParams) -> Result<WaveFunction> {
    require_margin(u.energy, params)?;
    let factor = Complex64::i() * 0.5 * params.v() * params.rotation();
    u.wave.map(|x, z| z.conj() * (factor * x).exp()).normalized()
}

/// Both algebraic forms of the asymptotic amplification factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GInfinityForms {
    /// `∫|u|²e^{-sx} · ∫|u|²e^{sx} / |∫u²|²`, `s = v sin φ`.
    pub weighted: f64,
    /// `⟨ũ|ũ⟩⟨ũ†|ũ†⟩ / |⟨ũ†|ũ⟩|²`.
    pub biorthogonal: f64,
}

pub fn g_infinity_forms(u: &BoundState, params: &AnyonicParams) -> Result<GInfinityForms> {
    require_margin(u.energy, params)?;
    let log_u: Vec<Complex64> = u.wave.values().iter().map(|z| z.ln()).collect();
    forms_from_log_amplitude(u.wave.grid(), &log_u, params)
}

/// `ln ∫ exp(f) dx` for complex `f`, returned as `(ln|I|, arg I)` and computed
/// relative to `max Re f` so that neither tail over- nor underflows.
fn log_integral(dx: f64, f: &[Complex64]) -> (f64, f64) {
    let peak = f.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<Complex64> = f.iter().map(|z| (z - peak).exp()).collect();
    let i = trapezoid_complex(dx, &shifted);
    (peak + i.norm().ln(), i.arg())
}

/// Both forms from `ln u` on the grid. Each integral is evaluated in log
/// space, which keeps near-critical drifts (grids of thousands of decay
/// lengths) finite.
fn forms_from_log_amplitude(grid: &Grid, log_u: &[Complex64], params: &AnyonicParams) -> Result<GInfinityForms> {
    let dx = grid.dx();
    let xs = grid.points();
    let s = params.v() * params.phi().sin();
    let collect = |f: &dyn Fn(Complex64, f64) -> Complex64| -> Vec<Complex64> {
        log_u.iter().zip(&xs).map(|(&l, &x)| f(l, x)).collect()
    };
    let ln_norm = log_integral(dx, &collect(&|l, _| Complex64::from(2.0 * l.re))).0;
    let ln_sq = log_integral(dx, &collect(&|l, _| 2.0 * l)).0;
    if ln_sq < SELF_ORTHOGONALITY_FLOOR.ln() + ln_norm {
        return Err(Error::ExceptionalPoint(format!(
            "|∫u² dx| / ∫|u|² dx = {:e}: the mode is self-orthogonal",
            (ln_sq - ln_norm).exp()
        )));
    }
    let ln_minus = log_integral(dx, &collect(&|l, x| Complex64::from(2.0 * l.re - s * x))).0;
    let ln_plus = log_integral(dx, &collect(&|l, x| Complex64::from(2.0 * l.re + s * x))).0;
    let weighted = (ln_minus + ln_plus - 2.0 * ln_sq).exp();

    // right state u·e^{iαx}, adjoint state u*·e^{i(v/2)e^{-iφ}x}
    let i = Complex64::i();
    let alpha = params.gauge().alpha;
    let adj = 0.5 * params.v() * params.rotation();
    let right = collect(&|l, x| l + i * alpha * x);
    let left = collect(&|l, x| l.conj() + i * adj * x);
    let ln_rr = log_integral(dx, &right.iter().map(|z| Complex64::from(2.0 * z.re)).collect::<Vec<_>>()).0;
    let ln_ll = log_integral(dx, &left.iter().map(|z| Complex64::from(2.0 * z.re)).collect::<Vec<_>>()).0;
    let overlap: Vec<Complex64> = left.iter().zip(&right).map(|(a, b)| a.conj() + b).collect();
    let ln_lr = log_integral(dx, &overlap).0;
    let biorthogonal = (ln_rr + ln_ll - 2.0 * ln_lr).exp();
    Ok(GInfinityForms { weighted, biorthogonal })
}

fn agreed(forms: GInfinityForms) -> Result<f64> {
    let rel = (forms.weighted - forms.biorthogonal).abs() / forms.weighted.abs();
    if !(rel <= FORM_TOLERANCE) {
        return Err(Error::Conditioning(format!(
            "G∞ forms disagree: {} vs {} (relative {rel:e})",
            forms.weighted, forms.biorthogonal
        )));
    }
    Ok(forms.weighted)
}

/// Asymptotic amplification factor from the sampled state; both forms are
/// evaluated and must agree.
pub fn g_infinity(u: &BoundState, params: &AnyonicParams) -> Result<f64> {
    agreed(g_infinity_forms(u, params)?)
}

/// Symmetric grid on which the closed-form ground state's weighted
/// integrands fall below `TRUNCATION` of their peak.
pub fn adaptive_grid(nu: f64, params: &AnyonicParams, dx: f64) -> Result<Grid> {
    let s = (params.v() * params.phi().sin()).abs();
    let rate = 2.0 * nu - s;
    if rate <= 0.0 {
        return Err(Error::Delocalized(format!("weighted integrand does not decay (rate {rate})")));
    }
    let half = (-TRUNCATION.ln()) / rate + 10.0;
    Grid::symmetric_with_spacing(half, dx)
}

/// Closed-form ground state of a complex-shifted Pöschl–Teller well on the
/// adaptive grid for `params`.
pub fn poschl_teller_bound_state(spec: &PotentialSpec, params: &AnyonicParams) -> Result<BoundState> {
    let (nu, delta) = pt_shape(spec)?;
    let energy = -nu * nu;
    require_margin(energy, params)?;
    let grid = adaptive_grid(nu, params, 0.01)?;
    let wave = poschl_teller_ground_state(nu, delta, &grid)?;
    Ok(BoundState { wave, energy })
}

/// G∞ for the closed-form ground state of a complex-shifted Pöschl–Teller
/// well, integrated from its analytic logarithm on the adaptive grid.
pub fn g_infinity_poschl_teller(spec: &PotentialSpec, params: &AnyonicParams) -> Result<f64> {
    let (nu, delta) = pt_shape(spec)?;
    require_margin(-nu * nu, params)?;
    check_pt_shape(nu, delta)?;
    let grid = adaptive_grid(nu, params, 0.01)?;
    let log_u: Vec<Complex64> = grid.points().iter().map(|&x| -nu * ln_cosh(Complex64::new(x, -delta))).collect();
    agreed(forms_from_log_amplitude(&grid, &log_u, params)?)
}

/// `‖exp[-i(H - Ẽ₁)t]‖²` from a dense exponential and its largest singular value.
pub fn g_t(h: &HamiltonianMatrix, e1: Complex64, t: f64) -> Result<f64> {
    if h.dim() > MAX_EXPM_DIM {
        return Err(Error::Contract(format!(
            "dense exponential limited to dimension {MAX_EXPM_DIM}, got {}",
            h.dim()
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    let mut a = h.to_dense();
    for j in 0..a.nrows() {
        a[[j, j]] -= e1;
    }
    let a: Array2<Complex64> = a.mapv(|z| -Complex64::i() * t * z);
    let e = linalg::expm(&a).map_err(|err| match err {
        Error::Divergence(m) => Error::Divergence(format!("{m}; try a smaller t than {t}")),
        other => other,
    })?;
    Ok(linalg::largest_singular_value(&e)?.powi(2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationReport {
    pub phi: f64,
    pub v: f64,
    pub delta: f64,
    pub g_infinity: f64,
    pub g_t_samples: Vec<(f64, f64)>,
    pub self_orthogonality: f64,
    pub delocalization_margin: f64,
}

impl AmplificationReport {
    pub const CSV_HEADER: [&'static str; 6] = ["phi", "v", "delta", "g_infinity", "self_orthogonality", "margin"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            fmt_num(self.phi),
            fmt_num(self.v),
            fmt_num(self.delta),
            fmt_num(self.g_infinity),
            fmt_num(self.self_orthogonality),
            fmt_num(self.delocalization_margin),
        ]
    }

    /// Columns: `t, g_t`.
    pub fn write_g_t_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "g_t"])?;
        for (t, g) in &self.g_t_samples {
            out.write_record([fmt_num(*t), fmt_num(*g)])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_h_eff, Boundary};
    use crate::spectra::{critical_velocity, shifted_point_energy};
    use std::f64::consts::PI;

    fn params(phi: f64, v: f64) -> AnyonicParams {
        AnyonicParams::new(phi, v).unwrap()
    }

    /// Closed form for ν = 1.
    fn g_oracle(delta: f64, s: f64) -> f64 {
        if delta == 0.0 && s == 0.0 {
            return 1.0;
        }
        if s == 0.0 {
            return (2.0 * delta / (2.0 * delta).sin()).powi(2);
        }
        if delta == 0.0 {
            let a = 0.5 * PI * s;
            return (a / a.sin()).powi(2);
        }
        (PI * (s * delta).sin() / ((2.0 * delta).sin() * (0.5 * PI * s).sin())).powi(2)
    }

    fn ground(delta: f64, grid: &Grid) -> BoundState {
        BoundState::new(analytic_bound_state_pt(delta, grid).unwrap(), -1.0).unwrap()
    }

    #[test]
    fn analytic_state_values() {
        let g = Grid::new(-20.0, 20.0, 4000).unwrap();
        assert!(analytic_bound_state_pt(PI / 2.0, &g).is_err());
        let u = analytic_bound_state_pt(0.0, &g).unwrap();
        assert!((u.norm_sqr() - 1.0).abs() < 1e-12);
        // before normalization u(0) = 1, and ∫sech² = 2
        let j = g.index_of(0.005);
        let raw = 1.0 / g.x(j).cosh();
        assert!((u.values()[j].re - raw / 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn analytic_state_solves_stationary_equation() {
        let g = Grid::new(-10.0, 10.0, 16000).unwrap();
        let spec = PotentialSpec::poschl_teller(1.0, 0.2).unwrap();
        let h = build_h_eff(&spec, &AnyonicParams::hermitian(), &g, Boundary::Dirichlet).unwrap();
        let u = analytic_bound_state_pt(0.2, &g).unwrap();
        let hu = h.apply(u.values()).unwrap();
        let res = (0..g.len())
            .filter(|&j| g.x(j).abs() < 5.0)
            .map(|j| (hu[j] + u.values()[j]).norm())
            .fold(0.0, f64::max);
        assert!(res < 1e-6, "{res}");
    }

    #[test]
    fn general_nu_ground_state() {
        let g = Grid::new(-10.0, 10.0, 16000).unwrap();
        let spec = PotentialSpec::poschl_teller(2.5, 0.3).unwrap();
        let h = build_h_eff(&spec, &AnyonicParams::hermitian(), &g, Boundary::Dirichlet).unwrap();
        let u = poschl_teller_ground_state(2.5, 0.3, &g).unwrap();
        let hu = h.apply(u.values()).unwrap();
        let res = (0..g.len())
            .filter(|&j| g.x(j).abs() < 5.0)
            .map(|j| (hu[j] + 6.25 * u.values()[j]).norm())
            .fold(0.0, f64::max);
        assert!(res < 1e-5, "{res}");
    }

    #[test]
    fn adjoint_state_cases() {
        let g = Grid::new(-20.0, 20.0, 4000).unwrap();
        let u = ground(0.0, &g);
        let a = adjoint_bound_state(&u, &params(PI / 3.0, 0.0)).unwrap();
        for (p, q) in a.values().iter().zip(u.wave.values()) {
            assert!((p - q).norm() < 1e-14);
        }
        let u = ground(0.2, &g);
        let a = adjoint_bound_state(&u, &params(0.0, 0.0)).unwrap();
        for (p, q) in a.values().iter().zip(u.wave.values()) {
            assert!((p - q.conj()).norm() < 1e-14);
        }
        assert!(matches!(adjoint_bound_state(&u, &params(PI / 3.0, 2.4)), Err(Error::Delocalized(_))));
    }

    #[test]
    fn adjoint_state_residual() {
        let g = Grid::new(-20.0, 20.0, 4000).unwrap();
        let p = params(PI / 3.0, 1.0);
        let spec = PotentialSpec::poschl_teller(1.0, 0.2).unwrap();
        let h = build_h_eff(&spec, &p, &g, Boundary::Periodic).unwrap();
        let a = adjoint_bound_state(&ground(0.2, &g), &p).unwrap();
        let ha = h.apply_adjoint(a.values()).unwrap();
        let e = shifted_point_energy(-1.0, &p).conj();
        let res = (0..g.len())
            .filter(|&j| g.x(j).abs() < 10.0)
            .map(|j| (ha[j] - e * a.values()[j]).norm())
            .fold(0.0, f64::max);
        assert!(res < 1e-4, "{res}");
    }

    #[test]
    fn g_infinity_is_one_for_real_state_at_rest() {
        let g = Grid::new(-40.0, 40.0, 2048).unwrap();
        let value = g_infinity(&ground(0.0, &g), &params(0.0, 0.0)).unwrap();
        assert!((value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn g_infinity_matches_closed_form() {
        let spec = PotentialSpec::poschl_teller(1.0, 0.2).unwrap();
        let vc = critical_velocity(-1.0, PI / 3.0).unwrap().unwrap();
        for (f, expected) in [(0.2, 1.2030477), (0.8, 18.640376), (0.95, 365.90105)] {
            let p = params(PI / 3.0, f * vc);
            let g = g_infinity_poschl_teller(&spec, &p).unwrap();
            assert!((g - expected).abs() < 1e-6 * expected, "{f}: {g}");
            assert!((g - g_oracle(0.2, 2.0 * f)).abs() < 1e-8 * g);
        }
        // the phase enters only through v sin φ
        let p4 = params(PI / 4.0, 0.8 * critical_velocity(-1.0, PI / 4.0).unwrap().unwrap());
        assert!((g_infinity_poschl_teller(&spec, &p4).unwrap() - 18.640376).abs() < 1e-4);
    }

    #[test]
    fn g_infinity_errors() {
        let spec = PotentialSpec::poschl_teller(1.0, 0.2).unwrap();
        let vc = critical_velocity(-1.0, PI / 3.0).unwrap().unwrap();
        assert!(matches!(g_infinity_poschl_teller(&spec, &params(PI / 3.0, vc)), Err(Error::Delocalized(_))));
        // a + 2ib with ∫a² = 4∫b² and ∫ab = 0 has ∫u² = 0
        let g = Grid::new(-10.0, 10.0, 2000).unwrap();
        let w = WaveFunction::from_fn(&g, |x| {
            let a = (-x * x).exp();
            let b = x * (-x * x).exp();
            Complex64::new(a, 2.0 * b)
        })
        .unwrap();
        let state = BoundState::new(w, -1.0).unwrap();
        assert!(matches!(g_infinity(&state, &params(0.0, 0.0)), Err(Error::ExceptionalPoint(_))));
    }

    #[test]
    fn self_orthogonality_values() {
        let g = Grid::new(-40.0, 40.0, 8000).unwrap();
        let s0 = self_orthogonality(&analytic_bound_state_pt(0.0, &g).unwrap()).unwrap();
        assert!((s0 - 1.0).abs() < 1e-12);
        let s = self_orthogonality(&analytic_bound_state_pt(0.2, &g).unwrap()).unwrap();
        assert!((s - 0.4f64.sin() / 0.4).abs() < 1e-9);
        assert!((s - 0.973546).abs() < 1e-6);
        let s1 = self_orthogonality(&analytic_bound_state_pt(PI / 4.0, &g).unwrap()).unwrap();
        let s2 = self_orthogonality(&analytic_bound_state_pt(0.9 * PI / 2.0, &g).unwrap()).unwrap();
        assert!(s0 > s1 && s1 > s2);
        assert!(s2 < 0.2);
    }

    #[test]
    fn exceptional_point_channel_at_rest() {
        let g = Grid::new(-40.0, 40.0, 16000).unwrap();
        let at_rest = params(0.0, 0.0);
        let g1 = g_infinity(&ground(PI / 4.0, &g), &at_rest).unwrap();
        let g2 = g_infinity(&ground(0.9 * PI / 2.0, &g), &at_rest).unwrap();
        assert!((g1 - g_oracle(PI / 4.0, 0.0)).abs() < 1e-6 * g1);
        assert!((g2 - g_oracle(0.9 * PI / 2.0, 0.0)).abs() < 1e-4 * g2, "{g2}");
        assert!(g2 > 10.0 * g1);
    }

    #[test]
    fn g_t_identity_and_hermitian_bound() {
        let g = Grid::new(-20.0, 20.0, 128).unwrap();
        let spec = PotentialSpec::poschl_teller(1.0, 0.0).unwrap();
        let h = build_h_eff(&spec, &AnyonicParams::hermitian(), &g, Boundary::Dirichlet).unwrap();
        let e1 = Complex64::new(-1.0, 0.0);
        assert!((g_t(&h, e1, 0.0).unwrap() - 1.0).abs() < 1e-12);
        for t in [0.5, 1.0, 3.0] {
            assert!(g_t(&h, e1, t).unwrap() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn g_t_is_capped_in_dimension() {
        let g = Grid::new(-20.0, 20.0, 2050).unwrap();
        let h = build_h_eff(&PotentialSpec::Zero, &AnyonicParams::hermitian(), &g, Boundary::Dirichlet).unwrap();
        assert!(matches!(g_t(&h, Complex64::new(0.0, 0.0), 1.0), Err(Error::Contract(_))));
    }

    #[test]
    fn report_csv_record() {
        let r = AmplificationReport {
            phi: 1.0,
            v: 0.5,
            delta: 0.2,
            g_infinity: 1.5,
            g_t_samples: vec![(0.0, 1.0)],
            self_orthogonality: 0.9,
            delocalization_margin: 0.3,
        };
        assert_eq!(r.csv_record().len(), AmplificationReport::CSV_HEADER.len());
        let mut buf = Vec::new();
        r.write_g_t_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,g_t\n0.00000000000e0,1.00000000000e0\n");
    }
}
