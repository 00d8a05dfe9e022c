//! Analytic spectra of the drifting operator and the numerical eigensolve
//! used to check them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::hamiltonian::{build_h_eff, Boundary, HamiltonianMatrix};
use crate::linalg;
use crate::output::fmt_num;
use crate::params::AnyonicParams;
use crate::potential::PotentialSpec;

/// Largest matrix handed to the dense eigensolver.
pub const MAX_EIGEN_DIM: usize = 8192;

/// A state counts as a point-spectrum state when its participation ratio is
/// below this fraction of the box length.
pub const POINT_PR_FRACTION: f64 = 0.2;

/// `Ẽ(k) = e^{-iφ}k² - kv`.
pub fn continuous_dispersion(k: f64, params: &AnyonicParams) -> Complex64 {
    params.rotation() * (k * k) - k * params.v()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    pub k_samples: Vec<f64>,
    pub energy: Vec<Complex64>,
}

impl DispersionCurve {
    pub fn sample(params: &AnyonicParams, k_samples: Vec<f64>) -> Self {
        let energy = k_samples.iter().map(|&k| continuous_dispersion(k, params)).collect();
        DispersionCurve { k_samples, energy }
    }

    /// `count` evenly spaced wavenumbers on `[-k_max, k_max]`.
    pub fn symmetric(params: &AnyonicParams, k_max: f64, count: usize) -> Self {
        let count = count.max(2);
        let ks = (0..count)
            .map(|j| -k_max + 2.0 * k_max * j as f64 / (count - 1) as f64)
            .collect();
        DispersionCurve::sample(params, ks)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k", "re_e", "im_e"])?;
        for (k, e) in self.k_samples.iter().zip(&self.energy) {
            out.write_record([fmt_num(*k), fmt_num(e.re), fmt_num(e.im)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Bound-state energies `E_1 < ... < E_N < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateFamily {
    pub energies: Vec<f64>,
}

impl BoundStateFamily {
    pub fn count(&self) -> usize {
        self.energies.len()
    }

    pub fn ground(&self) -> Option<f64> {
        self.energies.first().copied()
    }
}

/// `E_n = -(ν - n + 1)²` for `n = 1..=1+⌊ν⌋`; the zero-energy edge state of
/// integer `ν` is not a bound state and is left out.
pub fn poschl_teller_energies(nu: f64) -> Result<BoundStateFamily> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Domain(format!("nu must be positive, got {nu}")));
    }
    let count = 1 + nu.floor() as usize;
    let energies = (1..=count)
        .map(|n| -(nu - n as f64 + 1.0).powi(2))
        .filter(|&e| e < 0.0)
        .collect();
    Ok(BoundStateFamily { energies })
}

/// Ground-state energy where it is known in closed form.
pub fn ground_state_energy(spec: &PotentialSpec) -> Option<f64> {
    match spec {
        PotentialSpec::PoschlTeller { nu, .. } => poschl_teller_energies(*nu).ok()?.ground(),
        _ => None,
    }
}

/// `Ẽ_n = E_n e^{-iφ} + β`.
pub fn shifted_point_energy(e_n: f64, params: &AnyonicParams) -> Complex64 {
    params.rotation() * e_n + params.gauge().beta
}

fn require_bound_energy(e_n: f64) -> Result<()> {
    if !(e_n < 0.0) {
        return Err(Error::Domain(format!("bound-state energy must be negative, got {e_n}")));
    }
    Ok(())
}

/// `v_c = 2√|E_n| / sin φ`; `None` at `φ = 0`, where no drift delocalizes.
pub fn critical_velocity(e_n: f64, phi: f64) -> Result<Option<f64>> {
    require_bound_energy(e_n)?;
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&phi) {
        return Err(Error::Domain(format!("phase {phi} outside [0, π/2]")));
    }
    if phi == 0.0 {
        return Ok(None);
    }
    Ok(Some(2.0 * (-e_n).sqrt() / phi.sin()))
}

/// `k_c = √(-E_n) / tan φ`, where `Ẽ_n` meets the continuum at `v = v_c`.
pub fn critical_wavenumber(e_n: f64, phi: f64) -> Result<f64> {
    require_bound_energy(e_n)?;
    if !(phi > 0.0 && phi <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("critical wavenumber needs 0 < φ <= π/2, got {phi}")));
    }
    if phi == std::f64::consts::FRAC_PI_2 {
        return Ok(0.0);
    }
    Ok((-e_n).sqrt() / phi.tan())
}

/// `√|E_n| - |v/2| sin φ`; the drifted state is normalizable while this is positive.
pub fn delocalization_margin(e_n: f64, params: &AnyonicParams) -> f64 {
    e_n.abs().sqrt() - (0.5 * params.v() * params.phi().sin()).abs()
}

/// A normalized bound state of the stationary operator together with its energy.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub wave: WaveFunction,
    pub energy: f64,
}

impl BoundState {
    pub fn new(wave: WaveFunction, energy: f64) -> Result<Self> {
        require_bound_energy(energy)?;
        Ok(BoundState {
            wave: wave.normalized()?,
            energy,
        })
    }
}

/// `ũ_n = u_n e^{iαx}`, renormalized, or `None` once the drift delocalizes it.
pub fn moving_bound_state(u: &BoundState, params: &AnyonicParams) -> Result<Option<WaveFunction>> {
    if delocalization_margin(u.energy, params) <= 0.0 {
        return Ok(None);
    }
    let alpha = params.gauge().alpha;
    let i = Complex64::i();
    let moved = u.wave.map(|x, z| z * (i * alpha * x).exp());
    Ok(Some(moved.normalized()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralClass {
    Point,
    Continuum,
}

impl SpectralClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectralClass::Point => "point",
            SpectralClass::Continuum => "continuum",
        }
    }
}

/// Exponential decay rates of the two tails of a state, from log-linear fits.
/// A side that does not decay by a decade inside the fit region reports 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailRates {
    pub left: f64,
    pub right: f64,
}

const TAIL_UPPER: f64 = 1e-1;
const TAIL_LOWER: f64 = 1e-8;
const TAIL_MIN_POINTS: usize = 8;
/// Fraction of the box next to each edge left out of tail fits.
const EDGE_FRACTION: f64 = 0.1;

fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Decay rate along `indices` (ordered away from the peak), using the
/// running-maximum envelope so that nodes do not bias the fit.
fn side_rate(wave: &WaveFunction, indices: &[usize], peak: f64) -> f64 {
    let grid = wave.grid();
    let abs: Vec<f64> = indices.iter().map(|&j| wave.values()[j].norm()).collect();
    let mut envelope = abs.clone();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let window: Vec<(f64, f64)> = indices
        .iter()
        .zip(&envelope)
        .filter(|(_, &e)| e <= TAIL_UPPER * peak && e >= TAIL_LOWER * peak)
        .map(|(&j, &e)| ((grid.x(j) - grid.x(indices[0])).abs(), e.ln()))
        .collect();
    if window.len() < TAIL_MIN_POINTS {
        return 0.0;
    }
    (-fit_slope(&window)).max(0.0)
}

pub fn tail_decay_rates(wave: &WaveFunction) -> TailRates {
    let grid = wave.grid();
    let n = grid.len();
    let values = wave.values();
    let (p, peak) = values
        .iter()
        .map(|z| z.norm())
        .enumerate()
        .fold((0, 0.0), |best, (j, a)| if a > best.1 { (j, a) } else { best });
    if peak == 0.0 {
        return TailRates { left: 0.0, right: 0.0 };
    }
    let edge = (EDGE_FRACTION * n as f64).ceil() as usize;
    let lo = edge.min(n);
    let hi = n.saturating_sub(edge);
    let right: Vec<usize> = (p..hi).collect();
    let left: Vec<usize> = (lo..=p.min(n - 1)).rev().filter(|&j| j >= lo).collect();
    TailRates {
        left: if left.is_empty() { 0.0 } else { side_rate(wave, &left, peak) },
        right: if right.is_empty() { 0.0 } else { side_rate(wave, &right, peak) },
    }
}

/// `1 / (slowest tail decay rate)`, capped at the box length.
pub fn localization_length(wave: &WaveFunction) -> f64 {
    let rates = tail_decay_rates(wave);
    let slowest = rates.left.min(rates.right);
    let box_length = wave.grid().length();
    if slowest <= 1.0 / box_length {
        box_length
    } else {
        1.0 / slowest
    }
}

pub fn classify(wave: &WaveFunction) -> SpectralClass {
    if wave.participation_ratio() < POINT_PR_FRACTION * wave.grid().length() {
        SpectralClass::Point
    } else {
        SpectralClass::Continuum
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    pub eigenvectors: Vec<WaveFunction>,
    pub classification: Vec<SpectralClass>,
    pub participation_ratio: Vec<f64>,
    pub localization_length: Vec<f64>,
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn point_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.classification[j] == SpectralClass::Point)
            .collect()
    }

    pub fn point_count(&self) -> usize {
        self.point_indices().len()
    }

    /// Index of the eigenvalue nearest to `target`.
    pub fn nearest(&self, target: Complex64) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| {
            (self.eigenvalues[a] - target)
                .norm()
                .total_cmp(&(self.eigenvalues[b] - target).norm())
        })
    }

    /// Columns: `re_e, im_e, class, participation_ratio, localization_length`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["re_e", "im_e", "class", "participation_ratio", "localization_length"])?;
        for j in 0..self.len() {
            let e = self.eigenvalues[j];
            out.write_record([
                fmt_num(e.re),
                fmt_num(e.im),
                self.classification[j].as_str().to_string(),
                fmt_num(self.participation_ratio[j]),
                fmt_num(self.localization_length[j]),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_dim(h: &HamiltonianMatrix) -> Result<()> {
    if h.dim() > MAX_EIGEN_DIM {
        return Err(Error::Contract(format!(
            "dense eigensolve limited to dimension {MAX_EIGEN_DIM}, got {}",
            h.dim()
        )));
    }
    Ok(())
}

fn by_energy(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigenvalues only, sorted by real then imaginary part.
pub fn spectrum_eigenvalues(h: &HamiltonianMatrix) -> Result<Vec<Complex64>> {
    check_dim(h)?;
    let mut ev = linalg::eigenvalues(&h.to_dense())?.to_vec();
    ev.sort_by(by_energy);
    Ok(ev)
}

/// Full eigendecomposition with Point/Continuum classification.
pub fn solve_spectrum(h: &HamiltonianMatrix) -> Result<SpectrumResult> {
    check_dim(h)?;
    let (vals, vecs) = linalg::eigenpairs(&h.to_dense())?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| by_energy(&vals[a], &vals[b]));

    let grid = h.grid();
    let mut result = SpectrumResult {
        eigenvalues: Vec::with_capacity(order.len()),
        eigenvectors: Vec::with_capacity(order.len()),
        classification: Vec::with_capacity(order.len()),
        participation_ratio: Vec::with_capacity(order.len()),
        localization_length: Vec::with_capacity(order.len()),
    };
    for j in order {
        let wave = WaveFunction::new(grid.clone(), vecs.column(j).to_vec())?.normalized()?;
        result.eigenvalues.push(vals[j]);
        result.classification.push(classify(&wave));
        result.participation_ratio.push(wave.participation_ratio());
        result.localization_length.push(localization_length(&wave));
        result.eigenvectors.push(wave);
    }
    Ok(result)
}

/// Bound states of the stationary, undrifted operator `-∂² + V` on a
/// Dirichlet box, ordered by energy. Each state is phased so that `∫u² dx`
/// is real and positive.
pub fn stationary_bound_states(spec: &PotentialSpec, grid: &Grid) -> Result<Vec<BoundState>> {
    let h = build_h_eff(spec, &AnyonicParams::hermitian(), grid, Boundary::Dirichlet)?;
    let spectrum = solve_spectrum(&h)?;
    let mut states = Vec::new();
    for j in spectrum.point_indices() {
        let e = spectrum.eigenvalues[j];
        if e.re >= 0.0 {
            continue;
        }
        let wave = &spectrum.eigenvectors[j];
        let sq = wave.square_integral();
        let phase = Complex64::from_polar(1.0, -0.5 * sq.arg());
        states.push(BoundState::new(wave.map(|_, z| z * phase), e.re)?);
    }
    Ok(states)
}
