//! Experiment configuration files and sweep expansion.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use anyonpt_core::hamiltonian::Boundary;
use anyonpt_core::laser::CavityParams;
use anyonpt_core::propagation::PropagatorConfig;
use anyonpt_core::spectra::{critical_velocity, ground_state_energy};
use anyonpt_core::{AnyonicParams, Grid, PotentialSpec, TabulatedPotential};

use crate::RunError;

/// Upper bound on the number of points a sweep may expand to.
pub const MAX_SWEEP_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spectrum,
    Delocalize,
    Scatter,
    Amplify,
    Lasermap,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Delocalize => "delocalize",
            Experiment::Scatter => "scatter",
            Experiment::Amplify => "amplify",
            Experiment::Lasermap => "lasermap",
        }
    }
}

/// A list of values, a single value, or an inclusive linear range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Single(f64),
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>, RunError> {
        let values = match self {
            Axis::Single(x) => vec![*x],
            Axis::List(xs) => xs.clone(),
            Axis::Range { start, stop, count } => {
                if *count == 0 || *count > MAX_SWEEP_POINTS {
                    return Err(RunError::config(format!(
                        "range count must be in 1..={MAX_SWEEP_POINTS}, got {count}"
                    )));
                }
                if *count == 1 {
                    vec![*start]
                } else {
                    (0..*count)
                        .map(|j| start + (stop - start) * j as f64 / (*count - 1) as f64)
                        .collect()
                }
            }
        };
        if values.is_empty() {
            return Err(RunError::config("empty sweep axis"));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(RunError::config("sweep values must be finite"));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySetting {
    /// Dirichlet at `v = 0`, periodic otherwise.
    #[default]
    Auto,
    Dirichlet,
    Periodic,
}

impl BoundarySetting {
    pub fn resolve(&self, params: &AnyonicParams) -> Boundary {
        match self {
            BoundarySetting::Auto => Boundary::default_for(params),
            BoundarySetting::Dirichlet => Boundary::Dirichlet,
            BoundarySetting::Periodic => Boundary::Periodic,
        }
    }
}

/// Parameter sweep. The phase is given either in radians (`phi`) or in units
/// of π (`phi_over_pi`); the drift either directly (`v`) or relative to the
/// critical velocity of the ground state (`v_over_vc`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_over_pi: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_over_vc: Option<Axis>,
    /// Overrides the complex shift of a Pöschl–Teller well or barrier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Axis>,
    /// Bound-state energy used for `v_over_vc` when the potential has no closed form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumOptions {
    /// Continuum curve sampled on `[-k_max, k_max]`.
    #[serde(default = "default_k_max")]
    pub k_max: f64,
    #[serde(default = "default_dispersion_samples")]
    pub dispersion_samples: usize,
}

fn default_k_max() -> f64 {
    6.0
}

fn default_dispersion_samples() -> usize {
    401
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            k_max: default_k_max(),
            dispersion_samples: default_dispersion_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelocalizeOptions {
    /// Run the dense eigensolve to count point eigenvalues.
    #[serde(default = "yes")]
    pub numeric: bool,
    /// Points with `|v|/v_c` at or above this use a box twice as long at the same spacing.
    #[serde(default = "default_double_box_above")]
    pub double_box_above: f64,
}

fn yes() -> bool {
    true
}

fn default_double_box_above() -> f64 {
    0.9
}

impl Default for DelocalizeOptions {
    fn default() -> Self {
        DelocalizeOptions {
            numeric: true,
            double_box_above: default_double_box_above(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterOptions {
    /// Initial packet centre.
    pub d: f64,
    /// Initial packet width.
    pub w: f64,
    /// Carrier wavenumbers.
    pub k: Axis,
    /// Boundary between the incidence region and the far region.
    #[serde(default)]
    pub separatrix: f64,
    /// Write the density NDJSON for every cell.
    #[serde(default = "yes")]
    pub write_density: bool,
    /// Wavenumbers for a stationary r(k), t(k) table per (φ, v).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rt_k: Option<Axis>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifyOptions {
    /// Times at which `G_t` is evaluated.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub g_t_times: Vec<f64>,
    /// Grid for the dense `G_t` exponential; `[-40, 40]` with 1024 points by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_t_grid: Option<Grid>,
    /// Evolve the drifting bound state with the propagator settings.
    #[serde(default)]
    pub evolve: bool,
    /// Peak excursion beyond which the bound state counts as destroyed.
    #[serde(default = "default_breakup_radius")]
    pub breakup_radius: f64,
}

fn default_breakup_radius() -> f64 {
    5.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserOptions {
    pub cavity: CavityParams,
    #[serde(default = "default_laser_tol")]
    pub tol: f64,
    /// Bound-state energy of the modulation-induced well.
    pub e1: f64,
    /// Detuning sweep over `Tm/TR`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tm_over_tr: Option<Axis>,
}

fn default_laser_tol() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Reserved; no stochastic components use it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default = "zero_potential")]
    pub potential: PotentialSpec,
    /// CSV file `(x, re_v, im_v)` replacing `potential`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_csv: Option<PathBuf>,
    #[serde(default)]
    pub boundary: BoundarySetting,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub propagator: Option<PropagatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delocalize: Option<DelocalizeOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatter: Option<ScatterOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplify: Option<AmplifyOptions>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laser: Option<LaserOptions>,
}

fn zero_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

/// One expanded sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub params: AnyonicParams,
    pub potential: PotentialSpec,
    pub delta: Option<f64>,
    /// Ground-state energy, when known.
    pub e1: Option<f64>,
    /// `|v|/v_c`, when the critical velocity is finite.
    pub v_over_vc: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_toml_str(&text)
            .map_err(|e| e.context(format!("{}", path.display())))?;
        // relative potential tables resolve against the config file
        if let Some(csv) = &config.potential_csv {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    config.potential_csv = Some(dir.join(csv));
                }
            }
        }
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, RunError> {
        toml::to_string(self).map_err(|e| RunError::config(format!("cannot serialize config: {e}")))
    }

    pub fn grid_or_default(&self) -> Grid {
        self.grid.clone().unwrap_or_default()
    }

    /// The potential, loading the CSV table if one is configured.
    pub fn resolved_potential(&self) -> Result<PotentialSpec, RunError> {
        let spec = match &self.potential_csv {
            Some(path) => PotentialSpec::Tabulated(
                TabulatedPotential::from_csv_path(path).map_err(|e| RunError::config(e.to_string()))?,
            ),
            None => self.potential.clone(),
        };
        spec.validate().map_err(|e| RunError::config(e.to_string()))?;
        Ok(spec)
    }

    fn phis(&self) -> Result<Vec<f64>, RunError> {
        match (&self.sweep.phi, &self.sweep.phi_over_pi) {
            (Some(_), Some(_)) => Err(RunError::config("give either sweep.phi or sweep.phi_over_pi, not both")),
            (Some(a), None) => a.values(),
            (None, Some(a)) => Ok(a.values()?.into_iter().map(|x| x * PI).collect()),
            (None, None) => Ok(vec![0.0]),
        }
    }

    fn deltas(&self) -> Result<Vec<Option<f64>>, RunError> {
        Ok(match &self.sweep.delta {
            Some(a) => a.values()?.into_iter().map(Some).collect(),
            None => vec![None],
        })
    }

    /// Expands the sweep in `delta`, `phi`, `v` order (last varies fastest).
    pub fn sweep_points(&self) -> Result<Vec<SweepPoint>, RunError> {
        let base = self.resolved_potential()?;
        let phis = self.phis()?;
        let deltas = self.deltas()?;
        let (v_axis, relative) = match (&self.sweep.v, &self.sweep.v_over_vc) {
            (Some(_), Some(_)) => return Err(RunError::config("give either sweep.v or sweep.v_over_vc, not both")),
            (Some(a), None) => (a.values()?, false),
            (None, Some(a)) => (a.values()?, true),
            (None, None) => (vec![0.0], false),
        };
        let total = phis.len() * deltas.len() * v_axis.len();
        if total > MAX_SWEEP_POINTS {
            return Err(RunError::config(format!(
                "sweep expands to {total} points, more than {MAX_SWEEP_POINTS}"
            )));
        }
        let mut points = Vec::with_capacity(total);
        for delta in &deltas {
            let potential = match (delta, &base) {
                (None, spec) => spec.clone(),
                (Some(d), PotentialSpec::PoschlTeller { nu, .. }) => PotentialSpec::PoschlTeller { nu: *nu, delta: *d },
                (Some(d), PotentialSpec::Barrier { v0, .. }) => PotentialSpec::Barrier { v0: *v0, delta: *d },
                (Some(_), _) => {
                    return Err(RunError::config("sweep.delta needs a poschl_teller or barrier potential"))
                }
            };
            potential.validate().map_err(|e| RunError::config(e.to_string()))?;
            let e1 = ground_state_energy(&potential).or(self.sweep.e1);
            for &phi in &phis {
                let vc = match e1 {
                    Some(e) => critical_velocity(e, phi).map_err(|err| RunError::config(err.to_string()))?,
                    None => None,
                };
                for &x in &v_axis {
                    let v = if relative {
                        match vc {
                            Some(vc) => x * vc,
                            None if e1.is_none() => {
                                return Err(RunError::config(
                                    "sweep.v_over_vc needs a closed-form ground state or sweep.e1",
                                ))
                            }
                            None => return Err(RunError::config("sweep.v_over_vc needs phi > 0")),
                        }
                    } else {
                        x
                    };
                    let params = AnyonicParams::new(phi, v).map_err(|e| RunError::config(e.to_string()))?;
                    points.push(SweepPoint {
                        index: points.len(),
                        params,
                        potential: potential.clone(),
                        delta: *delta,
                        e1,
                        v_over_vc: vc.map(|vc| v.abs() / vc),
                    });
                }
            }
        }
        Ok(points)
    }

    /// Checks everything that can be checked before any numerics run.
    pub fn validate(&self) -> Result<(), RunError> {
        let grid = self.grid_or_default();
        match self.experiment {
            Experiment::Lasermap => {
                let laser = self
                    .laser
                    .as_ref()
                    .ok_or_else(|| RunError::config("lasermap needs a [laser] section"))?;
                laser.cavity.validate().map_err(|e| RunError::config(e.to_string()))?;
                if let Some(a) = &laser.tm_over_tr {
                    if a.values()?.iter().any(|&x| x.is_nan() || x <= 0.0) {
                        return Err(RunError::config("tm_over_tr values must be positive"));
                    }
                }
                if laser.e1.is_nan() || laser.e1 >= 0.0 {
                    return Err(RunError::config("laser.e1 must be negative"));
                }
                return Ok(());
            }
            Experiment::Scatter => {
                let scatter = self
                    .scatter
                    .as_ref()
                    .ok_or_else(|| RunError::config("scatter needs a [scatter] section"))?;
                let prop = self
                    .propagator
                    .as_ref()
                    .ok_or_else(|| RunError::config("scatter needs a [propagator] section"))?;
                prop.validate(&grid).map_err(|e| RunError::config(e.to_string()))?;
                for k in scatter.k.values()? {
                    anyonpt_core::scattering::PacketSpec { d: scatter.d, w: scatter.w, k }
                        .validate(&grid)
                        .map_err(|e| RunError::config(e.to_string()))?;
                }
                if let Some(a) = &scatter.rt_k {
                    a.values()?;
                }
            }
            Experiment::Amplify => {
                let amplify = self.amplify.clone().unwrap_or_default();
                if amplify.evolve {
                    let prop = self
                        .propagator
                        .as_ref()
                        .ok_or_else(|| RunError::config("amplify.evolve needs a [propagator] section"))?;
                    prop.validate(&grid).map_err(|e| RunError::config(e.to_string()))?;
                }
                if amplify.g_t_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                    return Err(RunError::config("g_t_times must be non-negative"));
                }
                if let Some(g) = &amplify.g_t_grid {
                    if g.len() > anyonpt_core::nonnormal::MAX_EXPM_DIM {
                        return Err(RunError::config(format!(
                            "g_t_grid has {} points, the dense exponential allows {}",
                            g.len(),
                            anyonpt_core::nonnormal::MAX_EXPM_DIM
                        )));
                    }
                }
            }
            Experiment::Spectrum | Experiment::Delocalize => {
                if grid.len() > anyonpt_core::spectra::MAX_EIGEN_DIM {
                    return Err(RunError::config(format!(
                        "grid has {} points, the dense eigensolver allows {}",
                        grid.len(),
                        anyonpt_core::spectra::MAX_EIGEN_DIM
                    )));
                }
            }
        }
        self.sweep_points()?;
        Ok(())
    }
}
