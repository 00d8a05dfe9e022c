//! Split-step Fourier time evolution in the moving and lab frames.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::output::fmt_num;
use crate::params::AnyonicParams;
use crate::potential::PotentialSpec;

/// `|ψ|` beyond this aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e150;
pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_SNAPSHOT_EVERY: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Co-moving with the potential: drift folded into the kinetic multiplier.
    #[default]
    Moving,
    /// Potential translated as `V(X - vt)`, no drift term.
    Lab,
}

/// Cosine-ramp damping layer of the given width at both box edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Absorber {
    pub width: f64,
    pub strength: f64,
}

impl Absorber {
    fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.width > 0.0 && self.width.is_finite()) || !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(Error::Contract(format!(
                "absorber needs positive width and non-negative strength, got {self:?}"
            )));
        }
        if self.width > 0.25 * grid.length() {
            return Err(Error::Contract(format!(
                "absorber width {} exceeds a quarter of the box length {}",
                self.width,
                grid.length()
            )));
        }
        Ok(())
    }

    /// Per-step multiplicative mask `exp(-strength·ramp(x)·dt)`.
    pub fn mask(&self, grid: &Grid, dt: f64) -> Result<Vec<f64>> {
        self.validate(grid)?;
        Ok((0..grid.len())
            .map(|j| {
                let x = grid.x(j);
                let depth = (grid.x_min() + self.width - x).max(x - (grid.x_max() - self.width));
                if depth <= 0.0 {
                    1.0
                } else {
                    let ramp = (0.5 * std::f64::consts::PI * depth / self.width).sin().powi(2);
                    (-self.strength * ramp * dt).exp()
                }
            })
            .collect())
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_snapshot_every() -> usize {
    DEFAULT_SNAPSHOT_EVERY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub frame: Frame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorber: Option<Absorber>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
}

impl PropagatorConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        PropagatorConfig {
            dt,
            t_final,
            frame: Frame::Moving,
            absorber: None,
            snapshot_every: DEFAULT_SNAPSHOT_EVERY,
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Contract(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::Contract(format!("t_final must be non-negative, got {}", self.t_final)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Contract("snapshot_every must be at least 1".into()));
        }
        if let Some(a) = &self.absorber {
            a.validate(grid)?;
        }
        Ok(())
    }

    /// Number of steps and the step actually used so that the run ends exactly at `t_final`.
    pub fn schedule(&self) -> (usize, f64) {
        let n = (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize;
        if n == 0 {
            (0, self.dt)
        } else {
            (n, self.t_final / n as f64)
        }
    }

    /// Accuracy bound `0.5·dx²/max(1, |cos φ|)`; exceeding it is allowed but
    /// reduces accuracy for the fastest modes.
    pub fn accuracy_bound(grid: &Grid, phi: f64) -> f64 {
        0.5 * grid.dx().powi(2) / phi.cos().abs().max(1.0)
    }
}

/// Reusable Strang-splitting propagator with its own FFT plans and buffers.
pub struct SplitStep {
    grid: Grid,
    params: AnyonicParams,
    spec: PotentialSpec,
    frame: Frame,
    dt: f64,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    time: f64,
}

impl SplitStep {
    pub fn new(
        spec: &PotentialSpec,
        params: &AnyonicParams,
        grid: &Grid,
        frame: Frame,
        dt: f64,
        absorber: Option<&Absorber>,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Contract(format!("dt must be positive, got {dt}")));
        }
        spec.validate()?;
        let rot = params.rotation();
        let i = Complex64::i();
        let kinetic = grid
            .wavenumbers()
            .iter()
            .map(|&k| {
                let symbol = match frame {
                    Frame::Moving => rot * (k * k) - k * params.v(),
                    Frame::Lab => rot * (k * k),
                };
                (-i * symbol * dt).exp()
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.len());
        let inverse = planner.plan_fft_inverse(grid.len());
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        let mut stepper = SplitStep {
            grid: grid.clone(),
            params: *params,
            spec: spec.clone(),
            frame,
            dt,
            half_potential: vec![Complex64::new(1.0, 0.0); grid.len()],
            kinetic,
            mask: absorber.map(|a| a.mask(grid, dt)).transpose()?,
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            time: 0.0,
        };
        if frame == Frame::Moving {
            stepper.half_potential = stepper.potential_factor(0.0)?;
        }
        Ok(stepper)
    }

    fn potential_factor(&self, t: f64) -> Result<Vec<Complex64>> {
        let scale = -Complex64::i() * self.params.rotation() * (0.5 * self.dt);
        let shift = match self.frame {
            Frame::Moving => 0.0,
            Frame::Lab => self.params.v() * t,
        };
        (0..self.grid.len())
            .map(|j| {
                let x = self.grid.wrap(self.grid.x(j) - shift);
                Ok((scale * self.spec.eval(x)?).exp())
            })
            .collect()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Advances `psi` in place by one step.
    pub fn step(&mut self, psi: &mut [Complex64]) -> Result<()> {
        if psi.len() != self.grid.len() {
            return Err(Error::Contract(format!(
                "state has {} samples, grid has {}",
                psi.len(),
                self.grid.len()
            )));
        }
        let (first, second) = match self.frame {
            Frame::Moving => (None, None),
            Frame::Lab => (
                Some(self.potential_factor(self.time)?),
                Some(self.potential_factor(self.time + self.dt)?),
            ),
        };
        let half = first.as_deref().unwrap_or(&self.half_potential);
        psi.iter_mut().zip(half).for_each(|(z, f)| *z *= f);

        self.forward.process_with_scratch(psi, &mut self.scratch);
        let inv_n = 1.0 / psi.len() as f64;
        psi.iter_mut().zip(&self.kinetic).for_each(|(z, f)| *z *= f * inv_n);
        self.inverse.process_with_scratch(psi, &mut self.scratch);

        let half = second.as_deref().unwrap_or(&self.half_potential);
        psi.iter_mut().zip(half).for_each(|(z, f)| *z *= f);
        if let Some(mask) = &self.mask {
            psi.iter_mut().zip(mask).for_each(|(z, m)| *z *= *m);
        }
        self.time += self.dt;

        let peak = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !(peak <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence(format!(
                "|ψ| reached {peak:e} at t = {}; the PT phase may be broken or dt too large",
                self.time
            )));
        }
        Ok(())
    }
}

/// One moving-frame Strang step.
pub fn step_split_fourier(
    psi: &WaveFunction,
    spec: &PotentialSpec,
    params: &AnyonicParams,
    dt: f64,
) -> Result<WaveFunction> {
    let mut stepper = SplitStep::new(spec, params, psi.grid(), Frame::Moving, dt, None)?;
    let mut values = psi.values().to_vec();
    stepper.step(&mut values)?;
    WaveFunction::new(psi.grid().clone(), values)
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub norm: f64,
    pub wave: WaveFunction,
}

#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    /// Every step, starting at `t = 0`.
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    /// Every `snapshot_every` steps, plus the initial and final state.
    pub snapshots: Vec<Snapshot>,
}

impl EvolutionRecord {
    pub fn final_state(&self) -> &WaveFunction {
        &self.snapshots.last().expect("record always holds the initial state").wave
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// One line per snapshot: `{"t":..,"norm":..,"x_min":..,"dx":..,"density":[..]}`.
    pub fn write_ndjson(&self, mut w: impl Write) -> Result<()> {
        for s in &self.snapshots {
            let grid = s.wave.grid();
            let density: Vec<String> = s.wave.density().into_iter().map(fmt_num).collect();
            writeln!(
                w,
                "{{\"t\":{},\"norm\":{},\"x_min\":{},\"dx\":{},\"density\":[{}]}}",
                fmt_num(s.t),
                fmt_num(s.norm),
                fmt_num(grid.x_min()),
                fmt_num(grid.dx()),
                density.join(",")
            )?;
        }
        Ok(())
    }

    /// `(t, norm)` at every step.
    pub fn write_norm_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "norm"])?;
        for (t, n) in self.times.iter().zip(&self.norm) {
            out.write_record([fmt_num(*t), fmt_num(*n)])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn evolve(
    psi0: &WaveFunction,
    spec: &PotentialSpec,
    params: &AnyonicParams,
    config: &PropagatorConfig,
) -> Result<EvolutionRecord> {
    let grid = psi0.grid();
    config.validate(grid)?;
    let (steps, dt) = config.schedule();
    let mut stepper = SplitStep::new(spec, params, grid, config.frame, dt, config.absorber.as_ref())?;
    let mut values = psi0.values().to_vec();
    let mut record = EvolutionRecord {
        times: Vec::with_capacity(steps + 1),
        norm: Vec::with_capacity(steps + 1),
        snapshots: vec![Snapshot {
            t: 0.0,
            norm: psi0.norm_sqr(),
            wave: psi0.clone(),
        }],
    };
    record.times.push(0.0);
    record.norm.push(psi0.norm_sqr());
    for n in 1..=steps {
        stepper.step(&mut values)?;
        let t = n as f64 * dt;
        let norm = crate::grid::trapezoid(grid.dx(), &values.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>());
        record.times.push(t);
        record.norm.push(norm);
        if n % config.snapshot_every == 0 || n == steps {
            record.snapshots.push(Snapshot {
                t,
                norm,
                wave: WaveFunction::new(grid.clone(), values.clone())?,
            });
        }
    }
    Ok(record)
}

/// Final state only, without snapshot storage.
pub fn evolve_to(
    psi0: &WaveFunction,
    spec: &PotentialSpec,
    params: &AnyonicParams,
    frame: Frame,
    dt: f64,
    t_final: f64,
) -> Result<WaveFunction> {
    let config = PropagatorConfig {
        frame,
        ..PropagatorConfig::new(dt, t_final)
    };
    config.validate(psi0.grid())?;
    let (steps, dt) = config.schedule();
    let mut stepper = SplitStep::new(spec, params, psi0.grid(), frame, dt, None)?;
    let mut values = psi0.values().to_vec();
    for _ in 0..steps {
        stepper.step(&mut values)?;
    }
    WaveFunction::new(psi0.grid().clone(), values)
}

/// Periodic translation `ψ(x) ↦ ψ(x + shift)` by a Fourier phase.
pub fn translate(psi: &WaveFunction, shift: f64) -> WaveFunction {
    let n = psi.grid().len();
    let mut planner = FftPlanner::new();
    let mut values = psi.values().to_vec();
    planner.plan_fft_forward(n).process(&mut values);
    let inv_n = 1.0 / n as f64;
    for (z, k) in values.iter_mut().zip(psi.grid().wavenumbers()) {
        *z *= Complex64::from_polar(inv_n, k * shift);
    }
    planner.plan_fft_inverse(n).process(&mut values);
    WaveFunction::new(psi.grid().clone(), values).expect("translation keeps values finite")
}

/// Max-norm difference between moving-frame evolution and the gauge-mapped
/// evolution of the undrifted problem. Only meaningful at `φ = 0`.
pub fn gauge_transform_check(
    spec: &PotentialSpec,
    params: &AnyonicParams,
    psi0: &WaveFunction,
    t: f64,
) -> Result<f64> {
    gauge_transform_check_with_dt(spec, params, psi0, t, DEFAULT_DT)
}

pub fn gauge_transform_check_with_dt(
    spec: &PotentialSpec,
    params: &AnyonicParams,
    psi0: &WaveFunction,
    t: f64,
    dt: f64,
) -> Result<f64> {
    if params.phi() != 0.0 {
        return Err(Error::Contract(format!(
            "the gauge transformation only maps the drift away at φ = 0, got φ = {}",
            params.phi()
        )));
    }
    let gauge = params.gauge();
    let alpha = gauge.alpha.re;
    let beta = gauge.beta.re;
    let i = Complex64::i();
    let moving = evolve_to(psi0, spec, params, Frame::Moving, dt, t)?;
    let start = psi0.map(|x, z| z * (-i * alpha * x).exp());
    let rest = evolve_to(&start, spec, &AnyonicParams::hermitian(), Frame::Moving, dt, t)?;
    let mapped = rest.map(|x, z| z * (i * (alpha * x - beta * t)).exp());
    Ok(moving
        .values()
        .iter()
        .zip(mapped.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// `exp(-v x sin φ)·exp((v²/2) t sin φ)`.
pub fn gauge_growth_factor(x: f64, t: f64, params: &AnyonicParams) -> f64 {
    let s = params.phi().sin();
    let v = params.v();
    (-v * x * s + 0.5 * v * v * t * s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(phi: f64, v: f64) -> AnyonicParams {
        AnyonicParams::new(phi, v).unwrap()
    }

    fn gaussian(grid: &Grid, d: f64, w: f64, k: f64) -> WaveFunction {
        WaveFunction::from_fn(grid, |x| {
            Complex64::new(-((x - d) / w).powi(2), k * x).exp()
        })
        .unwrap()
    }

    #[test]
    fn single_mode_gets_exact_phase() {
        let g = Grid::new(-10.0, 10.0, 64).unwrap();
        let p = params(PI / 3.0, 0.7);
        let k0 = g.wavenumbers()[5];
        let psi = WaveFunction::from_fn(&g, |x| Complex64::new(0.0, k0 * x).exp()).unwrap();
        let dt = 0.37;
        let out = step_split_fourier(&psi, &PotentialSpec::Zero, &p, dt).unwrap();
        let factor = (-Complex64::i() * crate::spectra::continuous_dispersion(k0, &p) * dt).exp();
        for (a, b) in out.values().iter().zip(psi.values()) {
            assert!((a - b * factor).norm() < 1e-12);
        }
    }

    #[test]
    fn hermitian_step_conserves_norm() {
        let g = Grid::new(-40.0, 40.0, 1024).unwrap();
        let spec = PotentialSpec::poschl_teller(1.0, 0.0).unwrap();
        let psi = gaussian(&g, -5.0, 2.0, 1.0);
        let out = step_split_fourier(&psi, &spec, &AnyonicParams::hermitian(), 0.005).unwrap();
        assert!((out.norm_sqr() - psi.norm_sqr()).abs() < 1e-10 * psi.norm_sqr());
    }

    #[test]
    fn high_modes_decay_at_rotated_rate() {
        let g = Grid::new(-20.0, 20.0, 256).unwrap();
        let phi = PI / 3.0;
        let p = params(phi, 0.0);
        let k1 = g.wavenumbers()[4];
        let k2 = g.wavenumbers()[30];
        let psi = WaveFunction::from_fn(&g, |x| {
            Complex64::new(0.0, k1 * x).exp() + Complex64::new(0.0, k2 * x).exp()
        })
        .unwrap();
        let t = 0.2;
        let out = evolve_to(&psi, &PotentialSpec::Zero, &p, Frame::Moving, 0.01, t).unwrap();
        let mut spectrum = out.values().to_vec();
        FftPlanner::new().plan_fft_forward(g.len()).process(&mut spectrum);
        let n = g.len() as f64;
        let a1 = spectrum[4].norm() / n;
        let a2 = spectrum[30].norm() / n;
        assert!((a1 - (-phi.sin() * k1 * k1 * t).exp()).abs() < 1e-12);
        assert!((a2 - (-phi.sin() * k2 * k2 * t).exp()).abs() < 1e-12);
    }

    #[test]
    fn eigenstate_density_is_stationary() {
        let g = Grid::new(-40.0, 40.0, 1024).unwrap();
        let spec = PotentialSpec::poschl_teller(1.0, 0.0).unwrap();
        let psi = WaveFunction::from_fn(&g, |x| Complex64::new(1.0 / x.cosh(), 0.0)).unwrap();
        let record = evolve(&psi, &spec, &AnyonicParams::hermitian(), &PropagatorConfig::new(0.005, 20.0)).unwrap();
        let d0 = psi.density();
        let d1 = record.final_state().density();
        let err = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
        assert_eq!(record.snapshots.len(), 41);
        assert_eq!(record.times.len(), 4001);
    }

    #[test]
    fn gauge_factor_examples() {
        assert_eq!(gauge_growth_factor(3.0, 5.0, &params(0.0, 2.0)), 1.0);
        let f = gauge_growth_factor(0.0, 1.0, &params(PI / 2.0, 2.0));
        assert!((f - 2f64.exp()).abs() < 1e-12);
        assert!(gauge_growth_factor(-11.6, 0.0, &params(PI / 2.0, 2.0)) > 1e10);
    }

    #[test]
    fn gauge_check_rejects_phase() {
        let g = Grid::new(-20.0, 20.0, 128).unwrap();
        let psi = gaussian(&g, 0.0, 2.0, 0.0);
        let err = gauge_transform_check(&PotentialSpec::Zero, &params(0.1, 1.0), &psi, 1.0);
        assert!(matches!(err, Err(Error::Contract(_))));
        let same = gauge_transform_check(&PotentialSpec::Zero, &params(0.0, 0.0), &psi, 1.0).unwrap();
        assert!(same < 1e-14);
    }

    #[test]
    fn absorber_validation_and_shape() {
        let g = Grid::new(-40.0, 40.0, 800).unwrap();
        assert!(Absorber { width: 25.0, strength: 1.0 }.mask(&g, 0.01).is_err());
        let mask = Absorber { width: 10.0, strength: 2.0 }.mask(&g, 0.01).unwrap();
        assert_eq!(mask[400], 1.0);
        assert!(mask[0] < mask[50] && mask[50] <= 1.0);
        assert!((mask[0] - (-0.02f64).exp()).abs() < 1e-4);
        let mut config = PropagatorConfig::new(0.01, 1.0);
        config.absorber = Some(Absorber { width: 30.0, strength: 1.0 });
        let psi = gaussian(&g, 0.0, 2.0, 0.0);
        assert!(matches!(evolve(&psi, &PotentialSpec::Zero, &params(0.0, 0.0), &config), Err(Error::Contract(_))));
    }

    #[test]
    fn divergence_is_reported() {
        // a strongly amplifying potential blows up quickly
        let g = Grid::new(-10.0, 10.0, 64).unwrap();
        let values = vec![Complex64::new(0.0, 500.0); 64];
        let spec = PotentialSpec::Tabulated(crate::potential::TabulatedPotential::from_grid(&g, values).unwrap());
        let psi = gaussian(&g, 0.0, 2.0, 0.0);
        let out = evolve_to(&psi, &spec, &params(0.0, 0.0), Frame::Moving, 0.01, 10.0);
        assert!(matches!(out, Err(Error::Divergence(_))));
    }

    #[test]
    fn translation_is_exact_for_band_limited_states() {
        let g = Grid::new(-20.0, 20.0, 256).unwrap();
        let psi = gaussian(&g, 0.0, 2.0, 1.5);
        let moved = translate(&psi, 3.3);
        let expected = gaussian(&g, -3.3, 2.0, 1.5);
        for (j, (a, b)) in moved.values().iter().zip(expected.values()).enumerate() {
            let phase = Complex64::new(0.0, 1.5 * 3.3).exp();
            assert!((a - b * phase).norm() < 1e-10, "{j}");
        }
    }

    #[test]
    fn ndjson_and_csv_layout() {
        let g = Grid::new(-10.0, 10.0, 32).unwrap();
        let psi = gaussian(&g, 0.0, 2.0, 0.0);
        let mut config = PropagatorConfig::new(0.01, 0.05);
        config.snapshot_every = 2;
        let rec = evolve(&psi, &PotentialSpec::Zero, &params(0.0, 0.0), &config).unwrap();
        assert_eq!(rec.snapshots.iter().map(|s| s.t).collect::<Vec<_>>().len(), 4);
        let mut buf = Vec::new();
        rec.write_ndjson(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_eq!(v["density"].as_array().unwrap().len(), 32);
        }
        let mut buf = Vec::new();
        rec.write_norm_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 7);
    }
}
