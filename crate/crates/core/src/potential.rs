//! Short-range complex potentials.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

const POLE_GUARD: f64 = 1e-12;

/// Complex potential in the moving frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// Well `-ν(ν+1) / cosh²(x - iδ)`.
    PoschlTeller { nu: f64, delta: f64 },
    /// `v0 / cosh²(x - iδ)`; a barrier for `v0 > 0`.
    Barrier { v0: f64, delta: f64 },
    /// Samples linearly interpolated between nodes and zero outside them.
    Tabulated(TabulatedPotential),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPotential {
    x: Vec<f64>,
    values: Vec<Complex64>,
}

impl TabulatedPotential {
    pub fn new(x: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if x.len() != values.len() || x.len() < 2 {
            return Err(Error::Domain(
                "tabulated potential needs at least two (x, V) pairs of equal length".into(),
            ));
        }
        if x.iter().any(|v| !v.is_finite())
            || values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::Domain("tabulated potential has non-finite entries".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("tabulated abscissae must be strictly increasing".into()));
        }
        Ok(TabulatedPotential { x, values })
    }

    /// Samples `V` at the points of `grid`.
    pub fn from_grid(grid: &Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        TabulatedPotential::new(grid.points(), values)
    }

    /// Reads a three-column CSV `x, re, im` with a header row.
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut x = Vec::new();
        let mut values = Vec::new();
        for record in rdr.deserialize() {
            let (xi, re, im): (f64, f64, f64) = record?;
            x.push(xi);
            values.push(Complex64::new(re, im));
        }
        TabulatedPotential::new(x, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        TabulatedPotential::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn eval(&self, x: f64) -> Complex64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let hi = self.x.partition_point(|&xi| xi < x).clamp(1, n - 1);
        let (x0, x1) = (self.x[hi - 1], self.x[hi]);
        let w = (x - x0) / (x1 - x0);
        self.values[hi - 1] * (1.0 - w) + self.values[hi] * w
    }
}

/// `cosh(x - iδ)` for real `x`, `δ`, written out to avoid complex exponentials.
fn cosh_shifted(x: f64, delta: f64) -> Complex64 {
    Complex64::new(x.cosh() * delta.cos(), -x.sinh() * delta.sin())
}

fn sech2_shifted(amplitude: f64, delta: f64, x: f64) -> Result<Complex64> {
    // cosh² overflows near |x| ~ 355; the potential is zero to working precision there
    if x.abs() > 350.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let c = cosh_shifted(x, delta);
    if c.norm() < POLE_GUARD {
        return Err(Error::Domain(format!(
            "potential pole at x = {x} (delta = {delta})"
        )));
    }
    Ok(amplitude / (c * c))
}

impl PotentialSpec {
    pub fn poschl_teller(nu: f64, delta: f64) -> Result<Self> {
        let spec = PotentialSpec::PoschlTeller { nu, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn barrier(v0: f64, delta: f64) -> Result<Self> {
        let spec = PotentialSpec::Barrier { v0, delta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let check_delta = |delta: f64| {
            if !(delta.abs() < FRAC_PI_2) {
                return Err(Error::Domain(format!(
                    "complex shift must satisfy |delta| < π/2, got {delta}"
                )));
            }
            Ok(())
        };
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::PoschlTeller { nu, delta } => {
                if !(*nu > 0.0 && nu.is_finite()) {
                    return Err(Error::Domain(format!("nu must be positive, got {nu}")));
                }
                check_delta(*delta)
            }
            PotentialSpec::Barrier { v0, delta } => {
                if !v0.is_finite() {
                    return Err(Error::Domain(format!("v0 must be finite, got {v0}")));
                }
                check_delta(*delta)
            }
            PotentialSpec::Tabulated(t) => TabulatedPotential::new(t.x.clone(), t.values.clone()).map(|_| ()),
        }
    }

    /// Amplitude and shift of the sech² family, if this is one.
    pub fn sech2_parameters(&self) -> Option<(f64, f64)> {
        match *self {
            PotentialSpec::PoschlTeller { nu, delta } => Some((-nu * (nu + 1.0), delta)),
            PotentialSpec::Barrier { v0, delta } => Some((v0, delta)),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("cannot evaluate the potential at x = {x}")));
        }
        match self {
            PotentialSpec::Zero => Ok(Complex64::new(0.0, 0.0)),
            PotentialSpec::PoschlTeller { .. } | PotentialSpec::Barrier { .. } => {
                let (amp, delta) = self.sech2_parameters().expect("sech² family");
                sech2_shifted(amp, delta, x)
            }
            PotentialSpec::Tabulated(t) => Ok(t.eval(x)),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Vec<Complex64>> {
        grid.points().into_iter().map(|x| self.eval(x)).collect()
    }

    /// Smallest `L` (on a 0.25 lattice, at most `limit`) with `|V(x)| < tol` for all `|x| >= L`.
    pub fn support_radius(&self, tol: f64, limit: f64) -> Result<f64> {
        if let PotentialSpec::Tabulated(t) = self {
            // outside the table the potential is zero by construction
            let mut radius = 0.0_f64;
            for (x, v) in t.x.iter().zip(&t.values) {
                if v.norm() >= tol {
                    radius = radius.max(x.abs());
                }
            }
            return Ok(radius + 0.25);
        }
        let step = 0.25;
        let mut x = limit;
        if self.eval(x)?.norm() >= tol || self.eval(-x)?.norm() >= tol {
            return Err(Error::Contract(format!(
                "potential tail |V| >= {tol:e} at |x| = {limit}; not short-range"
            )));
        }
        while x > 0.0 {
            let next = x - step;
            if self.eval(next)?.norm() >= tol || self.eval(-next)?.norm() >= tol {
                return Ok(x);
            }
            x = next;
        }
        Ok(step)
    }
}

/// Whether `max |V(-x) - V*(x)| < tol` over the grid samples.
pub fn check_pt_condition(spec: &PotentialSpec, grid: &Grid, tol: f64) -> Result<bool> {
    Ok(pt_defect(spec, grid)? < tol)
}

/// `max_j |V(-x_j) - V*(x_j)|`.
pub fn pt_defect(spec: &PotentialSpec, grid: &Grid) -> Result<f64> {
    if !grid.is_symmetric() {
        return Err(Error::Contract(format!(
            "PT check needs a grid symmetric about 0, got [{}, {}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let samples = spec.sample(grid)?;
    let n = samples.len();
    Ok((0..n)
        .map(|j| (samples[n - 1 - j] - samples[j].conj()).norm())
        .fold(0.0, f64::max))
}
