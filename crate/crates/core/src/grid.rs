//! Uniform cell-centred grids and sampled wave functions.
//!
//! Sample `j` sits at `x_min + (j + 1/2) dx` with `dx = (x_max - x_min) / n`.
//! The same samples serve as an FFT period of length `x_max - x_min` and,
//! on a box symmetric about zero, index reversal is exactly `x -> -x`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFields")]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

#[derive(Deserialize)]
struct GridFields {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl TryFrom<GridFields> for Grid {
    type Error = Error;

    fn try_from(f: GridFields) -> Result<Self> {
        Grid::new(f.x_min, f.x_max, f.n_points)
    }
}

impl Default for Grid {
    /// `[-40, 40]` with 2048 points.
    fn default() -> Self {
        Grid {
            x_min: -40.0,
            x_max: 40.0,
            n_points: 2048,
        }
    }
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::Domain(format!(
                "grid bounds must satisfy x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::Domain(format!(
                "grid needs at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Grid {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Symmetric box `[-half_width, half_width]` with spacing as close to
    /// `dx` as an integer point count allows.
    pub fn symmetric_with_spacing(half_width: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Domain(format!("spacing must be positive, got {dx}")));
        }
        let n = (2.0 * half_width / dx).round().max(MIN_POINTS as f64) as usize;
        Grid::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Whether `x -> -x` maps the sample set onto itself.
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.length()
    }

    /// Angular wavenumbers in FFT order (0, 1, ..., n/2-1, -n/2, ..., -1) * 2π/L.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points as i64;
        let dk = 2.0 * PI / self.length();
        (0..n)
            .map(|j| if j < (n + 1) / 2 { j } else { j - n } as f64 * dk)
            .collect()
    }

    /// Index of the sample nearest to `x` (clamped to the grid).
    pub fn index_of(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx() - 0.5).round();
        j.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Wraps `x` into `[x_min, x_max)` treating the box as one period.
    pub fn wrap(&self, x: f64) -> f64 {
        self.x_min + (x - self.x_min).rem_euclid(self.length())
    }
}

/// Trapezoidal rule over uniformly spaced samples.
pub fn trapezoid(dx: f64, samples: &[f64]) -> f64 {
    match samples {
        [] => 0.0,
        [only] => only * dx,
        [first, .., last] => dx * (samples.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

pub fn trapezoid_complex(dx: f64, samples: &[Complex64]) -> Complex64 {
    match samples {
        [] => Complex64::new(0.0, 0.0),
        [only] => only * dx,
        [first, .., last] => dx * (samples.iter().sum::<Complex64>() - 0.5 * (first + last)),
    }
}

/// A complex field sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "wave function has {} samples but the grid has {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("wave function has non-finite samples".into()));
        }
        Ok(WaveFunction { grid, values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        WaveFunction::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `∫|ψ|² dx` by the trapezoidal rule.
    pub fn norm_sqr(&self) -> f64 {
        trapezoid(self.grid.dx(), &self.density())
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Domain(format!("cannot normalize a state with norm {n}")));
        }
        let s = 1.0 / n.sqrt();
        Ok(WaveFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z * s).collect(),
        })
    }

    /// Unconjugated `∫ψ² dx`.
    pub fn square_integral(&self) -> Complex64 {
        let sq: Vec<Complex64> = self.values.iter().map(|z| z * z).collect();
        trapezoid_complex(self.grid.dx(), &sq)
    }

    /// `⟨self|other⟩ = ∫ self* other dx`.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Contract("inner product of fields on different grids".into()));
        }
        let prod: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(trapezoid_complex(self.grid.dx(), &prod))
    }

    /// Participation ratio `(∫|ψ|²)² / ∫|ψ|⁴`, a length.
    pub fn participation_ratio(&self) -> f64 {
        let rho = self.density();
        let quartic: Vec<f64> = rho.iter().map(|p| p * p).collect();
        let dx = self.grid.dx();
        let n2 = trapezoid(dx, &rho);
        n2 * n2 / trapezoid(dx, &quartic)
    }

    /// Position of the density maximum.
    pub fn peak_position(&self) -> f64 {
        let (j, _) = self
            .values
            .iter()
            .map(|z| z.norm_sqr())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, p)| if p > best.1 { (j, p) } else { best });
        self.grid.x(j)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &z)| f(self.grid.x(j), z))
            .collect();
        WaveFunction {
            grid: self.grid.clone(),
            values,
        }
    }
}
