//! Finite-difference discretization of the moving-frame operator
//! `H_eff = -e^{-iφ}∂² + e^{-iφ}V(x) + iv∂`.
//!
//! Both derivatives use second-order central differences, so the matrix is
//! tridiagonal (plus two corner entries for periodic boundaries). The
//! stationary part and the drift part are kept apart because they transform
//! differently under PT.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::AnyonicParams;
use crate::potential::PotentialSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

impl Boundary {
    /// Dirichlet for a static potential, periodic once the potential drifts.
    ///
    /// A Dirichlet box turns the drift term into an imaginary gauge field:
    /// the box spectrum then ignores `v` and is exponentially ill-conditioned.
    pub fn default_for(params: &AnyonicParams) -> Self {
        if params.v() == 0.0 {
            Boundary::Dirichlet
        } else {
            Boundary::Periodic
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    grid: Grid,
    boundary: Boundary,
    params: AnyonicParams,
    potential: Vec<Complex64>,
    diagonal: Vec<Complex64>,
    kinetic: Complex64,
    drift: Complex64,
}

pub fn build_h_eff(
    spec: &PotentialSpec,
    params: &AnyonicParams,
    grid: &Grid,
    boundary: Boundary,
) -> Result<HamiltonianMatrix> {
    let potential = spec.sample(grid)?;
    Ok(HamiltonianMatrix::from_samples(grid, potential, params, boundary))
}

impl HamiltonianMatrix {
    pub fn from_samples(
        grid: &Grid,
        potential: Vec<Complex64>,
        params: &AnyonicParams,
        boundary: Boundary,
    ) -> Self {
        let dx = grid.dx();
        let rot = params.rotation();
        let inv_dx2 = 1.0 / (dx * dx);
        let diagonal = potential.iter().map(|v| rot * (v + 2.0 * inv_dx2)).collect();
        HamiltonianMatrix {
            grid: grid.clone(),
            boundary,
            params: *params,
            potential,
            diagonal,
            kinetic: -rot * inv_dx2,
            drift: Complex64::new(0.0, params.v() / (2.0 * dx)),
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn params(&self) -> &AnyonicParams {
        &self.params
    }

    /// Potential samples `V(x_j)` (before the phase rotation).
    pub fn potential(&self) -> &[Complex64] {
        &self.potential
    }

    /// Diagonal of the stationary part, `e^{-iφ}(2/dx² + V_j)`.
    pub fn diagonal(&self) -> &[Complex64] {
        &self.diagonal
    }

    /// Off-diagonal weight of the second difference, `-e^{-iφ}/dx²`.
    pub fn kinetic(&self) -> Complex64 {
        self.kinetic
    }

    /// Weight of the central first difference, `iv/(2dx)`; enters `+` above and `-` below the diagonal.
    pub fn drift(&self) -> Complex64 {
        self.drift
    }

    pub fn superdiagonal(&self) -> Complex64 {
        self.kinetic + self.drift
    }

    pub fn subdiagonal(&self) -> Complex64 {
        self.kinetic - self.drift
    }

    fn neighbours(&self, j: usize) -> (Option<usize>, Option<usize>) {
        let n = self.dim();
        match self.boundary {
            Boundary::Dirichlet => ((j > 0).then(|| j - 1), (j + 1 < n).then(|| j + 1)),
            Boundary::Periodic => (Some((j + n - 1) % n), Some((j + 1) % n)),
        }
    }

    fn fill_dense(&self, diag: &[Complex64], upper: Complex64, lower: Complex64) -> Array2<Complex64> {
        let n = self.dim();
        let mut m = Array2::zeros((n, n));
        for j in 0..n {
            m[[j, j]] += diag[j];
            let (left, right) = self.neighbours(j);
            if let Some(l) = left {
                m[[j, l]] += lower;
            }
            if let Some(r) = right {
                m[[j, r]] += upper;
            }
        }
        m
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        self.fill_dense(&self.diagonal, self.superdiagonal(), self.subdiagonal())
    }

    /// `e^{-iφ}(-∂² + V)` alone.
    pub fn stationary_dense(&self) -> Array2<Complex64> {
        self.fill_dense(&self.diagonal, self.kinetic, self.kinetic)
    }

    /// `iv∂` alone.
    pub fn drift_dense(&self) -> Array2<Complex64> {
        let zeros = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.fill_dense(&zeros, self.drift, -self.drift)
    }

    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_with(psi, &self.diagonal, self.superdiagonal(), self.subdiagonal())
    }

    /// Action of the conjugate transpose.
    pub fn apply_adjoint(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let diag: Vec<Complex64> = self.diagonal.iter().map(|z| z.conj()).collect();
        // (H*)_{j,j+1} = conj(H_{j+1,j})
        self.apply_with(psi, &diag, self.subdiagonal().conj(), self.superdiagonal().conj())
    }

    fn apply_with(
        &self,
        psi: &[Complex64],
        diag: &[Complex64],
        upper: Complex64,
        lower: Complex64,
    ) -> Result<Vec<Complex64>> {
        if psi.len() != self.dim() {
            return Err(Error::Contract(format!(
                "vector of length {} for a {}-dimensional operator",
                psi.len(),
                self.dim()
            )));
        }
        Ok((0..self.dim())
            .map(|j| {
                let (left, right) = self.neighbours(j);
                let mut acc = diag[j] * psi[j];
                if let Some(l) = left {
                    acc += lower * psi[l];
                }
                if let Some(r) = right {
                    acc += upper * psi[r];
                }
                acc
            })
            .collect())
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let off = self.superdiagonal().norm() + self.subdiagonal().norm();
        self.diagonal.iter().map(|d| d.norm() + off).fold(0.0, f64::max)
    }
}

/// How far each part of `H` is from its expected behaviour under `PK`
/// (`P` = index reversal, `K` = complex conjugation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnyonicResidual {
    /// `max |(PK)H_s(PK) - e^{2iφ}H_s|` over the stationary part.
    pub stationary: f64,
    /// `max |(PK)H_d(PK) - H_d|` over the drift part, which is PT-even.
    pub drift: f64,
}

pub fn anyonic_symmetry_residual(h: &HamiltonianMatrix, phi: f64) -> Result<AnyonicResidual> {
    if !h.grid.is_symmetric() {
        return Err(Error::Contract("anyonic symmetry check needs a grid symmetric about 0".into()));
    }
    let n = h.dim();
    let twist = Complex64::from_polar(1.0, 2.0 * phi);
    // (PK A PK)_{ij} = conj(A_{n-1-i, n-1-j}); the banded structure maps onto itself,
    // so it is enough to compare the stored coefficients.
    let diag = (0..n)
        .map(|j| (h.diagonal[n - 1 - j].conj() - twist * h.diagonal[j]).norm())
        .fold(0.0, f64::max);
    let kinetic = (h.kinetic.conj() - twist * h.kinetic).norm();
    // the super-diagonal slot of PK D PK holds conj of the sub-diagonal entry, -drift
    let drift = ((-h.drift).conj() - h.drift).norm();
    Ok(AnyonicResidual {
        stationary: diag.max(kinetic),
        drift,
    })
}

/// Checks `(PK)H_s(PK) = e^{2iφ}H_s` for the stationary part and PT-evenness
/// of the drift part.
pub fn check_anyonic_symmetry(h: &HamiltonianMatrix, phi: f64, tol: f64) -> Result<bool> {
    let r = anyonic_symmetry_residual(h, phi)?;
    Ok(r.stationary < tol && r.drift < tol)
}
