//! Numerics for drifting non-Hermitian Schrödinger operators with an anyonic
//! phase: spectra, time evolution, packet scattering and transient gain.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod grid;
pub mod hamiltonian;
pub mod laser;
pub mod linalg;
pub mod nonnormal;
pub mod output;
pub mod params;
pub mod potential;
pub mod propagation;
pub mod scattering;
pub mod spectra;

pub use error::{Error, Result};
pub use grid::{Grid, WaveFunction};
pub use hamiltonian::{build_h_eff, Boundary, HamiltonianMatrix};
pub use params::{AnyonicParams, GaugeFactors};
pub use potential::{PotentialSpec, TabulatedPotential};
