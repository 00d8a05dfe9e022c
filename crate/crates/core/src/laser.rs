//! Cavity parameters of an actively mode-locked laser expressed as anyonic
//! phase and drift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt_num;
use crate::params::AnyonicParams;
use crate::spectra::critical_velocity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Group-velocity dispersion.
    pub d: f64,
    /// Spectral filtering (gain bandwidth), non-negative.
    pub dg: f64,
    /// Phase (FM) modulation amplitude.
    pub delta1: f64,
    /// Amplitude (AM) modulation amplitude.
    pub delta2: f64,
    /// Saturated gain.
    pub g: f64,
    /// Loss.
    pub l: f64,
    /// Modulation period.
    pub tm: f64,
    /// Round-trip time.
    pub tr: f64,
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.d, self.dg, self.delta1, self.delta2, self.g, self.l, self.tm, self.tr];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite cavity parameter in {self:?}")));
        }
        if !(self.tr > 0.0) || !(self.tm > 0.0) {
            return Err(Error::Domain(format!(
                "round-trip time and modulation period must be positive, got tr = {}, tm = {}",
                self.tr, self.tm
            )));
        }
        if self.dg < 0.0 {
            return Err(Error::Domain(format!("spectral filtering must be non-negative, got {}", self.dg)));
        }
        if self.d == 0.0 {
            return Err(Error::Domain("degenerate dispersion: D = 0 leaves the phase undefined".into()));
        }
        if self.d < 0.0 && self.dg > 0.0 {
            return Err(Error::Domain(format!(
                "anomalous dispersion D = {} with filtering puts the phase outside [0, π/2]",
                self.d
            )));
        }
        if self.delta1 == 0.0 && self.delta2 != 0.0 {
            return Err(Error::Domain(
                "modulator tuning undefined: amplitude modulation without phase modulation".into(),
            ));
        }
        Ok(())
    }

    /// `1 - Tm/TR`.
    pub fn detuning(&self) -> f64 {
        1.0 - self.tm / self.tr
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserMapping {
    pub params: AnyonicParams,
    /// `|g - l| < tol`.
    pub valid_gain_balance: bool,
    /// `|Δ₂/Δ₁ - Dg/D| < tol`.
    pub valid_modulator_tuning: bool,
    /// `√(D² + Dg²)/TR`: the master-equation kinetic coefficient is
    /// `-kinetic_scale·e^{-iφ}`, i.e. `(-D + iDg)/TR`.
    pub kinetic_scale: f64,
}

/// `φ = atan(Dg/D)`, `v = 1 - Tm/TR`, with the two validity conditions.
pub fn map_to_anyonic(c: &CavityParams, tol: f64) -> Result<LaserMapping> {
    c.validate()?;
    let phi = (c.dg / c.d).atan().abs();
    let params = AnyonicParams::new(phi, c.detuning())?;
    let ratio = if c.delta1 == 0.0 { 0.0 } else { c.delta2 / c.delta1 };
    Ok(LaserMapping {
        params,
        valid_gain_balance: (c.g - c.l).abs() < tol,
        valid_modulator_tuning: (ratio - c.dg / c.d).abs() < tol,
        kinetic_scale: c.d.hypot(c.dg) / c.tr,
    })
}

/// Detuning `|1 - Tm/TR|` at which the drift reaches the critical velocity of
/// the well's bound state `E1`; `None` when the mapped phase is zero.
pub fn mode_locking_threshold(c: &CavityParams, well_depth_e1: f64) -> Result<Option<f64>> {
    let mapping = map_to_anyonic(c, f64::INFINITY)?;
    critical_velocity(well_depth_e1, mapping.params.phi())
}

impl LaserMapping {
    pub const CSV_HEADER: [&'static str; 5] =
        ["phi", "v", "valid_gain_balance", "valid_modulator_tuning", "threshold"];

    /// One report row; an absent threshold is written as `inf`.
    pub fn csv_record(&self, threshold: Option<f64>) -> Vec<String> {
        vec![
            fmt_num(self.params.phi()),
            fmt_num(self.params.v()),
            self.valid_gain_balance.to_string(),
            self.valid_modulator_tuning.to_string(),
            threshold.map(fmt_num).unwrap_or_else(|| "inf".to_string()),
        ]
    }
}
