use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Anyonic phase `phi` and drift velocity `v` of the moving-frame operator
/// `-e^{-iφ}∂² + e^{-iφ}V(x) + iv∂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamFields")]
pub struct AnyonicParams {
    phi: f64,
    v: f64,
}

#[derive(Deserialize)]
struct ParamFields {
    phi: f64,
    v: f64,
}

impl TryFrom<ParamFields> for AnyonicParams {
    type Error = Error;

    fn try_from(f: ParamFields) -> Result<Self> {
        AnyonicParams::new(f.phi, f.v)
    }
}

impl AnyonicParams {
    pub fn new(phi: f64, v: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&phi) {
            return Err(Error::Domain(format!(
                "anyonic phase must lie in [0, π/2], got {phi}"
            )));
        }
        if !v.is_finite() {
            return Err(Error::Domain(format!("drift velocity must be finite, got {v}")));
        }
        Ok(AnyonicParams { phi, v })
    }

    /// Hermitian (or plain PT) limit: no phase, no drift.
    pub fn hermitian() -> Self {
        AnyonicParams { phi: 0.0, v: 0.0 }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn with_v(&self, v: f64) -> Result<Self> {
        AnyonicParams::new(self.phi, v)
    }

    /// `e^{-iφ}`, the factor multiplying the stationary Hamiltonian.
    pub fn rotation(&self) -> Complex64 {
        Complex64::from_polar(1.0, -self.phi)
    }

    pub fn gauge(&self) -> GaugeFactors {
        GaugeFactors::from_params(self)
    }
}

/// Coefficients of the gauge map `ψ = φ exp(iαx - iβt)` that removes the drift term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeFactors {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl GaugeFactors {
    pub fn from_params(p: &AnyonicParams) -> Self {
        let e = Complex64::from_polar(1.0, p.phi);
        GaugeFactors {
            alpha: e * (p.v / 2.0),
            beta: e * (-p.v * p.v / 4.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phase_range_is_enforced() {
        assert!(AnyonicParams::new(-0.1, 0.0).is_err());
        assert!(AnyonicParams::new(PI / 2.0 + 1e-9, 0.0).is_err());
        assert!(AnyonicParams::new(0.0, f64::NAN).is_err());
        assert!(AnyonicParams::new(PI / 2.0, -3.0).is_ok());
    }

    #[test]
    fn gauge_factors_from_drift() {
        let p = AnyonicParams::new(PI / 3.0, 2.0).unwrap();
        let g = p.gauge();
        let e = Complex64::from_polar(1.0, PI / 3.0);
        assert!((g.alpha - e).norm() < 1e-15);
        assert!((g.beta + e).norm() < 1e-15);
        assert_eq!(AnyonicParams::hermitian().gauge().alpha, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn deserialization_validates() {
        let bad: std::result::Result<AnyonicParams, _> =
            serde_json::from_str(r#"{"phi": 2.0, "v": 0.0}"#);
        assert!(bad.is_err());
        let ok: AnyonicParams = serde_json::from_str(r#"{"phi": 0.5, "v": -1.0}"#).unwrap();
        assert_eq!(ok.v(), -1.0);
    }
}
