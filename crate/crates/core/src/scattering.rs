//! Reflection and transmission off drifting complex barriers, from the
//! stationary equation and from packet runs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, Grid, WaveFunction};
use crate::output::fmt_num;
use crate::params::AnyonicParams;
use crate::potential::PotentialSpec;
use crate::propagation::{evolve, EvolutionRecord, PropagatorConfig};
use crate::spectra::continuous_dispersion;

/// `|Im k_r|` above this marks the reflected channel as evanescent.
pub const EVANESCENT_TOL: f64 = 1e-9;
/// Reflected power fraction below this counts as reflectionless.
pub const REFLECTIONLESS_THRESHOLD: f64 = 0.01;
/// Potential magnitude treated as zero when choosing the integration range.
pub const SUPPORT_TOL: f64 = 1e-10;
/// Largest integration half-range tried before declaring the tail long-range.
pub const SUPPORT_LIMIT: f64 = 200.0;
/// RK4 step for the stationary shooting.
pub const RK4_STEP: f64 = 0.0025;

/// `k_r = -k + v e^{iφ}`, the second root of `Ẽ(q) = Ẽ(k)`.
pub fn reflected_wavenumber(k: f64, params: &AnyonicParams) -> Complex64 {
    Complex64::from_polar(params.v(), params.phi()) - k
}

/// `v_g = 2k cos φ - v`.
pub fn group_velocity(k: f64, params: &AnyonicParams) -> f64 {
    2.0 * k * params.phi().cos() - params.v()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtCoefficients {
    pub k: f64,
    pub r: Complex64,
    pub t: Complex64,
}

/// Integrates `H_eff u = Ẽ(k) u` from the transmitted side `x = +L₀`, where
/// `u = t e^{ikx}`, down to `x = -L₀` and splits the result onto
/// `{e^{ikx}, e^{ik_r x}}`.
pub fn stationary_rt(spec: &PotentialSpec, params: &AnyonicParams, k: f64) -> Result<RtCoefficients> {
    stationary_rt_with_step(spec, params, k, RK4_STEP)
}

pub fn stationary_rt_with_step(
    spec: &PotentialSpec,
    params: &AnyonicParams,
    k: f64,
    step: f64,
) -> Result<RtCoefficients> {
    spec.validate()?;
    if group_velocity(k, params) <= 0.0 {
        return Err(Error::Contract(format!(
            "incident wavenumber {k} has non-positive group velocity {}",
            group_velocity(k, params)
        )));
    }
    let kr = reflected_wavenumber(k, params);
    if (kr - k).norm() < 1e-6 {
        return Err(Error::Conditioning(format!(
            "incident and reflected wavenumbers nearly coincide (|k - k_r| = {:e})",
            (kr - k).norm()
        )));
    }
    let l0 = match spec {
        PotentialSpec::Zero => 1.0,
        _ => spec.support_radius(SUPPORT_TOL, SUPPORT_LIMIT)?,
    };
    let c = Complex64::from_polar(1.0, params.phi());
    let energy = continuous_dispersion(k, params);
    let drift = Complex64::i() * params.v() * c;
    let rhs = |x: f64, u: Complex64, du: Complex64| -> Result<(Complex64, Complex64)> {
        Ok((du, (spec.eval(x)? - c * energy) * u + drift * du))
    };

    let i = Complex64::i();
    let steps = (2.0 * l0 / step).ceil() as usize;
    let h = -2.0 * l0 / steps as f64;
    let mut x = l0;
    let mut u = (i * k * l0).exp();
    let mut du = i * k * u;
    for _ in 0..steps {
        let (a1, b1) = rhs(x, u, du)?;
        let (a2, b2) = rhs(x + 0.5 * h, u + 0.5 * h * a1, du + 0.5 * h * b1)?;
        let (a3, b3) = rhs(x + 0.5 * h, u + 0.5 * h * a2, du + 0.5 * h * b2)?;
        let (a4, b4) = rhs(x + h, u + h * a3, du + h * b3)?;
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        du += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        x += h;
    }
    let x = -l0;
    let e1 = (i * k * x).exp();
    let e2 = (i * kr * x).exp();
    // u = A e1 + B e2, u' = ik A e1 + i k_r B e2
    let det = e1 * e2 * i * (kr - k);
    let a = (u * i * kr * e2 - du * e2) / det;
    let b = (du * e1 - u * i * k * e1) / det;
    Ok(RtCoefficients {
        k,
        r: b / a,
        t: Complex64::new(1.0, 0.0) / a,
    })
}

/// Columns: `k, re_r, im_r, re_t, im_t`.
pub fn write_rt_csv(rows: &[RtCoefficients], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["k", "re_r", "im_r", "re_t", "im_t"])?;
    for row in rows {
        out.write_record([
            fmt_num(row.k),
            fmt_num(row.r.re),
            fmt_num(row.r.im),
            fmt_num(row.t.re),
            fmt_num(row.t.im),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Gaussian packet `exp[-(x-d)²/w² + ikx]`, normalized on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub d: f64,
    pub w: f64,
    pub k: f64,
}

impl PacketSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.w > 0.0 && self.w.is_finite()) || !self.d.is_finite() || !self.k.is_finite() {
            return Err(Error::Domain(format!("invalid packet {self:?}")));
        }
        if self.d - 3.0 * self.w < grid.x_min() || self.d + 3.0 * self.w > grid.x_max() {
            return Err(Error::Domain(format!(
                "packet support [{}, {}] leaves the grid [{}, {}]",
                self.d - 3.0 * self.w,
                self.d + 3.0 * self.w,
                grid.x_min(),
                grid.x_max()
            )));
        }
        Ok(())
    }

    pub fn wave(&self, grid: &Grid) -> Result<WaveFunction> {
        self.validate(grid)?;
        WaveFunction::from_fn(grid, |x| Complex64::new(-((x - self.d) / self.w).powi(2), self.k * x).exp())?
            .normalized()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringReport {
    pub phi: f64,
    pub v: f64,
    pub k_incident: f64,
    pub k_reflected: Complex64,
    pub reflected_power_fraction: f64,
    pub transmitted_power_fraction: f64,
    pub reflected_is_evanescent: bool,
    pub final_norm: f64,
}

impl ScatteringReport {
    pub const CSV_HEADER: [&'static str; 9] = [
        "phi",
        "v",
        "k_incident",
        "re_k_reflected",
        "im_k_reflected",
        "reflected_fraction",
        "transmitted_fraction",
        "reflected_is_evanescent",
        "final_norm",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            fmt_num(self.phi),
            fmt_num(self.v),
            fmt_num(self.k_incident),
            fmt_num(self.k_reflected.re),
            fmt_num(self.k_reflected.im),
            fmt_num(self.reflected_power_fraction),
            fmt_num(self.transmitted_power_fraction),
            self.reflected_is_evanescent.to_string(),
            fmt_num(self.final_norm),
        ]
    }

    pub fn is_reflectionless(&self) -> bool {
        self.reflected_power_fraction < REFLECTIONLESS_THRESHOLD
    }
}

/// Region power fractions `(incidence side, far side)` about `separatrix`,
/// plus each region's centroid.
fn partition(wave: &WaveFunction, separatrix: f64, incident_left: bool) -> (f64, f64, f64, f64) {
    let grid = wave.grid();
    let density = wave.density();
    let (mut near, mut far) = (vec![0.0; density.len()], vec![0.0; density.len()]);
    for (j, &p) in density.iter().enumerate() {
        let left = grid.x(j) < separatrix;
        if left == incident_left {
            near[j] = p;
        } else {
            far[j] = p;
        }
    }
    let weighted = |d: &[f64]| -> f64 {
        let moments: Vec<f64> = d.iter().enumerate().map(|(j, p)| grid.x(j) * p).collect();
        trapezoid(grid.dx(), &moments)
    };
    let pn = trapezoid(grid.dx(), &near);
    let pf = trapezoid(grid.dx(), &far);
    let cn = if pn > 0.0 { weighted(&near) / pn } else { separatrix };
    let cf = if pf > 0.0 { weighted(&far) / pf } else { separatrix };
    (pn, pf, cn, cf)
}

/// Region holding at least this fraction of the power must have left the
/// interaction zone for the run to count.
const CONCLUSIVE_POWER: f64 = 0.01;
const CLEARANCE_WIDTHS: f64 = 5.0;

/// Evolves the packet and splits the final power about the separatrix `x_b`.
/// The reflected region is the side the packet started on.
pub fn run_packet_scattering(
    spec: &PotentialSpec,
    params: &AnyonicParams,
    packet: &PacketSpec,
    grid: &Grid,
    config: &PropagatorConfig,
    separatrix: f64,
) -> Result<(ScatteringReport, EvolutionRecord)> {
    let psi0 = packet.wave(grid)?;
    if packet.d == separatrix {
        return Err(Error::Domain("packet must start off the separatrix".into()));
    }
    let incident_left = packet.d < separatrix;
    let record = evolve(&psi0, spec, params, config)?;
    let (reflected, transmitted, c_ref, c_tr) = partition(record.final_state(), separatrix, incident_left);
    let total = reflected + transmitted;
    if !(total > 0.0) {
        return Err(Error::Divergence("packet power vanished".into()));
    }
    let clearance = CLEARANCE_WIDTHS * packet.w;
    for (power, centroid, name) in [(reflected, c_ref, "reflected"), (transmitted, c_tr, "transmitted")] {
        if power / total >= CONCLUSIVE_POWER && (centroid - separatrix).abs() < clearance {
            return Err(Error::Inconclusive(format!(
                "{name} packet centroid {centroid:.3} still within {clearance} of the barrier at t = {}",
                record.final_time()
            )));
        }
    }
    let kr = reflected_wavenumber(packet.k, params);
    let report = ScatteringReport {
        phi: params.phi(),
        v: params.v(),
        k_incident: packet.k,
        k_reflected: kr,
        reflected_power_fraction: reflected / total,
        transmitted_power_fraction: transmitted / total,
        reflected_is_evanescent: kr.im.abs() > EVANESCENT_TOL,
        final_norm: total,
    };
    Ok((report, record))
}
