//! Order-of-magnitude estimates of the exciton radiative lifetime.

use std::f64::consts::PI;

use crate::constants::{
    ELECTRON_CHARGE, ELECTRON_MASS, HBAR_SI, HC_EV_NM, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY,
};
use crate::error::{invalid, Result};

/// Inputs of the spherical-dot and nanowire lifetime estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct LifetimeInputs {
    /// Exciton energy, eV.
    pub e_ex_ev: f64,
    /// Refractive index of the host material.
    pub n_m: f64,
    /// Oscillator strength (electron-hole envelope overlap).
    pub f: f64,
    /// Nanowire diameter, nm.
    pub d_w_nm: f64,
    /// Photon wavelength inside the material, nm. Derived from the exciton
    /// energy and index when absent.
    pub lambda_m_nm: Option<f64>,
}

impl LifetimeInputs {
    /// InAsP dot in an InP nanowire.
    pub fn reference() -> Self {
        Self {
            e_ex_ev: 1.283,
            n_m: 3.12,
            f: 1.0,
            d_w_nm: 200.0,
            lambda_m_nm: None,
        }
    }

    pub fn lambda_m_nm(&self) -> f64 {
        self.lambda_m_nm
            .unwrap_or_else(|| wavelength_in_matter(self.e_ex_ev, self.n_m))
    }
}

/// `λ_m = h c / (E n)`, nm.
pub fn wavelength_in_matter(e_ex_ev: f64, n_m: f64) -> f64 {
    HC_EV_NM / (e_ex_ev * n_m)
}

/// Radiative lifetime of a spherical dot in ns:
/// `1/τ_r = 4 e² k₀² f / (n_m m₀ c)` with `k₀ = n_m E_ex / (ħ c)`.
///
/// The expression is written in Gaussian units; in SI the charge enters as
/// `e²/(4π ε₀)`.
pub fn spherical_dot_lifetime(inp: &LifetimeInputs) -> Result<f64> {
    for (name, v) in [("exciton energy", inp.e_ex_ev), ("refractive index", inp.n_m)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("{name} must be > 0, got {v}")));
        }
    }
    if !(inp.f.is_finite() && inp.f > 0.0) {
        return Err(invalid(format!("oscillator strength must be > 0, got {}", inp.f)));
    }
    let energy_j = inp.e_ex_ev * ELECTRON_CHARGE;
    let k0 = inp.n_m * energy_j / (HBAR_SI * SPEED_OF_LIGHT);
    let e2 = ELECTRON_CHARGE * ELECTRON_CHARGE / (4.0 * PI * VACUUM_PERMITTIVITY);
    let rate = 4.0 * e2 * k0 * k0 * inp.f / (inp.n_m * ELECTRON_MASS * SPEED_OF_LIGHT);
    Ok(1e9 / rate)
}

/// Lifetime shortened by a sub-wavelength nanowire, `τ_x = τ_r (d_w/λ_m)²`.
pub fn nanowire_lifetime(tau_r_ns: f64, d_w_nm: f64, lambda_m_nm: f64) -> f64 {
    let ratio = d_w_nm / lambda_m_nm;
    tau_r_ns * ratio * ratio
}
