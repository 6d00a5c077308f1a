//! Physical constants.
//!
//! Model dynamics use μeV for energies and ps for times, so the reduced Planck
//! constant is carried in μeV·ps. The SI values are only needed by the
//! radiative-lifetime estimates in [`crate::cascade::lifetime`].

/// ħ in μeV·ps.
pub const HBAR_UEV_PS: f64 = 658.211_956_9;

/// h·c in eV·nm.
pub const HC_EV_NM: f64 = 1_239.842_0;

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reduced Planck constant, J·s.
pub const HBAR_SI: f64 = 1.054_571_817e-34;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
