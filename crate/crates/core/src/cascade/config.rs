//! Flat `key = value` model configuration files.
//!
//! ```text
//! # reference dot
//! delta_uev = 29
//! tau_h_ps = 1180
//! tau_v_ps = 990
//! g_rate_per_ps = 1.25e-4
//! n_max = 5
//! dtheta_pi = 0.10
//! dphi_pi = 0.02
//! irf_fwhm_ps = 42
//! herald_conjugate = true
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and repeated
//! keys are rejected. The first four keys are required.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::model::{CascadeParams, DEFAULT_N_MAX};
use super::polarization::FrameOffsets;
use crate::error::{Error, Result};

pub const DEFAULT_IRF_FWHM_PS: f64 = 42.0;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub delta_uev: f64,
    pub tau_h_ps: f64,
    pub tau_v_ps: f64,
    pub g_rate_per_ps: f64,
    pub n_max: usize,
    /// Δθ/π.
    pub dtheta_pi: f64,
    /// Δφ/π.
    pub dphi_pi: f64,
    pub irf_fwhm_ps: f64,
    pub herald_conjugate: bool,
}

impl ModelConfig {
    pub fn reference() -> Self {
        let p = CascadeParams::reference();
        Self {
            delta_uev: p.delta_uev,
            tau_h_ps: p.tau_h_ps,
            tau_v_ps: p.tau_v_ps,
            g_rate_per_ps: p.g_rate,
            n_max: p.n_max,
            dtheta_pi: 0.10,
            dphi_pi: 0.02,
            irf_fwhm_ps: DEFAULT_IRF_FWHM_PS,
            herald_conjugate: true,
        }
    }

    pub fn params(&self) -> CascadeParams {
        CascadeParams::new(
            self.delta_uev,
            self.tau_h_ps,
            self.tau_v_ps,
            self.g_rate_per_ps,
            self.n_max,
        )
    }

    pub fn offsets(&self) -> FrameOffsets {
        FrameOffsets::from_pi_units(self.dtheta_pi, self.dphi_pi)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        text.parse()
    }

    /// Serialize in the same format, keys in canonical order.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "delta_uev = {}", self.delta_uev);
        let _ = writeln!(s, "tau_h_ps = {}", self.tau_h_ps);
        let _ = writeln!(s, "tau_v_ps = {}", self.tau_v_ps);
        let _ = writeln!(s, "g_rate_per_ps = {:e}", self.g_rate_per_ps);
        let _ = writeln!(s, "n_max = {}", self.n_max);
        let _ = writeln!(s, "dtheta_pi = {}", self.dtheta_pi);
        let _ = writeln!(s, "dphi_pi = {}", self.dphi_pi);
        let _ = writeln!(s, "irf_fwhm_ps = {}", self.irf_fwhm_ps);
        let _ = writeln!(s, "herald_conjugate = {}", self.herald_conjugate);
        s
    }
}

impl FromStr for ModelConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut delta = None;
        let mut tau_h = None;
        let mut tau_v = None;
        let mut g_rate = None;
        let mut n_max = None;
        let mut dtheta = None;
        let mut dphi = None;
        let mut irf = None;
        let mut conjugate = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                location: format!("line {}", lineno + 1),
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let real = || {
                value
                    .parse::<f64>()
                    .map_err(|_| err(format!("'{key}' expects a number, got '{value}'")))
            };
            let slot_taken = || err(format!("duplicate key '{key}'"));
            match key {
                "delta_uev" => set_once(&mut delta, real()?).ok_or_else(slot_taken)?,
                "tau_h_ps" => set_once(&mut tau_h, real()?).ok_or_else(slot_taken)?,
                "tau_v_ps" => set_once(&mut tau_v, real()?).ok_or_else(slot_taken)?,
                "g_rate_per_ps" => set_once(&mut g_rate, real()?).ok_or_else(slot_taken)?,
                "dtheta_pi" => set_once(&mut dtheta, real()?).ok_or_else(slot_taken)?,
                "dphi_pi" => set_once(&mut dphi, real()?).ok_or_else(slot_taken)?,
                "irf_fwhm_ps" => set_once(&mut irf, real()?).ok_or_else(slot_taken)?,
                "n_max" => {
                    let n = value
                        .parse::<usize>()
                        .map_err(|_| err(format!("'n_max' expects an integer, got '{value}'")))?;
                    set_once(&mut n_max, n).ok_or_else(slot_taken)?
                }
                "herald_conjugate" => {
                    let b = value
                        .parse::<bool>()
                        .map_err(|_| err(format!("'herald_conjugate' expects true or false, got '{value}'")))?;
                    set_once(&mut conjugate, b).ok_or_else(slot_taken)?
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }

        let required = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Config(format!("missing required key '{name}'")))
        };
        Ok(Self {
            delta_uev: required(delta, "delta_uev")?,
            tau_h_ps: required(tau_h, "tau_h_ps")?,
            tau_v_ps: required(tau_v, "tau_v_ps")?,
            g_rate_per_ps: required(g_rate, "g_rate_per_ps")?,
            n_max: n_max.unwrap_or(DEFAULT_N_MAX),
            dtheta_pi: dtheta.unwrap_or(0.0),
            dphi_pi: dphi.unwrap_or(0.0),
            irf_fwhm_ps: irf.unwrap_or(DEFAULT_IRF_FWHM_PS),
            herald_conjugate: conjugate.unwrap_or(true),
        })
    }
}

fn set_once<T>(slot: &mut Option<T>, value: T) -> Option<()> {
    if slot.is_some() {
        return None;
    }
    *slot = Some(value);
    Some(())
}
