//! The biexciton-exciton cascade: ladder model, polarization conventions and
//! heralding.

mod config;
pub mod lifetime;
mod model;
mod polarization;

pub use config::{ModelConfig, DEFAULT_IRF_FWHM_PS};
pub use lifetime::{nanowire_lifetime, spherical_dot_lifetime, wavelength_in_matter, LifetimeInputs};
pub use model::{
    build_model, multiexciton_lifetime, CascadeModel, CascadeParams, DEFAULT_N_MAX,
    TRUNCATION_OCCUPANCY_LIMIT,
};
pub use polarization::{
    canonical_polarization, detection_angles, exciton_amplitudes, exciton_projector,
    herald_angles, herald_state, parse_pair, FrameOffsets, PolarizationLabel,
    PolarizationSetting,
};
