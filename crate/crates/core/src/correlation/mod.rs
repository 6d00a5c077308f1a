//! g² correlation curves, detector-response convolution and the
//! polarization tomography grid.

mod build;
mod convolve;
mod curve;
mod g2;

pub use build::{g2_curve, tomography_grid, Tomography};
pub use convolve::{convolve_irf, fwhm_to_sigma, KERNEL_HALF_WIDTH_SIGMAS, MAX_BIN_PER_FWHM};
pub use curve::{CorrelationCurve, CurveMeta, TauGrid};
pub use g2::{g2_negative, g2_positive, model_hash, DelayResponse, G2Evaluator, PanelWeights};
