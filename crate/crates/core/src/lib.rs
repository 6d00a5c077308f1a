//! Biexciton-exciton cascade simulation for quantum dots.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cascade;
pub mod constants;
pub mod correlation;
pub mod error;
pub mod fitting;
pub mod lindblad;
pub mod montecarlo;
pub mod timetag;

pub use cascade::{
    build_model, CascadeModel, CascadeParams, FrameOffsets, ModelConfig, PolarizationLabel,
    PolarizationSetting,
};
pub use correlation::{CorrelationCurve, G2Evaluator, TauGrid, Tomography};
pub use error::{Error, Result};
pub use fitting::{fit, FitOptions, FitProblem, FitResult};
pub use montecarlo::{simulate_stream, DetectorConfig};
pub use timetag::{correlate, Histogram, TimeTag, TimeTagStream};
pub use lindblad::{DensityMatrix, Hamiltonian, RateMatrix, StateBasis};
