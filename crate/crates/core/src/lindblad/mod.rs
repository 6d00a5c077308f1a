//! Density matrices and the cascade master equation.

mod basis;
mod density;
mod generator;
mod propagate;
mod steady;

pub use basis::StateBasis;
pub use density::DensityMatrix;
pub use generator::{build_hamiltonian, lindblad_derivative, Hamiltonian, RateMatrix};
pub use propagate::{analytic_propagate, numeric_propagate, Propagator};
pub use steady::steady_state;


/// Default step of the RK4 reference integrator, ps.
pub const DEFAULT_NUMERIC_STEP_PS: f64 = 0.05;
