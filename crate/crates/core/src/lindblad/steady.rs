use nalgebra::{DMatrix, DVector};

use super::density::{check_shape, DensityMatrix};
use super::generator::{Hamiltonian, RateMatrix};
use crate::error::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
const NULLITY_TOLERANCE: f64 = 1e-13;

/// Stationary state of the master equation.
///
/// Coherences all decay, so the steady state is diagonal with the
/// normalized null vector of the rate-equation matrix on the diagonal. A
/// null space of dimension other than one is reported as
/// [`Error::DegenerateSteadyState`].
pub fn steady_state(h: &Hamiltonian, g: &RateMatrix) -> Result<DensityMatrix> {
    let basis = g.basis();
    let d = basis.dim();
    check_shape(d, h.energies().len(), h.energies().len())?;
    let populations = stationary_populations(&g.rate_equation_matrix())?;
    DensityMatrix::from_populations(basis, populations.as_slice())
}

fn stationary_populations(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    let d = m.nrows();
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let nullity = if smax == 0.0 {
        d
    } else {
        sv.iter().filter(|&&s| s <= NULLITY_TOLERANCE * smax).count()
    };
    if nullity != 1 {
        return Err(Error::DegenerateSteadyState { nullity });
    }

    // Columns of M sum to zero, so any row is redundant; replace the first
    // with the normalization constraint.
    let mut a = m.clone();
    a.row_mut(0).fill(1.0);
    let mut rhs = DVector::zeros(d);
    rhs[0] = 1.0;
    let mut p = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("steady-state system is singular".into()))?;
    p.iter_mut().for_each(|x| *x = x.max(0.0));
    let total = p.sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Numerical("steady-state populations do not normalize".into()));
    }
    Ok(p / total)
}
