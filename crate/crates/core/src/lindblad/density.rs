use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::StateBasis;
use crate::error::{Error, Result};

/// Complex density matrix over a [`StateBasis`].
///
/// Construction only checks the shape. Unnormalized matrices are allowed
/// because projector-seeded intermediates of the correlation functions are
/// not trace one.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: StateBasis,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(basis: StateBasis, m: DMatrix<Complex64>) -> Result<Self> {
        check_shape(basis.dim(), m.nrows(), m.ncols())?;
        Ok(Self { basis, m })
    }

    pub fn zeros(basis: StateBasis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            m: DMatrix::zeros(d, d),
        }
    }

    /// Diagonal (incoherent) state with the given populations.
    pub fn from_populations(basis: StateBasis, populations: &[f64]) -> Result<Self> {
        if populations.len() != basis.dim() {
            return Err(Error::Shape {
                expected: basis.dim(),
                found_rows: populations.len(),
                found_cols: 1,
            });
        }
        let mut rho = Self::zeros(basis);
        for (k, &p) in populations.iter().enumerate() {
            rho.m[(k, k)] = Complex64::new(p, 0.0);
        }
        Ok(rho)
    }

    /// `|k⟩⟨k|`.
    pub fn basis_projector(basis: StateBasis, k: usize) -> Self {
        let mut rho = Self::zeros(basis);
        rho.m[(k, k)] = Complex64::new(1.0, 0.0);
        rho
    }

    pub fn basis(&self) -> StateBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.m
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.m
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.m[(a, b)]
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.m[(k, k)].re).collect()
    }

    /// `Re Tr(op · ρ)`.
    pub fn expectation(&self, op: &DensityMatrix) -> f64 {
        let d = self.dim();
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += (op.m[(a, b)] * self.m[(b, a)]).re;
            }
        }
        acc
    }

    /// Largest element-wise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for a in 0..d {
            for b in a..d {
                worst = worst.max((self.m[(a, b)] - self.m[(b, a)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.m + self.m.adjoint()) * Complex64::new(0.5, 0.0);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest element-wise absolute difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn check_shape(expected: usize, rows: usize, cols: usize) -> Result<()> {
    if rows != expected || cols != expected {
        return Err(Error::Shape {
            expected,
            found_rows: rows,
            found_cols: cols,
        });
    }
    Ok(())
}
