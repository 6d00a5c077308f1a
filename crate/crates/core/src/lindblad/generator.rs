use nalgebra::DMatrix;
use num_complex::Complex64;

use super::basis::StateBasis;
use super::density::{check_shape, DensityMatrix};
use crate::constants::HBAR_UEV_PS;
use crate::error::{ensure_finite, invalid, Error, Result};

/// Diagonal rotating-frame Hamiltonian, energies in μeV.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    basis: StateBasis,
    diag: Vec<f64>,
}

impl Hamiltonian {
    pub fn from_diagonal(basis: StateBasis, diag: Vec<f64>) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(Error::Shape {
                expected: basis.dim(),
                found_rows: diag.len(),
                found_cols: 1,
            });
        }
        for &e in &diag {
            ensure_finite("energy", e)?;
        }
        Ok(Self { basis, diag })
    }

    pub fn basis(&self) -> StateBasis {
        self.basis
    }

    pub fn energies(&self) -> &[f64] {
        &self.diag
    }
}

/// Only the bright excitons carry energy in the rotating frame:
/// `E_H = −Δ/2`, `E_V = +Δ/2`.
pub fn build_hamiltonian(delta_uev: f64, basis: StateBasis) -> Result<Hamiltonian> {
    ensure_finite("delta_uev", delta_uev)?;
    if delta_uev < 0.0 {
        return Err(invalid(format!("delta_uev must be >= 0, got {delta_uev}")));
    }
    let mut diag = vec![0.0; basis.dim()];
    diag[StateBasis::EXCITON_H] = -0.5 * delta_uev;
    diag[StateBasis::EXCITON_V] = 0.5 * delta_uev;
    Hamiltonian::from_diagonal(basis, diag)
}

/// Transition rates in ps⁻¹; `rate(i, j)` is the rate from state `j` to state `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    basis: StateBasis,
    g: DMatrix<f64>,
}

impl RateMatrix {
    pub fn new(basis: StateBasis, g: DMatrix<f64>) -> Result<Self> {
        check_shape(basis.dim(), g.nrows(), g.ncols())?;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let r = g[(i, j)];
                if !r.is_finite() || r < 0.0 {
                    return Err(invalid(format!("rate ({i},{j}) must be finite and >= 0, got {r}")));
                }
                if i == j && r != 0.0 {
                    return Err(invalid(format!("rate matrix diagonal ({i},{i}) must be zero")));
                }
            }
        }
        Ok(Self { basis, g })
    }

    pub fn basis(&self) -> StateBasis {
        self.basis
    }

    pub fn rate(&self, to: usize, from: usize) -> f64 {
        self.g[(to, from)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Total escape rate `κ_a = Σ_i γ_ia` of every state.
    pub fn escape_rates(&self) -> Vec<f64> {
        (0..self.g.ncols()).map(|a| self.g.column(a).sum()).collect()
    }

    /// Generator of the population rate equations: `M_ai = γ_ai` off the
    /// diagonal, `M_aa = −κ_a`. Columns sum to zero.
    pub fn rate_equation_matrix(&self) -> DMatrix<f64> {
        let mut m = self.g.clone();
        for (a, k) in self.escape_rates().into_iter().enumerate() {
            m[(a, a)] = -k;
        }
        m
    }
}

/// Right-hand side of the master equation, element by element:
///
/// `dρ_ab/dt = (i/ħ)(E_b − E_a) ρ_ab + δ_ab Σ_i γ_ai ρ_ii − ½ (κ_a + κ_b) ρ_ab`
pub fn lindblad_derivative(
    rho: &DensityMatrix,
    h: &Hamiltonian,
    g: &RateMatrix,
) -> Result<DensityMatrix> {
    let gen = Generator::new(h, g)?;
    check_shape(gen.dim(), rho.dim(), rho.dim())?;
    let mut out = DensityMatrix::zeros(rho.basis());
    gen.apply(rho.matrix(), out.matrix_mut());
    Ok(out)
}

/// Precomputed per-element coefficients of the Lindbladian.
#[derive(Clone, Debug)]
pub(crate) struct Generator {
    /// `(i/ħ)(E_b − E_a) − ½(κ_a + κ_b)` for every element.
    coeff: DMatrix<Complex64>,
    gains: DMatrix<f64>,
}

impl Generator {
    pub(crate) fn new(h: &Hamiltonian, g: &RateMatrix) -> Result<Self> {
        let d = g.basis().dim();
        check_shape(d, h.energies().len(), h.energies().len())?;
        let e = h.energies();
        let kappa = g.escape_rates();
        let coeff = DMatrix::from_fn(d, d, |a, b| {
            Complex64::new(-0.5 * (kappa[a] + kappa[b]), (e[b] - e[a]) / HBAR_UEV_PS)
        });
        Ok(Self {
            coeff,
            gains: g.matrix().clone(),
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.coeff.nrows()
    }

    pub(crate) fn apply(&self, rho: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        self.apply_slice(rho.as_slice(), out.as_mut_slice());
    }

    /// Column-major form of [`Generator::apply`].
    pub(crate) fn apply_slice(&self, rho: &[Complex64], out: &mut [Complex64]) {
        for ((o, r), c) in out.iter_mut().zip(rho).zip(self.coeff.as_slice()) {
            *o = r * c;
        }
        let d = self.dim();
        for a in 0..d {
            let mut gain = 0.0;
            for i in 0..d {
                gain += self.gains[(a, i)] * rho[i * (d + 1)].re;
            }
            out[a * (d + 1)].re += gain;
        }
    }
}
