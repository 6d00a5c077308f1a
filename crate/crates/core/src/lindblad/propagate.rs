//! Time evolution of the master equation.
//!
//! The generator splits exactly: populations follow the linear rate
//! equations `ṗ = M p`, and every coherence `ρ_ab` (a ≠ b) decays
//! independently with rate `½(κ_a + κ_b)` while rotating at `(E_b − E_a)/ħ`.
//! [`Propagator`] evaluates both in closed form. [`numeric_propagate`] is a
//! plain RK4 integrator of the same equation kept as a reference.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::density::{check_shape, DensityMatrix};
use super::generator::{Generator, Hamiltonian, RateMatrix};
use crate::constants::HBAR_UEV_PS;
use crate::error::{ensure_finite, invalid, Result};

/// Eigenvector condition number above which `exp(M t)` switches to Padé.
const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;

#[derive(Clone, Debug)]
enum PopulationFlow {
    /// `M = V diag(λ) V⁻¹`.
    Eigen {
        values: DVector<f64>,
        vectors: DMatrix<f64>,
        inverse: DMatrix<f64>,
    },
    /// Scaling-and-squaring Padé evaluation of `exp(M t)` on every call.
    Pade { m: DMatrix<f64> },
}

/// Closed-form evolution operator for a fixed Hamiltonian and rate matrix.
///
/// The decomposition of the rate-equation matrix is computed once, so a
/// single `Propagator` can be evaluated at many times cheaply.
#[derive(Clone, Debug)]
pub struct Propagator {
    dim: usize,
    flow: PopulationFlow,
    /// Per-element `(i/ħ)(E_b − E_a) − ½(κ_a + κ_b)`.
    coherence_rate: DMatrix<Complex64>,
}

impl Propagator {
    pub fn new(h: &Hamiltonian, g: &RateMatrix) -> Result<Self> {
        let dim = g.basis().dim();
        check_shape(dim, h.energies().len(), h.energies().len())?;
        let m = g.rate_equation_matrix();
        let flow = match eigen_decompose(&m) {
            Some((values, vectors, inverse)) => PopulationFlow::Eigen {
                values,
                vectors,
                inverse,
            },
            None => PopulationFlow::Pade { m },
        };
        let e = h.energies();
        let kappa = g.escape_rates();
        let coherence_rate = DMatrix::from_fn(dim, dim, |a, b| {
            Complex64::new(-0.5 * (kappa[a] + kappa[b]), (e[b] - e[a]) / HBAR_UEV_PS)
        });
        Ok(Self {
            dim,
            flow,
            coherence_rate,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the population flow uses the eigendecomposition.
    pub fn uses_eigendecomposition(&self) -> bool {
        matches!(self.flow, PopulationFlow::Eigen { .. })
    }

    /// Eigenvalues of the rate-equation matrix, if decomposed.
    pub fn rate_eigenvalues(&self) -> Option<&[f64]> {
        match &self.flow {
            PopulationFlow::Eigen { values, .. } => Some(values.as_slice()),
            PopulationFlow::Pade { .. } => None,
        }
    }

    /// `exp(M t) p0`.
    pub fn evolve_populations(&self, p0: &DVector<f64>, t_ps: f64) -> DVector<f64> {
        match &self.flow {
            PopulationFlow::Eigen {
                values,
                vectors,
                inverse,
            } => {
                let mut c = inverse * p0;
                for (ci, &l) in c.iter_mut().zip(values.iter()) {
                    *ci *= (l * t_ps).exp();
                }
                vectors * c
            }
            PopulationFlow::Pade { m } => (m * t_ps).exp() * p0,
        }
    }

    /// The full population transfer matrix `exp(M t)`; entry `(k, j)` is the
    /// probability of occupying `k` at `t` after starting in `j`.
    pub fn population_transfer(&self, t_ps: f64) -> DMatrix<f64> {
        match &self.flow {
            PopulationFlow::Eigen {
                values,
                vectors,
                inverse,
            } => {
                let mut scaled = vectors.clone();
                for (mut col, &l) in scaled.column_iter_mut().zip(values.iter()) {
                    col *= (l * t_ps).exp();
                }
                scaled * inverse
            }
            PopulationFlow::Pade { m } => (m * t_ps).exp(),
        }
    }

    /// Factor multiplying coherence `ρ_ab` after time `t`.
    pub fn coherence_factor(&self, a: usize, b: usize, t_ps: f64) -> Complex64 {
        (self.coherence_rate[(a, b)] * t_ps).exp()
    }

    /// Evolve `rho0` by `t_ps ≥ 0`.
    pub fn propagate(&self, rho0: &DensityMatrix, t_ps: f64) -> Result<DensityMatrix> {
        check_shape(self.dim, rho0.dim(), rho0.dim())?;
        ensure_finite("t_ps", t_ps)?;
        if t_ps < 0.0 {
            return Err(invalid(format!("propagation time must be >= 0, got {t_ps}")));
        }
        let d = self.dim;
        let p0 = DVector::from_iterator(d, (0..d).map(|k| rho0.get(k, k).re));
        let p = self.evolve_populations(&p0, t_ps);
        let mut out = rho0.clone();
        let m = out.matrix_mut();
        for a in 0..d {
            for b in 0..d {
                if a == b {
                    m[(a, a)] = Complex64::new(p[a], 0.0);
                } else if m[(a, b)] != Complex64::new(0.0, 0.0) {
                    m[(a, b)] *= self.coherence_factor(a, b, t_ps);
                }
            }
        }
        Ok(out)
    }
}

/// One-shot closed-form propagation. Build a [`Propagator`] instead when
/// evaluating many times with the same model.
pub fn analytic_propagate(
    rho0: &DensityMatrix,
    t_ps: f64,
    h: &Hamiltonian,
    g: &RateMatrix,
) -> Result<DensityMatrix> {
    Propagator::new(h, g)?.propagate(rho0, t_ps)
}

/// Fixed-step classical RK4 integration of the master equation.
pub fn numeric_propagate(
    rho0: &DensityMatrix,
    t_ps: f64,
    h: &Hamiltonian,
    g: &RateMatrix,
    step_ps: f64,
) -> Result<DensityMatrix> {
    ensure_finite("t_ps", t_ps)?;
    ensure_finite("step_ps", step_ps)?;
    if step_ps <= 0.0 {
        return Err(invalid(format!("step_ps must be > 0, got {step_ps}")));
    }
    if t_ps < 0.0 {
        return Err(invalid(format!("propagation time must be >= 0, got {t_ps}")));
    }
    if rho0.matrix().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(invalid("initial state has non-finite entries"));
    }
    let gen = Generator::new(h, g)?;
    check_shape(gen.dim(), rho0.dim(), rho0.dim())?;
    let mut rho = rho0.clone();
    if t_ps == 0.0 {
        return Ok(rho);
    }
    let n = (t_ps / step_ps).ceil().max(1.0) as usize;
    let dt = t_ps / n as f64;
    let mut rk = Rk4::new(gen.dim());
    for _ in 0..n {
        rk.step(&gen, rho.matrix_mut(), dt);
    }
    Ok(rho)
}

struct Rk4 {
    k1: DMatrix<Complex64>,
    k2: DMatrix<Complex64>,
    k3: DMatrix<Complex64>,
    k4: DMatrix<Complex64>,
    tmp: DMatrix<Complex64>,
}

impl Rk4 {
    fn new(d: usize) -> Self {
        let z = DMatrix::zeros(d, d);
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn step(&mut self, gen: &Generator, y: &mut DMatrix<Complex64>, dt: f64) {
        let y = y.as_mut_slice();
        let (k1, k2, k3, k4, tmp) = (
            self.k1.as_mut_slice(),
            self.k2.as_mut_slice(),
            self.k3.as_mut_slice(),
            self.k4.as_mut_slice(),
            self.tmp.as_mut_slice(),
        );
        let (half, sixth) = (0.5 * dt, dt / 6.0);
        gen.apply_slice(y, k1);
        for ((t, y), k) in tmp.iter_mut().zip(&*y).zip(&*k1) {
            *t = y + k * half;
        }
        gen.apply_slice(tmp, k2);
        for ((t, y), k) in tmp.iter_mut().zip(&*y).zip(&*k2) {
            *t = y + k * half;
        }
        gen.apply_slice(tmp, k3);
        for ((t, y), k) in tmp.iter_mut().zip(&*y).zip(&*k3) {
            *t = y + k * dt;
        }
        gen.apply_slice(tmp, k4);
        for i in 0..y.len() {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
        }
    }
}

/// Real eigendecomposition of a rate-equation matrix, or `None` when the
/// spectrum is complex, degenerate, or the eigenvectors are ill conditioned.
fn eigen_decompose(m: &DMatrix<f64>) -> Option<(DVector<f64>, DMatrix<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    let scale = m.amax();
    if scale == 0.0 {
        return Some((DVector::zeros(n), DMatrix::identity(n, n), DMatrix::identity(n, n)));
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1e-15 * scale, 10_000)?;
    let spectrum = schur.complex_eigenvalues();
    if spectrum.iter().any(|z| z.im.abs() > 1e-10 * scale) {
        return None;
    }
    let mut values: Vec<f64> = spectrum.iter().map(|z| z.re).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    if values.windows(2).any(|w| (w[0] - w[1]).abs() < 1e-9 * scale) {
        return None;
    }

    let mut vectors = DMatrix::zeros(n, n);
    for (k, &l) in values.iter().enumerate() {
        let shifted = m - DMatrix::identity(n, n) * l;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t?;
        let (imin, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))?;
        let mut v = v_t.row(imin).transpose();
        // Fix the sign so the largest component is positive.
        let (ibig, _) = v.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
        if v[ibig] < 0.0 {
            v = -v;
        }
        vectors.set_column(k, &v);
    }

    let sv = vectors.clone().svd(false, false).singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= 0.0 || smax / smin > MAX_EIGENVECTOR_CONDITION {
        return None;
    }
    let inverse = vectors.clone().try_inverse()?;
    let values = DVector::from_vec(values);
    let residual = (m * &vectors - &vectors * DMatrix::from_diagonal(&values)).amax();
    if residual > 1e-10 * scale {
        return None;
    }
    Some((values, vectors, inverse))
}
