#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qdcascade::cascade::{canonical_polarization, FrameOffsets, PolarizationLabel};
use qdcascade::constants::HBAR_UEV_PS;
use qdcascade::correlation::{G2Evaluator, TauGrid};
use qdcascade::lindblad::{DensityMatrix, Propagator, StateBasis};
use qdcascade::{build_model, CascadeModel, ModelConfig};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn reference_model() -> CascadeModel {
    build_model(ModelConfig::reference().params()).unwrap()
}

pub fn paper_offsets() -> FrameOffsets {
    ModelConfig::reference().offsets()
}

/// `A A† / Tr` for a complex Gaussian `A`: a random full-rank state.
pub fn random_state(rng: &mut impl Rng, basis: StateBasis) -> DensityMatrix {
    let d = basis.dim();
    let a = DMatrix::<Complex64>::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::new(basis, m / tr).unwrap()
}

/// Amplitude of the `e^{−κ̄τ}·cos(Δτ/ħ + χ)` component of a positive-delay
/// curve, from a linear least-squares fit that also carries every
/// population mode `e^{λτ}` of the rate equations.
pub fn precession_amplitude(
    model: &CascadeModel,
    p1: PolarizationLabel,
    p2: PolarizationLabel,
    offsets: FrameOffsets,
) -> f64 {
    let ev = G2Evaluator::new(model).unwrap();
    let grid = TauGrid::new(-10.0, 3000.0, 10.0).unwrap();
    let curve = ev
        .curve(&canonical_polarization(p1), &canonical_polarization(p2), offsets, &grid)
        .unwrap();
    let tau_all = curve.tau_ps();
    let tau = &tau_all[1..];
    let y = &curve.values()[1..];
    let prop = Propagator::new(model.hamiltonian(), model.rates()).unwrap();
    let modes = prop.rate_eigenvalues().unwrap().to_vec();
    let kappa = model.rates().escape_rates();
    let kbar = 0.5 * (kappa[StateBasis::EXCITON_H] + kappa[StateBasis::EXCITON_V]);
    let omega = model.params().delta_uev / HBAR_UEV_PS;
    let cols = modes.len() + 2;
    let a = DMatrix::from_fn(tau.len(), cols, |i, j| {
        let t = tau[i];
        if j < modes.len() {
            (modes[j] * t).exp()
        } else if j == modes.len() {
            (-kbar * t).exp() * (omega * t).cos()
        } else {
            (-kbar * t).exp() * (omega * t).sin()
        }
    });
    let b = DVector::from_column_slice(y);
    let coef = a.svd(true, true).solve(&b, 1e-14).unwrap();
    coef[cols - 2].hypot(coef[cols - 1])
}
