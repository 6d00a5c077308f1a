//! Polarization-resolved biexciton-exciton correlation functions.
//!
//! For a biexciton photon detected first (positive delay) the exciton is
//! heralded in a pure superposition which then evolves freely; the exciton
//! photon is read out through the projector of the second arm:
//!
//! ```text
//! g²(τ > 0) = Tr[Π₂ e^{Lτ}(Π_herald)] / Tr[Π₂ ρ_ss]
//! g²(τ < 0) = Tr[Π_XX e^{L|τ|}(Π_0)] / Tr[Π_XX ρ_ss]
//! ```
//!
//! The negative branch does not depend on either polarizer setting.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cascade::{
    detection_angles, exciton_amplitudes, exciton_projector, herald_angles, herald_state,
    CascadeModel, FrameOffsets, PolarizationSetting,
};
use crate::error::{ensure_finite, Error, Result};
use crate::lindblad::{DensityMatrix, Propagator, StateBasis};

const XH: usize = StateBasis::EXCITON_H;
const XV: usize = StateBasis::EXCITON_V;

/// Shared state for evaluating g² curves of one model.
#[derive(Clone, Debug)]
pub struct G2Evaluator {
    basis: StateBasis,
    propagator: Propagator,
    rho_ss: DensityMatrix,
    herald_conjugate: bool,
    model_hash: u64,
}

impl G2Evaluator {
    /// Evaluator using the phase-conjugating heralding convention.
    pub fn new(model: &CascadeModel) -> Result<Self> {
        let propagator = Propagator::new(model.hamiltonian(), model.rates())?;
        let rho_ss = model.steady_state()?;
        if rho_ss.get(StateBasis::BIEXCITON, StateBasis::BIEXCITON).re <= 0.0 {
            return Err(Error::Numerical(
                "steady state has no biexciton population".into(),
            ));
        }
        Ok(Self {
            basis: model.basis(),
            propagator,
            rho_ss,
            herald_conjugate: true,
            model_hash: model_hash(model),
        })
    }

    pub fn with_herald_conjugate(mut self, conjugate: bool) -> Self {
        self.herald_conjugate = conjugate;
        self
    }

    pub fn herald_conjugate(&self) -> bool {
        self.herald_conjugate
    }

    pub fn steady_state(&self) -> &DensityMatrix {
        &self.rho_ss
    }

    pub fn basis(&self) -> StateBasis {
        self.basis
    }

    pub fn model_hash(&self) -> u64 {
        self.model_hash
    }

    /// Positive-delay correlation by propagating the full heralded density
    /// matrix.
    pub fn g2_positive(
        &self,
        p1: &PolarizationSetting,
        p2: &PolarizationSetting,
        offsets: FrameOffsets,
        tau_ps: f64,
    ) -> Result<f64> {
        ensure_finite("tau_ps", tau_ps)?;
        if tau_ps <= 0.0 {
            return Err(Error::Domain(format!(
                "g2_positive needs tau > 0, got {tau_ps}; use g2_negative for tau < 0"
            )));
        }
        let herald = herald_state(p1, offsets, self.herald_conjugate, self.basis);
        let (theta2, phi2) = detection_angles(p2, offsets);
        let readout = exciton_projector(theta2, phi2, self.basis);
        let evolved = self.propagator.propagate(&herald, tau_ps)?;
        let denom = self.rho_ss.expectation(&readout);
        if denom <= 0.0 {
            return Err(Error::Numerical(format!(
                "steady-state exciton occupation seen by the detector is {denom}"
            )));
        }
        Ok(evolved.expectation(&readout) / denom)
    }

    pub fn g2_negative(&self, tau_ps: f64) -> Result<f64> {
        ensure_finite("tau_ps", tau_ps)?;
        if tau_ps >= 0.0 {
            return Err(Error::Domain(format!(
                "g2_negative needs tau < 0, got {tau_ps}; use g2_positive for tau > 0"
            )));
        }
        let empty = DensityMatrix::basis_projector(self.basis, StateBasis::EMPTY);
        let evolved = self.propagator.propagate(&empty, -tau_ps)?;
        let xx = StateBasis::BIEXCITON;
        Ok(evolved.get(xx, xx).re / self.rho_ss.get(xx, xx).re)
    }

    /// Everything about the free evolution at delay `|τ|` needed by any
    /// panel.
    pub fn response(&self, tau_abs_ps: f64) -> DelayResponse {
        let transfer = self.propagator.population_transfer(tau_abs_ps);
        DelayResponse::from_transfer(
            &transfer,
            self.propagator.coherence_factor(XH, XV, tau_abs_ps),
        )
    }

    /// Precompute the projector overlaps of one `(P1, P2)` panel.
    pub fn panel(
        &self,
        p1: &PolarizationSetting,
        p2: &PolarizationSetting,
        offsets: FrameOffsets,
    ) -> Result<PanelWeights> {
        let (t1, f1) = herald_angles(p1, offsets, self.herald_conjugate);
        let (t2, f2) = detection_angles(p2, offsets);
        let h = exciton_amplitudes(t1, f1);
        let d = exciton_amplitudes(t2, f2);
        let mut pop = [[0.0; 2]; 2];
        for (k, row) in pop.iter_mut().enumerate() {
            for (j, w) in row.iter_mut().enumerate() {
                *w = d[k].norm_sqr() * h[j].norm_sqr();
            }
        }
        let coherence = 2.0 * d[0].conj() * d[1] * h[0] * h[1].conj();
        let p = self.rho_ss.matrix();
        let denominator = (d[0].conj() * p[(XH, XH)] * d[0]
            + d[0].conj() * p[(XH, XV)] * d[1]
            + d[1].conj() * p[(XV, XH)] * d[0]
            + d[1].conj() * p[(XV, XV)] * d[1])
            .re;
        if denominator <= 0.0 {
            return Err(Error::Numerical(format!(
                "steady-state exciton occupation seen by the detector is {denominator}"
            )));
        }
        Ok(PanelWeights {
            pop,
            coherence,
            denominator,
        })
    }

    /// Negative-delay value from a precomputed response.
    pub fn negative_from(&self, r: &DelayResponse) -> f64 {
        let xx = StateBasis::BIEXCITON;
        r.empty_to_biexciton / self.rho_ss.get(xx, xx).re
    }
}

/// Free-evolution quantities at one delay, shared by all panels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayResponse {
    /// `[k][j]`: population found in bright exciton `k` starting from `j`.
    pub exciton_transfer: [[f64; 2]; 2],
    /// Decay-and-rotation factor of `ρ_{XH,XV}`.
    pub coherence: Complex64,
    /// Biexciton population reached from the empty dot.
    pub empty_to_biexciton: f64,
}

impl DelayResponse {
    fn from_transfer(t: &DMatrix<f64>, coherence: Complex64) -> Self {
        Self {
            exciton_transfer: [[t[(XH, XH)], t[(XH, XV)]], [t[(XV, XH)], t[(XV, XV)]]],
            coherence,
            empty_to_biexciton: t[(StateBasis::BIEXCITON, StateBasis::EMPTY)],
        }
    }
}

/// Projector overlaps of one polarization panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelWeights {
    pop: [[f64; 2]; 2],
    coherence: Complex64,
    denominator: f64,
}

impl PanelWeights {
    pub fn positive(&self, r: &DelayResponse) -> f64 {
        let incoherent: f64 = self
            .pop
            .iter()
            .flatten()
            .zip(r.exciton_transfer.iter().flatten())
            .map(|(w, t)| w * t)
            .sum();
        let num = incoherent + (self.coherence * r.coherence).re;
        num / self.denominator
    }

    /// Magnitude of the oscillating term relative to the normalization, at
    /// zero delay.
    pub fn coherent_amplitude(&self) -> f64 {
        self.coherence.norm() / self.denominator
    }
}

/// Positive-delay g² with the conjugating herald convention.
pub fn g2_positive(
    model: &CascadeModel,
    p1: &PolarizationSetting,
    p2: &PolarizationSetting,
    offsets: FrameOffsets,
    tau_ps: f64,
) -> Result<f64> {
    G2Evaluator::new(model)?.g2_positive(p1, p2, offsets, tau_ps)
}

pub fn g2_negative(model: &CascadeModel, tau_ps: f64) -> Result<f64> {
    G2Evaluator::new(model)?.g2_negative(tau_ps)
}

/// FNV-1a over the model parameters.
pub fn model_hash(model: &CascadeModel) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let p = model.params();
    let mut words = vec![
        p.delta_uev.to_bits(),
        p.tau_h_ps.to_bits(),
        p.tau_v_ps.to_bits(),
        p.g_rate.to_bits(),
        p.n_max as u64,
    ];
    for (&k, &v) in &p.explicit_tau_ps {
        words.push(k as u64);
        words.push(v.to_bits());
    }
    let mut h = OFFSET;
    for w in words {
        for b in w.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}
