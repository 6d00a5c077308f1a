//! Quantum-jump generator of synthetic time-tag streams.
//!
//! Outside the bright-exciton manifold the dot follows the classical jump
//! process defined by the rate matrix. Inside it the dot carries a pure
//! two-component amplitude over `|X_H⟩, |X_V⟩` that evolves under the
//! non-Hermitian Hamiltonian `E_k − iħκ_k/2`, with `κ_k = 1/τ_k + G`.
//!
//! A radiative biexciton decay leaves photon and exciton in
//! `√γ_H |H⟩|X_H⟩ + √γ_V |V⟩|X_V⟩`. With probability
//! `efficiency1 · |⟨p₁|photon⟩|²` (normalized by `γ_H + γ_V`) the photon is
//! registered and the exciton collapses onto the heralded state; otherwise
//! it enters `X_H` or `X_V` with weights `γ_H : γ_V`. A radiative exciton
//! decay emits a photon in the normalized exciton state, registered with
//! probability `efficiency2 · |⟨p₂|photon⟩|²`.
//!
//! Streams are generated with ChaCha8 seeded from a 64-bit seed; chunk `i`
//! of a chunked run uses ChaCha stream `i` of that seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;

use crate::cascade::{
    detection_angles, exciton_amplitudes, CascadeModel, FrameOffsets, PolarizationSetting,
};
use crate::constants::HBAR_UEV_PS;
use crate::correlation::fwhm_to_sigma;
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::lindblad::StateBasis;
use crate::timetag::{TimeTag, TimeTagStream, CHANNEL_BIEXCITON, CHANNEL_EXCITON};

/// Per-photon jitter FWHM giving a 42 ps pair response.
pub const DEFAULT_PHOTON_JITTER_FWHM_PS: f64 = 42.0 / std::f64::consts::SQRT_2;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorConfig {
    /// Polarizer in the biexciton arm (channel 1).
    pub p1: PolarizationSetting,
    /// Polarizer in the exciton arm (channel 2).
    pub p2: PolarizationSetting,
    /// Frame offsets applied to both polarizers.
    pub offsets: FrameOffsets,
    pub efficiency1: f64,
    pub efficiency2: f64,
    /// FWHM of the Gaussian jitter added to every detected photon. The
    /// coincidence response is √2 wider.
    pub irf_fwhm_ps: f64,
    pub seed: u64,
}

impl DetectorConfig {
    pub fn new(p1: PolarizationSetting, p2: PolarizationSetting, efficiency: f64, seed: u64) -> Self {
        Self {
            p1,
            p2,
            offsets: FrameOffsets::default(),
            efficiency1: efficiency,
            efficiency2: efficiency,
            irf_fwhm_ps: DEFAULT_PHOTON_JITTER_FWHM_PS,
            seed,
        }
    }

    pub fn with_offsets(mut self, offsets: FrameOffsets) -> Self {
        self.offsets = offsets;
        self
    }

    pub fn with_jitter(mut self, fwhm_ps: f64) -> Self {
        self.irf_fwhm_ps = fwhm_ps;
        self
    }

    /// FWHM of the start-stop delay response.
    pub fn pair_irf_fwhm_ps(&self) -> f64 {
        self.irf_fwhm_ps * std::f64::consts::SQRT_2
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("efficiency1", self.efficiency1), ("efficiency2", self.efficiency2)] {
            ensure_finite(name, e)?;
            if !(0.0..=1.0).contains(&e) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {e}")));
            }
        }
        ensure_finite("irf_fwhm_ps", self.irf_fwhm_ps)?;
        if self.irf_fwhm_ps < 0.0 {
            return Err(invalid(format!(
                "irf_fwhm_ps must be >= 0, got {}",
                self.irf_fwhm_ps
            )));
        }
        Ok(())
    }
}

/// Expected detection rates (per ps) on channels 1 and 2 in steady state.
///
/// The channel-2 rate neglects exciton coherence created by registered
/// heralds, which is of order `efficiency1`.
pub fn expected_singles_rates(model: &CascadeModel, cfg: &DetectorConfig) -> Result<(f64, f64)> {
    let p = model.steady_state()?.populations();
    let (gh, gv) = radiative_rates(model);
    let (t1, f1) = detection_angles(&cfg.p1, cfg.offsets);
    let a1 = exciton_amplitudes(t1, f1);
    let (t2, f2) = detection_angles(&cfg.p2, cfg.offsets);
    let a2 = exciton_amplitudes(t2, f2);
    let xx = p[StateBasis::BIEXCITON];
    let r1 = cfg.efficiency1 * xx * (gh * a1[0].norm_sqr() + gv * a1[1].norm_sqr());
    let r2 = cfg.efficiency2
        * (gh * p[StateBasis::EXCITON_H] * a2[0].norm_sqr()
            + gv * p[StateBasis::EXCITON_V] * a2[1].norm_sqr());
    Ok((r1, r2))
}

fn radiative_rates(model: &CascadeModel) -> (f64, f64) {
    let params = model.params();
    (1.0 / params.tau_h_ps, 1.0 / params.tau_v_ps)
}

/// One trajectory of `duration_ps`.
pub fn simulate_stream(
    model: &CascadeModel,
    cfg: &DetectorConfig,
    duration_ps: u64,
) -> Result<TimeTagStream> {
    simulate_stream_chunked(model, cfg, duration_ps, 1)
}

/// Independent trajectories over `chunks` consecutive slices of the
/// acquisition, merged by offsetting each slice. The output depends on
/// `(seed, chunks)` only.
pub fn simulate_stream_chunked(
    model: &CascadeModel,
    cfg: &DetectorConfig,
    duration_ps: u64,
    chunks: usize,
) -> Result<TimeTagStream> {
    cfg.validate()?;
    if duration_ps == 0 {
        return Err(invalid("duration_ps must be > 0"));
    }
    if chunks == 0 || chunks as u64 > duration_ps {
        return Err(invalid(format!("chunk count {chunks} is out of range")));
    }
    let sim = Simulator::new(model, cfg)?;
    let base = duration_ps / chunks as u64;
    let lengths: Vec<u64> = (0..chunks)
        .map(|i| if i + 1 == chunks { duration_ps - base * (chunks as u64 - 1) } else { base })
        .collect();
    let parts = lengths
        .par_iter()
        .enumerate()
        .map(|(i, &len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let events = sim.run(&mut rng, len);
            TimeTagStream::from_unsorted(events, len)
        })
        .collect::<Result<Vec<_>>>()?;
    TimeTagStream::concat(parts)
}

struct Simulator {
    populations: Vec<f64>,
    /// Total escape rate of every basis state.
    exit_rate: Vec<f64>,
    /// Cumulative target distribution of every non-exciton state.
    targets: Vec<Vec<(usize, f64)>>,
    gamma: [f64; 2],
    kappa: [f64; 2],
    /// Angular frequencies `E_k/ħ`.
    omega: [f64; 2],
    /// Polarizer amplitudes of arms 1 and 2.
    p1: [Complex64; 2],
    p2: [Complex64; 2],
    eff1: f64,
    eff2: f64,
    jitter_sigma: f64,
}

const XH: usize = StateBasis::EXCITON_H;
const XV: usize = StateBasis::EXCITON_V;
const XX: usize = StateBasis::BIEXCITON;
const EMPTY: usize = StateBasis::EMPTY;

enum Occupation {
    Classical(usize),
    Exciton([Complex64; 2]),
}

impl Simulator {
    fn new(model: &CascadeModel, cfg: &DetectorConfig) -> Result<Self> {
        let rho = model.steady_state()?;
        let populations = rho.populations();
        let g = model.rates();
        let d = model.basis().dim();
        let exit_rate = g.escape_rates();
        if let Some(j) = (0..d).find(|&j| exit_rate[j] <= 0.0) {
            return Err(Error::Numerical(format!(
                "state {} never decays; trajectory would stall",
                model.basis().label(j)
            )));
        }
        let targets = (0..d)
            .map(|j| {
                let mut acc = 0.0;
                (0..d)
                    .filter(|&i| g.rate(i, j) > 0.0)
                    .map(|i| {
                        acc += g.rate(i, j) / exit_rate[j];
                        (i, acc)
                    })
                    .collect()
            })
            .collect();
        let (gh, gv) = radiative_rates(model);
        let e = model.hamiltonian().energies();
        let (t1, f1) = detection_angles(&cfg.p1, cfg.offsets);
        let (t2, f2) = detection_angles(&cfg.p2, cfg.offsets);
        Ok(Self {
            populations,
            exit_rate: exit_rate.clone(),
            targets,
            gamma: [gh, gv],
            kappa: [exit_rate[XH], exit_rate[XV]],
            omega: [e[XH] / HBAR_UEV_PS, e[XV] / HBAR_UEV_PS],
            p1: exciton_amplitudes(t1, f1),
            p2: exciton_amplitudes(t2, f2),
            eff1: cfg.efficiency1,
            eff2: cfg.efficiency2,
            jitter_sigma: fwhm_to_sigma(cfg.irf_fwhm_ps),
        })
    }

    fn pick_target(&self, j: usize, u: f64) -> usize {
        let t = &self.targets[j];
        t.iter().find(|(_, c)| u < *c).unwrap_or(&t[t.len() - 1]).0
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> Occupation {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = self.populations.len() - 1;
        for (i, &p) in self.populations.iter().enumerate() {
            acc += p;
            if u < acc {
                k = i;
                break;
            }
        }
        enter(k)
    }

    fn run(&self, rng: &mut ChaCha8Rng, duration_ps: u64) -> Vec<TimeTag> {
        let end = duration_ps as f64;
        let mut raw: Vec<(u8, f64)> = Vec::new();
        let mut t = 0.0f64;
        let mut occ = self.initial(rng);
        while t < end {
            occ = match occ {
                Occupation::Classical(j) => {
                    let w: f64 = rng.sample(Exp1);
                    t += w / self.exit_rate[j];
                    let target = self.pick_target(j, rng.random());
                    if j == XX && (target == XH || target == XV) {
                        Occupation::Exciton(self.biexciton_emission(rng, t, &mut raw))
                    } else {
                        enter(target)
                    }
                }
                Occupation::Exciton(a) => {
                    // one uniform selects the component and then the channel
                    let u: f64 = rng.random();
                    let p0 = a[0].norm_sqr();
                    let (c, v) = if u < p0 { (0, u / p0) } else { (1, (u - p0) / (1.0 - p0)) };
                    let w: f64 = rng.sample(Exp1);
                    let dt = w / self.kappa[c];
                    t += dt;
                    if v * self.kappa[c] < self.gamma[c] {
                        if self.exciton_detected(&a, dt, rng.random()) {
                            raw.push((CHANNEL_EXCITON, t));
                        }
                        Occupation::Classical(EMPTY)
                    } else {
                        Occupation::Classical(XX)
                    }
                }
            };
        }
        self.finish(rng, raw, duration_ps)
    }

    /// Whether a photon emitted `dt` after the exciton was prepared in `a`
    /// passes the arm-2 polarizer and is registered, given uniform `u`.
    fn exciton_detected(&self, a: &[Complex64; 2], dt: f64, u: f64) -> bool {
        if u >= self.eff2 {
            return false;
        }
        // only the V amplitude relative to H matters
        let rel = Complex64::from_polar(
            (-0.5 * (self.kappa[1] - self.kappa[0]) * dt).exp(),
            -(self.omega[1] - self.omega[0]) * dt,
        );
        let photon = [a[0], a[1] * rel];
        let norm = photon[0].norm_sqr() + photon[1].norm_sqr();
        let overlap = self.p2[0].conj() * photon[0] + self.p2[1].conj() * photon[1];
        u * norm < self.eff2 * overlap.norm_sqr()
    }

    /// Radiative `XX → X` at time `t`; returns the exciton amplitude.
    fn biexciton_emission(
        &self,
        rng: &mut ChaCha8Rng,
        t: f64,
        raw: &mut Vec<(u8, f64)>,
    ) -> [Complex64; 2] {
        let sg = [self.gamma[0].sqrt(), self.gamma[1].sqrt()];
        let herald = [self.p1[0].conj() * sg[0], self.p1[1].conj() * sg[1]];
        let weight = herald[0].norm_sqr() + herald[1].norm_sqr();
        let total = self.gamma[0] + self.gamma[1];
        if rng.random::<f64>() * total < self.eff1 * weight {
            raw.push((CHANNEL_BIEXCITON, t));
            let n = weight.sqrt();
            [herald[0] / n, herald[1] / n]
        } else {
            let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            if rng.random::<f64>() * total < self.gamma[0] {
                [one, zero]
            } else {
                [zero, one]
            }
        }
    }

    fn finish(&self, rng: &mut ChaCha8Rng, raw: Vec<(u8, f64)>, duration_ps: u64) -> Vec<TimeTag> {
        let end = duration_ps as f64;
        let mut out = Vec::with_capacity(raw.len());
        for (ch, t) in raw {
            let jitter = if self.jitter_sigma > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                z * self.jitter_sigma
            } else {
                0.0
            };
            let tj = (t + jitter).round();
            if tj >= 0.0 && tj < end {
                out.push(TimeTag::new(ch, tj as u64));
            }
        }
        out
    }
}

fn enter(k: usize) -> Occupation {
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    match k {
        XH => Occupation::Exciton([one, zero]),
        XV => Occupation::Exciton([zero, one]),
        _ => Occupation::Classical(k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{build_model, canonical_polarization, CascadeParams, PolarizationLabel};
    use crate::timetag::correlate;
    use PolarizationLabel::*;

    fn model() -> CascadeModel {
        build_model(CascadeParams::reference()).unwrap()
    }

    fn cfg(p1: PolarizationLabel, p2: PolarizationLabel, eff: f64, seed: u64) -> DetectorConfig {
        DetectorConfig::new(canonical_polarization(p1), canonical_polarization(p2), eff, seed)
    }

    #[test]
    fn seed_determinism() {
        let m = model();
        let c = cfg(D, R, 0.3, 11);
        let a = simulate_stream(&m, &c, 200_000_000).unwrap();
        let b = simulate_stream(&m, &c, 200_000_000).unwrap();
        assert_eq!(a, b);
        assert!(a.len() > 100);
        let other = simulate_stream(&m, &cfg(D, R, 0.3, 12), 200_000_000).unwrap();
        assert_ne!(a, other);
        let ca = simulate_stream_chunked(&m, &c, 200_000_000, 4).unwrap();
        let cb = simulate_stream_chunked(&m, &c, 200_000_000, 4).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(ca.duration_ps(), 200_000_000);
    }

    #[test]
    fn zero_efficiency_silences_channel() {
        let m = model();
        let mut c = cfg(H, H, 0.5, 3);
        c.efficiency1 = 0.0;
        let s = simulate_stream(&m, &c, 100_000_000).unwrap();
        assert_eq!(s.count(CHANNEL_BIEXCITON), 0);
        assert!(s.count(CHANNEL_EXCITON) > 0);
        let mut c = cfg(H, H, 0.5, 3);
        c.efficiency2 = 0.0;
        let s = simulate_stream(&m, &c, 100_000_000).unwrap();
        assert_eq!(s.count(CHANNEL_EXCITON), 0);
        assert!(s.count(CHANNEL_BIEXCITON) > 0);
    }

    #[test]
    fn output_sorted_after_jitter() {
        let m = model();
        let c = cfg(H, V, 1.0, 5).with_jitter(500.0);
        let s = simulate_stream(&m, &c, 50_000_000).unwrap();
        assert!(s.events().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn singles_rates_match_steady_state() {
        let m = model();
        for (p1, p2) in [(H, H), (D, V), (R, A_LABEL)] {
            let mut c = cfg(p1, p2, 0.5, 99);
            c.efficiency1 = 0.02;
            let duration = 2_000_000_000u64;
            let s = simulate_stream(&m, &c, duration).unwrap();
            let (r1, r2) = expected_singles_rates(&m, &c).unwrap();
            for (ch, r) in [(CHANNEL_BIEXCITON, r1), (CHANNEL_EXCITON, r2)] {
                let expect = r * duration as f64;
                let got = s.count(ch) as f64;
                // Poisson bound widened for the correlated emission cycles
                assert!(
                    (got - expect).abs() < 3.0 * (2.0 * expect).sqrt(),
                    "{p1}{p2} ch{ch}: {got} vs {expect}"
                );
            }
        }
    }

    const A_LABEL: PolarizationLabel = Dbar;

    #[test]
    fn degenerate_exciton_has_no_preferred_linear_basis() {
        let p = CascadeParams {
            delta_uev: 0.0,
            tau_v_ps: 1180.0,
            ..CascadeParams::reference()
        };
        let m = build_model(p).unwrap();
        let duration = 20_000_000_000u64;
        let hh = simulate_stream(&m, &cfg(H, H, 0.3, 1), duration).unwrap();
        let dd = simulate_stream(&m, &cfg(D, D, 0.3, 2), duration).unwrap();
        let a = correlate(&hh, 1, 2, 200, 4000).unwrap();
        let b = correlate(&dd, 1, 2, 200, 4000).unwrap();
        let mut chi2 = 0.0;
        for k in 0..a.g2().len() {
            let s2 = a.sigma()[k].powi(2) + b.sigma()[k].powi(2);
            chi2 += (a.g2()[k] - b.g2()[k]).powi(2) / s2;
        }
        let dof = a.g2().len() as f64;
        assert!(chi2 / dof < 1.5, "chi2/dof = {}", chi2 / dof);
    }

    #[test]
    fn rejects_bad_config() {
        let m = model();
        let mut c = cfg(H, H, 0.5, 1);
        c.efficiency1 = 1.5;
        assert!(simulate_stream(&m, &c, 1000).is_err());
        let c = cfg(H, H, 0.5, 1).with_jitter(-1.0);
        assert!(simulate_stream(&m, &c, 1000).is_err());
        assert!(simulate_stream(&m, &cfg(H, H, 0.5, 1), 0).is_err());
        assert!(simulate_stream_chunked(&m, &cfg(H, H, 0.5, 1), 1000, 0).is_err());
    }
}
