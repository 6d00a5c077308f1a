use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::cascade::{build_model, canonical_polarization, ModelConfig, PolarizationLabel};
use crate::correlation::{G2Evaluator, TauGrid};
use crate::error::{invalid, Result};
use crate::timetag::{Acquisition, Histogram};

/// Nominal acquisition span of synthetic histograms.
const SYNTHETIC_SPAN_PS: f64 = 1e13;

/// Histograms of the convolved model with `accidentals_per_bin` expected
/// counts at `g2 = 1`. With a seed, counts are Poisson draws (panel `i` uses
/// ChaCha stream `i`); without one, values are exact and `σ` is the Poisson
/// width of the expectation.
pub fn synthetic_histograms(
    config: &ModelConfig,
    panels: &[(PolarizationLabel, PolarizationLabel)],
    grid: &TauGrid,
    accidentals_per_bin: f64,
    noise_seed: Option<u64>,
) -> Result<Vec<(PolarizationLabel, PolarizationLabel, Histogram)>> {
    if !(accidentals_per_bin.is_finite() && accidentals_per_bin > 0.0) {
        return Err(invalid(format!(
            "accidentals_per_bin must be > 0, got {accidentals_per_bin}"
        )));
    }
    let model = build_model(config.params())?;
    let ev = G2Evaluator::new(&model)?.with_herald_conjugate(config.herald_conjugate);
    let weights = panels
        .iter()
        .map(|(a, b)| ev.panel(&canonical_polarization(*a), &canonical_polarization(*b), config.offsets()))
        .collect::<Result<Vec<_>>>()?;
    let irf = (config.irf_fwhm_ps > 0.0).then_some(config.irf_fwhm_ps);
    let values = ev.panel_values(&weights, grid, irf)?;

    // singles chosen so that N₁N₂b/T reproduces the requested accidentals
    let singles = (accidentals_per_bin * SYNTHETIC_SPAN_PS / grid.bin_ps()).sqrt();
    let acquisition = Acquisition {
        span_ps: SYNTHETIC_SPAN_PS,
        n_start: singles.round() as u64,
        n_stop: singles.round() as u64,
    };
    let scale = (singles.round() * singles.round()) * grid.bin_ps() / SYNTHETIC_SPAN_PS;

    panels
        .iter()
        .zip(values)
        .enumerate()
        .map(|(i, (&(a, b), v))| {
            let h = match noise_seed {
                Some(seed) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    let counts = v
                        .iter()
                        .map(|&g| {
                            let mean = (g * scale).max(0.0);
                            if mean > 0.0 {
                                Poisson::new(mean).map_or(0, |p| p.sample(&mut rng) as u64)
                            } else {
                                0
                            }
                        })
                        .collect();
                    Histogram::from_counts(*grid, counts, acquisition)?
                }
                None => {
                    let counts = v.iter().map(|&g| (g * scale).max(0.0).round() as u64).collect();
                    let sigma = v.iter().map(|&g| (g * scale).max(1.0).sqrt() / scale).collect();
                    Histogram::from_normalized(*grid, counts, v, sigma, acquisition)?
                }
            };
            Ok((a, b, h))
        })
        .collect()
}
