use rayon::prelude::*;

use super::convolve::{convolve_values, fwhm_to_sigma, KERNEL_HALF_WIDTH_SIGMAS, MAX_BIN_PER_FWHM};
use super::curve::{CorrelationCurve, CurveMeta, TauGrid};
use super::g2::{DelayResponse, G2Evaluator, PanelWeights};
use crate::cascade::{
    canonical_polarization, CascadeModel, FrameOffsets, PolarizationLabel, PolarizationSetting,
};
use crate::error::{ensure_finite, invalid, Result};

/// Free-evolution responses at every bin centre of a grid.
struct SampledResponses {
    grid: TauGrid,
    responses: Vec<DelayResponse>,
}

impl SampledResponses {
    fn new(ev: &G2Evaluator, grid: TauGrid) -> Self {
        let responses = (0..grid.len())
            .into_par_iter()
            .map(|k| ev.response(grid.center(k).abs()))
            .collect();
        Self { grid, responses }
    }

    fn negative_half(&self, ev: &G2Evaluator) -> Vec<f64> {
        self.responses[..self.grid.negative_bins()]
            .iter()
            .map(|r| ev.negative_from(r))
            .collect()
    }

    fn panel(&self, negative: &[f64], w: &PanelWeights) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.grid.len());
        v.extend_from_slice(negative);
        v.extend(
            self.responses[self.grid.negative_bins()..]
                .iter()
                .map(|r| w.positive(r)),
        );
        v
    }
}

/// Sub-bin factor and margin (in coarse bins) used to evaluate a convolved
/// curve on `grid`.
fn oversampling(grid: &TauGrid, fwhm_ps: f64) -> (usize, usize) {
    let ratio = grid.bin_ps() / (fwhm_ps * MAX_BIN_PER_FWHM);
    let mut factor = (ratio - 1e-9).ceil().max(1.0) as usize;
    if factor.is_multiple_of(2) {
        factor += 1;
    }
    let margin = (KERNEL_HALF_WIDTH_SIGMAS * fwhm_to_sigma(fwhm_ps) / grid.bin_ps()).ceil() as usize + 1;
    (factor, margin)
}

fn decimate(fine: &[f64], coarse_len: usize, factor: usize, margin: usize) -> Vec<f64> {
    (0..coarse_len)
        .map(|k| fine[(k + margin) * factor + (factor - 1) / 2])
        .collect()
}

impl G2Evaluator {
    fn meta(
        &self,
        p1: &PolarizationSetting,
        p2: &PolarizationSetting,
        irf_fwhm_ps: Option<f64>,
    ) -> CurveMeta {
        CurveMeta {
            p1: Some(*p1),
            p2: Some(*p2),
            model_hash: self.model_hash(),
            convolved: irf_fwhm_ps.is_some(),
            irf_fwhm_ps,
        }
    }

    /// Unconvolved curve sampled at the bin centres of `grid`.
    pub fn curve(
        &self,
        p1: &PolarizationSetting,
        p2: &PolarizationSetting,
        offsets: FrameOffsets,
        grid: &TauGrid,
    ) -> Result<CorrelationCurve> {
        let w = self.panel(p1, p2, offsets)?;
        let s = SampledResponses::new(self, *grid);
        let values = s.panel(&s.negative_half(self), &w);
        CorrelationCurve::new(*grid, values, self.meta(p1, p2, None))
    }

    /// Curve convolved with a Gaussian response of `fwhm_ps`, evaluated on
    /// an internal grid fine enough for the convolution and reported at the
    /// bin centres of `grid`.
    pub fn convolved_curve(
        &self,
        p1: &PolarizationSetting,
        p2: &PolarizationSetting,
        offsets: FrameOffsets,
        grid: &TauGrid,
        fwhm_ps: f64,
    ) -> Result<CorrelationCurve> {
        let w = self.panel(p1, p2, offsets)?;
        let panels = self.convolved_panels(&[w], grid, fwhm_ps)?;
        let values = panels.into_iter().next().expect("one panel");
        CorrelationCurve::new(*grid, values, self.meta(p1, p2, Some(fwhm_ps)))
    }

    fn convolved_panels(
        &self,
        weights: &[PanelWeights],
        grid: &TauGrid,
        fwhm_ps: f64,
    ) -> Result<Vec<Vec<f64>>> {
        ensure_finite("irf_fwhm_ps", fwhm_ps)?;
        if fwhm_ps <= 0.0 {
            return Err(invalid(format!("IRF FWHM must be > 0, got {fwhm_ps}")));
        }
        let (factor, margin) = oversampling(grid, fwhm_ps);
        let fine = grid.widened(margin).refined(factor);
        let s = SampledResponses::new(self, fine);
        let negative = s.negative_half(self);
        Ok(weights
            .par_iter()
            .map(|w| {
                let raw = s.panel(&negative, w);
                let smooth = convolve_values(&fine, &raw, fwhm_ps);
                decimate(&smooth, grid.len(), factor, margin)
            })
            .collect())
    }

    /// Values of several panels on `grid`, sharing one set of propagations.
    pub(crate) fn panel_values(
        &self,
        weights: &[PanelWeights],
        grid: &TauGrid,
        irf_fwhm_ps: Option<f64>,
    ) -> Result<Vec<Vec<f64>>> {
        match irf_fwhm_ps {
            Some(fwhm) => self.convolved_panels(weights, grid, fwhm),
            None => {
                let s = SampledResponses::new(self, *grid);
                let negative = s.negative_half(self);
                Ok(weights.iter().map(|w| s.panel(&negative, w)).collect())
            }
        }
    }

    /// All 36 panels over `{H, V, D, D̄, R, L}²`, optionally convolved.
    pub fn tomography(
        &self,
        offsets: FrameOffsets,
        grid: &TauGrid,
        irf_fwhm_ps: Option<f64>,
    ) -> Result<Tomography> {
        let pairs: Vec<(PolarizationSetting, PolarizationSetting)> = PolarizationLabel::ALL
            .iter()
            .flat_map(|&a| {
                PolarizationLabel::ALL
                    .iter()
                    .map(move |&b| (canonical_polarization(a), canonical_polarization(b)))
            })
            .collect();
        let weights = pairs
            .iter()
            .map(|(a, b)| self.panel(a, b, offsets))
            .collect::<Result<Vec<_>>>()?;
        let values = self.panel_values(&weights, grid, irf_fwhm_ps)?;
        let curves = pairs
            .iter()
            .zip(values)
            .map(|((a, b), v)| CorrelationCurve::new(*grid, v, self.meta(a, b, irf_fwhm_ps)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Tomography { curves })
    }
}

/// The 36 curves of a polarization tomography, `P1`-major in
/// [`PolarizationLabel::ALL`] order.
#[derive(Clone, Debug)]
pub struct Tomography {
    curves: Vec<CorrelationCurve>,
}

impl Tomography {
    pub fn get(&self, p1: PolarizationLabel, p2: PolarizationLabel) -> &CorrelationCurve {
        &self.curves[label_index(p1) * 6 + label_index(p2)]
    }

    pub fn curves(&self) -> &[CorrelationCurve] {
        &self.curves
    }

    pub fn iter(&self) -> impl Iterator<Item = (PolarizationLabel, PolarizationLabel, &CorrelationCurve)> {
        self.curves.iter().enumerate().map(|(i, c)| {
            (PolarizationLabel::ALL[i / 6], PolarizationLabel::ALL[i % 6], c)
        })
    }
}

fn label_index(l: PolarizationLabel) -> usize {
    PolarizationLabel::ALL
        .iter()
        .position(|&x| x == l)
        .expect("label in ALL")
}

pub fn g2_curve(
    model: &CascadeModel,
    p1: &PolarizationSetting,
    p2: &PolarizationSetting,
    offsets: FrameOffsets,
    grid: &TauGrid,
) -> Result<CorrelationCurve> {
    G2Evaluator::new(model)?.curve(p1, p2, offsets, grid)
}

pub fn tomography_grid(
    model: &CascadeModel,
    offsets: FrameOffsets,
    grid: &TauGrid,
    irf_fwhm_ps: Option<f64>,
) -> Result<Tomography> {
    G2Evaluator::new(model)?.tomography(offsets, grid, irf_fwhm_ps)
}
