//! Gaussian detector-response convolution on the sampling grid.
//!
//! The curves are discontinuous at `τ = 0`, where the two one-sided branches
//! meet on a bin edge. A plain midpoint sum over bin centres then carries an
//! `O(h²)` error proportional to the jump; it is removed with the first
//! Euler-Maclaurin boundary term on each side of the edge, using one-sided
//! polynomial extrapolation of the value and slope jumps.

use super::curve::{CorrelationCurve, CurveMeta, TauGrid};
use crate::error::{ensure_finite, invalid, Error, Result};

/// Kernel support in standard deviations.
pub const KERNEL_HALF_WIDTH_SIGMAS: f64 = 5.0;

/// Largest allowed ratio of bin width to kernel FWHM.
pub const MAX_BIN_PER_FWHM: f64 = 1.0 / 8.0;

/// Samples on each side used to extrapolate the one-sided limits at zero.
const EDGE_STENCIL: usize = 5;

pub fn fwhm_to_sigma(fwhm_ps: f64) -> f64 {
    fwhm_ps / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt())
}

/// Convolve with a unit-area Gaussian of the given FWHM.
///
/// Requires `bin ≤ fwhm/8`. Near the grid ends the truncated kernel is
/// renormalized over the available samples.
pub fn convolve_irf(curve: &CorrelationCurve, fwhm_ps: f64) -> Result<CorrelationCurve> {
    ensure_finite("fwhm_ps", fwhm_ps)?;
    if fwhm_ps <= 0.0 {
        return Err(invalid(format!("IRF FWHM must be > 0, got {fwhm_ps}")));
    }
    if curve.is_convolved() {
        return Err(Error::State("curve is already convolved".into()));
    }
    let bin = curve.grid().bin_ps();
    if bin > fwhm_ps * MAX_BIN_PER_FWHM * (1.0 + 1e-12) {
        return Err(invalid(format!(
            "bin width {bin} ps exceeds FWHM/8 = {} ps; sample on a finer grid",
            fwhm_ps * MAX_BIN_PER_FWHM
        )));
    }
    let values = convolve_values(curve.grid(), curve.values(), fwhm_ps);
    let (grid, _, meta) = curve.clone().into_parts();
    CorrelationCurve::new(
        grid,
        values,
        CurveMeta {
            convolved: true,
            irf_fwhm_ps: Some(fwhm_ps),
            ..meta
        },
    )
}

pub(crate) fn convolve_values(grid: &TauGrid, f: &[f64], fwhm_ps: f64) -> Vec<f64> {
    let h = grid.bin_ps();
    let sigma = fwhm_to_sigma(fwhm_ps);
    let half = (KERNEL_HALF_WIDTH_SIGMAS * sigma / h).floor() as usize;
    let taps: Vec<f64> = (0..=half)
        .map(|i| {
            let x = i as f64 * h / sigma;
            (-0.5 * x * x).exp()
        })
        .collect();
    let full_norm: f64 = taps[0] + 2.0 * taps[1..].iter().sum::<f64>();

    let n = f.len();
    let mut out = vec![0.0; n];
    for (k, o) in out.iter_mut().enumerate() {
        let lo = k.saturating_sub(half);
        let hi = (k + half).min(n - 1);
        let mut acc = 0.0;
        let mut norm = 0.0;
        for (j, &fj) in f.iter().enumerate().take(hi + 1).skip(lo) {
            let w = taps[k.abs_diff(j)];
            acc += w * fj;
            norm += w;
        }
        *o = if k >= half && k + half < n {
            acc / full_norm
        } else {
            acc / norm
        };
    }

    let z = grid.negative_bins();
    if z >= EDGE_STENCIL && n - z >= EDGE_STENCIL {
        let (v_minus, d_minus) = one_sided_limit(&f[z - EDGE_STENCIL..z], h, Side::Left);
        let (v_plus, d_plus) = one_sided_limit(&f[z..z + EDGE_STENCIL], h, Side::Right);
        let jump = v_plus - v_minus;
        let slope_jump = d_plus - d_minus;
        let amp = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let lo = z.saturating_sub(half);
        let hi = (z + half).min(n);
        for (k, o) in out.iter_mut().enumerate().take(hi).skip(lo) {
            let tau = grid.center(k);
            let kern = amp * (-0.5 * (tau / sigma).powi(2)).exp();
            let dkern = -tau / (sigma * sigma) * kern;
            *o += h * h / 24.0 * (dkern * jump - kern * slope_jump);
        }
    }
    out
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

/// Value and slope at the zero edge from the nearest bin centres on one side,
/// by a Lagrange interpolant through them.
fn one_sided_limit(samples: &[f64], h: f64, side: Side) -> (f64, f64) {
    let n = samples.len();
    // Abscissae in units of h relative to the edge.
    let x: Vec<f64> = match side {
        Side::Right => (0..n).map(|i| i as f64 + 0.5).collect(),
        Side::Left => (0..n).map(|i| -((n - i) as f64) + 0.5).collect(),
    };
    let mut value = 0.0;
    let mut slope = 0.0;
    for i in 0..n {
        let mut li = 1.0;
        let mut dli = 0.0;
        let mut denom = 1.0;
        for j in (0..n).filter(|&j| j != i) {
            denom *= x[i] - x[j];
        }
        for j in (0..n).filter(|&j| j != i) {
            li *= -x[j];
            let mut term = 1.0;
            for m in (0..n).filter(|&m| m != i && m != j) {
                term *= -x[m];
            }
            dli += term;
        }
        value += samples[i] * li / denom;
        slope += samples[i] * dli / denom;
    }
    (value, slope / h)
}
