use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::cascade::PolarizationSetting;
use crate::error::{ensure_finite, invalid, Error, Result};

/// Relative tolerance when checking that grid limits are whole bins.
const GRID_ALIGNMENT_TOL: f64 = 1e-9;

/// Uniform delay grid with `τ = 0` on a bin edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauGrid {
    tau_min_ps: f64,
    bin_ps: f64,
    negative_bins: usize,
    positive_bins: usize,
}

impl TauGrid {
    pub fn new(tau_min_ps: f64, tau_max_ps: f64, bin_ps: f64) -> Result<Self> {
        ensure_finite("tau_min_ps", tau_min_ps)?;
        ensure_finite("tau_max_ps", tau_max_ps)?;
        ensure_finite("bin_ps", bin_ps)?;
        if bin_ps <= 0.0 {
            return Err(invalid(format!("bin width must be > 0, got {bin_ps}")));
        }
        if !(tau_min_ps < 0.0 && tau_max_ps > 0.0) {
            return Err(invalid(format!(
                "grid must satisfy tau_min < 0 < tau_max, got [{tau_min_ps}, {tau_max_ps}]"
            )));
        }
        let negative_bins = whole_bins(-tau_min_ps, bin_ps).ok_or_else(|| {
            invalid(format!(
                "tau_min {tau_min_ps} is not a whole number of {bin_ps} ps bins from zero"
            ))
        })?;
        let positive_bins = whole_bins(tau_max_ps, bin_ps).ok_or_else(|| {
            invalid(format!(
                "tau_max {tau_max_ps} is not a whole number of {bin_ps} ps bins from zero"
            ))
        })?;
        Ok(Self {
            tau_min_ps: -(negative_bins as f64) * bin_ps,
            bin_ps,
            negative_bins,
            positive_bins,
        })
    }

    /// `[−5000, 5000]` ps in 10 ps bins.
    pub fn default_grid() -> Self {
        Self::new(-5000.0, 5000.0, 10.0).expect("default grid is valid")
    }

    /// Symmetric grid of `bins_per_side` bins on each side of zero.
    pub fn symmetric(bins_per_side: usize, bin_ps: f64) -> Result<Self> {
        let half = bins_per_side as f64 * bin_ps;
        Self::new(-half, half, bin_ps)
    }

    pub fn bin_ps(&self) -> f64 {
        self.bin_ps
    }

    pub fn tau_min_ps(&self) -> f64 {
        self.tau_min_ps
    }

    pub fn tau_max_ps(&self) -> f64 {
        self.positive_bins as f64 * self.bin_ps
    }

    pub fn len(&self) -> usize {
        self.negative_bins + self.positive_bins
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of bins below zero; also the index of the first positive bin.
    pub fn negative_bins(&self) -> usize {
        self.negative_bins
    }

    pub fn positive_bins(&self) -> usize {
        self.positive_bins
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 - self.negative_bins as f64 + 0.5) * self.bin_ps
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.center(k)).collect()
    }

    /// Same limits extended by `extra` bins on both sides.
    pub(crate) fn widened(&self, extra: usize) -> Self {
        Self {
            tau_min_ps: self.tau_min_ps - extra as f64 * self.bin_ps,
            bin_ps: self.bin_ps,
            negative_bins: self.negative_bins + extra,
            positive_bins: self.positive_bins + extra,
        }
    }

    /// Each bin split into `factor` sub-bins.
    pub(crate) fn refined(&self, factor: usize) -> Self {
        Self {
            tau_min_ps: self.tau_min_ps,
            bin_ps: self.bin_ps / factor as f64,
            negative_bins: self.negative_bins * factor,
            positive_bins: self.positive_bins * factor,
        }
    }

    /// Recover the grid from a list of bin centres.
    pub fn from_centers(centers: &[f64]) -> Result<Self> {
        if centers.len() < 2 {
            return Err(invalid("at least two bin centres are required"));
        }
        let bin = centers[1] - centers[0];
        let first = centers[0] - 0.5 * bin;
        let last = centers[centers.len() - 1] + 0.5 * bin;
        let grid = Self::new(first, last, bin)?;
        if grid.len() != centers.len() {
            return Err(invalid("bin centres do not form a uniform grid"));
        }
        for (k, &c) in centers.iter().enumerate() {
            if (c - grid.center(k)).abs() > 1e-6 * bin {
                return Err(invalid(format!("bin centre {c} breaks grid uniformity")));
            }
        }
        Ok(grid)
    }
}

fn whole_bins(span: f64, bin: f64) -> Option<usize> {
    let n = span / bin;
    let r = n.round();
    ((n - r).abs() <= GRID_ALIGNMENT_TOL * n.max(1.0) && r >= 1.0).then_some(r as usize)
}

/// Provenance of a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveMeta {
    pub p1: Option<PolarizationSetting>,
    pub p2: Option<PolarizationSetting>,
    pub model_hash: u64,
    pub convolved: bool,
    pub irf_fwhm_ps: Option<f64>,
}

impl CurveMeta {
    pub fn unlabelled() -> Self {
        Self {
            p1: None,
            p2: None,
            model_hash: 0,
            convolved: false,
            irf_fwhm_ps: None,
        }
    }
}

/// A g² curve sampled at bin centres of a [`TauGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationCurve {
    grid: TauGrid,
    values: Vec<f64>,
    meta: CurveMeta,
}

impl CorrelationCurve {
    pub fn new(grid: TauGrid, values: Vec<f64>, meta: CurveMeta) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "curve has {} values for a grid of {} bins",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite curve value {v}")));
        }
        Ok(Self { grid, values, meta })
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn tau_ps(&self) -> Vec<f64> {
        self.grid.centers()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &CurveMeta {
        &self.meta
    }

    pub fn is_convolved(&self) -> bool {
        self.meta.convolved
    }

    /// Values at negative delays.
    pub fn negative_half(&self) -> &[f64] {
        &self.values[..self.grid.negative_bins()]
    }

    /// Values at positive delays.
    pub fn positive_half(&self) -> &[f64] {
        &self.values[self.grid.negative_bins()..]
    }

    /// Value in the bin whose centre is closest to `tau_ps`.
    pub fn value_near(&self, tau_ps: f64) -> Option<f64> {
        let k = ((tau_ps - self.grid.tau_min_ps()) / self.grid.bin_ps()).floor();
        (k >= 0.0 && (k as usize) < self.values.len()).then(|| self.values[k as usize])
    }

    pub(crate) fn into_parts(self) -> (TauGrid, Vec<f64>, CurveMeta) {
        (self.grid, self.values, self.meta)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(24 * (self.values.len() + 1));
        s.push_str("tau_ps,g2\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{},{}", self.grid.center(k), v);
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_csv_string().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    /// Parse the `tau_ps,g2` format written by [`Self::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "tau_ps,g2" => {}
            _ => {
                return Err(Error::Parse {
                    location: "line 1".into(),
                    message: "expected header 'tau_ps,g2'".into(),
                })
            }
        }
        let mut taus = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |m: &str| Error::Parse {
                location: format!("line {}", i + 1),
                message: m.to_string(),
            };
            let (t, v) = line.split_once(',').ok_or_else(|| err("expected two fields"))?;
            taus.push(t.trim().parse::<f64>().map_err(|_| err("bad tau_ps"))?);
            values.push(v.trim().parse::<f64>().map_err(|_| err("bad g2"))?);
        }
        let grid = TauGrid::from_centers(&taus)?;
        Self::new(grid, values, CurveMeta::unlabelled())
    }
}
