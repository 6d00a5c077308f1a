//! Weighted least-squares fit of the convolved model to measured
//! polarization-resolved histograms.
//!
//! The objective is `χ² = Σ_panels Σ_bins ((g2_data − g2_model)/σ)²` over
//! the bins whose centres fall in the fit window. Any subset of
//! {G, Δθ, Δφ, Δ, τ_H, τ_V} may be free; the rest stay at the values of the
//! base [`ModelConfig`].

mod optimize;
mod synthetic;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cascade::{build_model, canonical_polarization, ModelConfig, PolarizationLabel};
use crate::correlation::{G2Evaluator, TauGrid};
use crate::error::{ensure_finite, Error, Result};
use crate::timetag::Histogram;

pub use synthetic::synthetic_histograms;

use optimize::{gauss_newton, hessian, nelder_mead, Minimum};

/// Model quantities that can be fitted. Angles are in radians, rates in
/// ps⁻¹, energies in μeV and lifetimes in ps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FitParameter {
    GRate,
    DTheta,
    DPhi,
    Delta,
    TauH,
    TauV,
}

impl FitParameter {
    pub const ALL: [FitParameter; 6] = [
        Self::GRate,
        Self::DTheta,
        Self::DPhi,
        Self::Delta,
        Self::TauH,
        Self::TauV,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::GRate => "g_rate",
            Self::DTheta => "dtheta",
            Self::DPhi => "dphi",
            Self::Delta => "delta_uev",
            Self::TauH => "tau_h_ps",
            Self::TauV => "tau_v_ps",
        }
    }

    /// Search bounds used when none are given.
    pub fn default_bounds(self) -> (f64, f64) {
        match self {
            Self::GRate => (1e-7, 1e-2),
            Self::DTheta => (-FRAC_PI_2, FRAC_PI_2),
            Self::DPhi => (-PI, PI),
            Self::Delta => (0.0, 1000.0),
            Self::TauH | Self::TauV => (10.0, 1e5),
        }
    }

    /// Admissible range; bounds must lie inside it.
    fn admissible(self, lower: f64, upper: f64) -> bool {
        match self {
            Self::GRate | Self::TauH | Self::TauV => lower > 0.0,
            Self::DTheta => lower >= -FRAC_PI_2 && upper <= FRAC_PI_2,
            Self::DPhi => lower >= -PI && upper <= PI,
            Self::Delta => lower >= 0.0,
        }
    }

    /// Typical variation, the unit of the scaled search coordinates.
    fn scale(self, initial: f64) -> f64 {
        match self {
            Self::DTheta | Self::DPhi => 0.05 * PI,
            Self::Delta => (0.1 * initial.abs()).max(1.0),
            _ => 0.1 * initial.abs(),
        }
    }

    pub fn get(self, c: &ModelConfig) -> f64 {
        match self {
            Self::GRate => c.g_rate_per_ps,
            Self::DTheta => c.dtheta_pi * PI,
            Self::DPhi => c.dphi_pi * PI,
            Self::Delta => c.delta_uev,
            Self::TauH => c.tau_h_ps,
            Self::TauV => c.tau_v_ps,
        }
    }

    pub fn set(self, c: &mut ModelConfig, v: f64) {
        match self {
            Self::GRate => c.g_rate_per_ps = v,
            Self::DTheta => c.dtheta_pi = v / PI,
            Self::DPhi => c.dphi_pi = v / PI,
            Self::Delta => c.delta_uev = v,
            Self::TauH => c.tau_h_ps = v,
            Self::TauV => c.tau_v_ps = v,
        }
    }
}

impl fmt::Display for FitParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" | "g_rate" | "g_rate_per_ps" => Ok(Self::GRate),
            "dtheta" => Ok(Self::DTheta),
            "dphi" => Ok(Self::DPhi),
            "delta" | "delta_uev" => Ok(Self::Delta),
            "tau_h" | "tau_h_ps" => Ok(Self::TauH),
            "tau_v" | "tau_v_ps" => Ok(Self::TauV),
            other => Err(Error::Config(format!("unknown fit parameter '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeParameter {
    pub parameter: FitParameter,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParameter {
    pub fn new(parameter: FitParameter, initial: f64) -> Self {
        let (lower, upper) = parameter.default_bounds();
        Self {
            parameter,
            initial,
            lower,
            upper,
        }
    }

    pub fn with_bounds(mut self, lower: f64, upper: f64) -> Self {
        self.lower = lower;
        self.upper = upper;
        self
    }

    fn validate(&self) -> Result<()> {
        let name = self.parameter.name();
        ensure_finite(name, self.initial)?;
        if !(self.lower < self.upper) || !self.parameter.admissible(self.lower, self.upper) {
            return Err(Error::Config(format!(
                "invalid bounds [{}, {}] for {name}",
                self.lower, self.upper
            )));
        }
        if !(self.lower..=self.upper).contains(&self.initial) {
            return Err(Error::Config(format!(
                "initial {name} = {} lies outside [{}, {}]",
                self.initial, self.lower, self.upper
            )));
        }
        Ok(())
    }
}

/// Bins enter the fit when `lo ≤ τ ≤ hi` and `|τ| ≥ exclude_below`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub lo_ps: f64,
    pub hi_ps: f64,
    pub exclude_below_ps: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            lo_ps: f64::NEG_INFINITY,
            hi_ps: f64::INFINITY,
            exclude_below_ps: 0.0,
        }
    }
}

impl FitWindow {
    pub fn new(lo_ps: f64, hi_ps: f64) -> Self {
        Self {
            lo_ps,
            hi_ps,
            exclude_below_ps: 0.0,
        }
    }

    pub fn excluding_below(mut self, abs_tau_ps: f64) -> Self {
        self.exclude_below_ps = abs_tau_ps;
        self
    }

    pub fn contains(&self, tau_ps: f64) -> bool {
        tau_ps >= self.lo_ps && tau_ps <= self.hi_ps && tau_ps.abs() >= self.exclude_below_ps
    }
}

#[derive(Clone, Debug)]
struct Panel {
    p1: PolarizationLabel,
    p2: PolarizationLabel,
    histogram: Histogram,
}

#[derive(Clone, Debug)]
pub struct FitProblem {
    panels: Vec<Panel>,
    grid: TauGrid,
    bins: Vec<usize>,
    base: ModelConfig,
    free: Vec<FreeParameter>,
    window: FitWindow,
}

impl FitProblem {
    /// Panels are held in label order, so the objective does not depend on
    /// the order in which they are supplied.
    pub fn new(
        data: impl IntoIterator<Item = (PolarizationLabel, PolarizationLabel, Histogram)>,
        base: ModelConfig,
        free: Vec<FreeParameter>,
        window: FitWindow,
    ) -> Result<Self> {
        let mut panels: Vec<Panel> = data
            .into_iter()
            .map(|(p1, p2, histogram)| Panel { p1, p2, histogram })
            .collect();
        panels.sort_by_key(|p| (p.p1, p.p2));
        if panels.is_empty() {
            return Err(Error::Config("no data panels".into()));
        }
        if let Some(w) = panels.windows(2).find(|w| (w[0].p1, w[0].p2) == (w[1].p1, w[1].p2)) {
            return Err(Error::Config(format!("panel {}{} given twice", w[0].p1, w[0].p2)));
        }
        let grid = *panels[0].histogram.grid();
        if panels.iter().any(|p| *p.histogram.grid() != grid) {
            return Err(Error::Config("all panels must share one delay grid".into()));
        }
        if free.is_empty() {
            return Err(Error::Config("no free parameters".into()));
        }
        for (i, f) in free.iter().enumerate() {
            f.validate()?;
            if free[..i].iter().any(|g| g.parameter == f.parameter) {
                return Err(Error::Config(format!("{} declared free twice", f.parameter)));
            }
        }
        if window.lo_ps.is_nan() || window.hi_ps.is_nan() || !(window.exclude_below_ps >= 0.0) {
            return Err(Error::Config("invalid fit window".into()));
        }
        let bins: Vec<usize> = (0..grid.len()).filter(|&k| window.contains(grid.center(k))).collect();
        let problem = Self {
            panels,
            grid,
            bins,
            base,
            free,
            window,
        };
        if problem.fitted_bins() <= problem.free.len() {
            return Err(Error::Config(format!(
                "{} fitted bins leave no degrees of freedom for {} parameters",
                problem.fitted_bins(),
                problem.free.len()
            )));
        }
        Ok(problem)
    }

    pub fn free(&self) -> &[FreeParameter] {
        &self.free
    }

    pub fn base(&self) -> &ModelConfig {
        &self.base
    }

    pub fn window(&self) -> FitWindow {
        self.window
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn panel_labels(&self) -> Vec<(PolarizationLabel, PolarizationLabel)> {
        self.panels.iter().map(|p| (p.p1, p.p2)).collect()
    }

    pub fn fitted_bins(&self) -> usize {
        self.bins.len() * self.panels.len()
    }

    pub fn dof(&self) -> usize {
        self.fitted_bins() - self.free.len()
    }

    pub fn initial_values(&self) -> Vec<f64> {
        self.free.iter().map(|f| f.initial).collect()
    }

    /// Base configuration with the free parameters set to `values`.
    pub fn config_at(&self, values: &[f64]) -> ModelConfig {
        let mut c = self.base.clone();
        for (f, &v) in self.free.iter().zip(values) {
            f.parameter.set(&mut c, v);
        }
        c
    }

    /// Model curves of every panel over the full grid.
    pub fn model_values(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let c = self.config_at(values);
        let model = build_model(c.params())?;
        let ev = G2Evaluator::new(&model)?.with_herald_conjugate(c.herald_conjugate);
        let offsets = c.offsets();
        let weights = self
            .panels
            .iter()
            .map(|p| ev.panel(&canonical_polarization(p.p1), &canonical_polarization(p.p2), offsets))
            .collect::<Result<Vec<_>>>()?;
        let irf = (c.irf_fwhm_ps > 0.0).then_some(c.irf_fwhm_ps);
        ev.panel_values(&weights, &self.grid, irf)
    }

    /// `(data − model)/σ` over the fitted bins, per panel.
    pub fn residuals(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        let model = self.model_values(values)?;
        Ok(self
            .panels
            .iter()
            .zip(&model)
            .map(|(p, m)| {
                let h = &p.histogram;
                self.bins
                    .iter()
                    .map(|&k| (h.g2()[k] - m[k]) / h.sigma()[k])
                    .collect()
            })
            .collect())
    }

    fn check_values(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.free.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} free parameters",
                values.len(),
                self.free.len()
            )));
        }
        for (f, &v) in self.free.iter().zip(values) {
            if !(f.lower..=f.upper).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{} = {v} lies outside [{}, {}]",
                    f.parameter, f.lower, f.upper
                )));
            }
        }
        Ok(())
    }

    pub fn chi_squared(&self, values: &[f64]) -> Result<f64> {
        self.check_values(values)?;
        self.objective(values)
    }

    fn objective(&self, values: &[f64]) -> Result<f64> {
        Ok(self
            .residuals(values)?
            .iter()
            .flatten()
            .map(|r| r * r)
            .sum())
    }
}

pub fn chi_squared(problem: &FitProblem, values: &[f64]) -> Result<f64> {
    problem.chi_squared(values)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    /// Number of starting points; the first is the problem's initial point.
    pub starts: usize,
    /// Seed of the jittered starting points.
    pub seed: u64,
    /// Objective evaluations allowed per simplex run.
    pub max_evaluations: usize,
    /// Relative spread of simplex values at convergence.
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            starts: 5,
            seed: 0,
            max_evaluations: 5000,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedValue {
    pub parameter: FitParameter,
    pub value: f64,
    /// 1σ, absent when the Hessian is not positive definite.
    pub uncertainty: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PanelResiduals {
    pub p1: PolarizationLabel,
    pub p2: PolarizationLabel,
    pub chi2: f64,
    pub tau_ps: Vec<f64>,
    /// `(data − model)/σ`.
    pub residuals: Vec<f64>,
}

impl PanelResiduals {
    pub fn to_csv_string(&self) -> String {
        let mut s = String::from("tau_ps,residual\n");
        for (t, r) in self.tau_ps.iter().zip(&self.residuals) {
            let _ = writeln!(s, "{t},{r}");
        }
        s
    }

    pub fn file_name(&self) -> String {
        format!("residual_{}{}.csv", self.p1.ascii(), self.p2.ascii())
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub values: Vec<FittedValue>,
    pub chi2: f64,
    pub dof: usize,
    pub panels: Vec<PanelResiduals>,
    /// Whether the best simplex run met its tolerance within budget.
    pub converged: bool,
    pub uncertainties_reliable: bool,
    pub covariance: Option<DMatrix<f64>>,
    pub evaluations: usize,
    /// Model configuration at the optimum.
    pub config: ModelConfig,
    pub window: FitWindow,
}

impl FitResult {
    pub fn value(&self, p: FitParameter) -> Option<f64> {
        self.values.iter().find(|v| v.parameter == p).map(|v| v.value)
    }

    pub fn uncertainty(&self, p: FitParameter) -> Option<f64> {
        self.values
            .iter()
            .find(|v| v.parameter == p)
            .and_then(|v| v.uncertainty)
    }

    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof as f64
    }

    /// Steady-state XX/X line-intensity ratio at the optimum.
    pub fn line_intensity_ratio(&self) -> Result<f64> {
        let model = build_model(self.config.params())?;
        let rho = model.steady_state()?;
        Ok(model.line_intensity_ratio(&rho))
    }

    /// One `residual_<P1><P2>.csv` per panel in `dir`.
    pub fn write_residuals(&self, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.panels
            .iter()
            .map(|p| {
                let path = dir.join(p.file_name());
                std::fs::write(&path, p.to_csv_string())?;
                Ok(path)
            })
            .collect()
    }

    /// JSON report; `residual_files` are listed per panel when given.
    pub fn report(&self, residual_files: &[PathBuf]) -> Value {
        let mut parameters = serde_json::Map::new();
        for v in &self.values {
            parameters.insert(
                v.parameter.name().to_string(),
                json!({ "value": v.value, "uncertainty": v.uncertainty }),
            );
        }
        let mut derived = serde_json::Map::new();
        for v in &self.values {
            let entry = match v.parameter {
                FitParameter::GRate => Some((
                    "inverse_g_ns",
                    1e-3 / v.value,
                    v.uncertainty.map(|u| 1e-3 * u / (v.value * v.value)),
                )),
                FitParameter::DTheta => Some(("dtheta_pi", v.value / PI, v.uncertainty.map(|u| u / PI))),
                FitParameter::DPhi => Some(("dphi_pi", v.value / PI, v.uncertainty.map(|u| u / PI))),
                _ => None,
            };
            if let Some((name, value, unc)) = entry {
                derived.insert(name.into(), json!({ "value": value, "uncertainty": unc }));
            }
        }
        let panels: Vec<Value> = self
            .panels
            .iter()
            .enumerate()
            .map(|(i, p)| {
                json!({
                    "p1": p.p1.ascii().to_string(),
                    "p2": p.p2.ascii().to_string(),
                    "bins": p.residuals.len(),
                    "chi2": p.chi2,
                    "residual_csv": residual_files.get(i).map(|f| f.display().to_string()),
                })
            })
            .collect();
        let finite = |x: f64| x.is_finite().then_some(x);
        let c = &self.config;
        json!({
            "parameters": parameters,
            "derived": derived,
            "chi2": self.chi2,
            "dof": self.dof,
            "reduced_chi2": self.reduced_chi2(),
            "converged": self.converged,
            "uncertainties_reliable": self.uncertainties_reliable,
            "evaluations": self.evaluations,
            "line_intensity_ratio": self.line_intensity_ratio().ok(),
            "model": {
                "delta_uev": c.delta_uev,
                "tau_h_ps": c.tau_h_ps,
                "tau_v_ps": c.tau_v_ps,
                "g_rate_per_ps": c.g_rate_per_ps,
                "n_max": c.n_max,
                "dtheta_pi": c.dtheta_pi,
                "dphi_pi": c.dphi_pi,
                "irf_fwhm_ps": c.irf_fwhm_ps,
                "herald_conjugate": c.herald_conjugate,
            },
            "window": {
                "lo_ps": finite(self.window.lo_ps),
                "hi_ps": finite(self.window.hi_ps),
                "exclude_below_ps": self.window.exclude_below_ps,
            },
            "weights": "equal",
            "panels": panels,
        })
    }

    pub fn write_report(&self, path: impl AsRef<Path>, residual_files: &[PathBuf]) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.report(residual_files))
            .map_err(|e| Error::Data(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// Maps scaled search coordinates to clamped parameter values.
struct Scaling {
    origin: Vec<f64>,
    scale: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Scaling {
    fn new(free: &[FreeParameter]) -> Self {
        Self {
            origin: free.iter().map(|f| f.initial).collect(),
            scale: free
                .iter()
                .map(|f| {
                    let s = f.parameter.scale(f.initial);
                    if s > 0.0 {
                        s
                    } else {
                        0.1 * (f.upper - f.lower)
                    }
                })
                .collect(),
            lower: free.iter().map(|f| f.lower).collect(),
            upper: free.iter().map(|f| f.upper).collect(),
        }
    }

    fn natural(&self, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|i| (self.origin[i] + self.scale[i] * x[i]).clamp(self.lower[i], self.upper[i]))
            .collect()
    }

    fn scaled(&self, p: &[f64]) -> Vec<f64> {
        (0..p.len())
            .map(|i| (p[i] - self.origin[i]) / self.scale[i])
            .collect()
    }
}

/// Nelder–Mead from each start, Gauss–Newton polish, best-of selection,
/// then uncertainties from twice the inverse finite-difference Hessian.
pub fn fit(problem: &FitProblem, options: &FitOptions) -> Result<FitResult> {
    if options.starts == 0 {
        return Err(Error::Config("at least one start is required".into()));
    }
    let scaling = Scaling::new(&problem.free);
    let n = problem.free.len();
    let starts: Vec<Vec<f64>> = (0..options.starts)
        .map(|i| {
            if i == 0 {
                return vec![0.0; n];
            }
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(i as u64);
            let jitter: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            scaling.scaled(&scaling.natural(&jitter))
        })
        .collect();
    let runs: Vec<Minimum> = starts
        .par_iter()
        .map(|x0| {
            let mut objective = |x: &[f64]| {
                problem
                    .objective(&scaling.natural(x))
                    .unwrap_or(f64::INFINITY)
            };
            let simplex = nelder_mead(&mut objective, x0, options.rel_tol, options.max_evaluations);
            let mut residuals = |x: &[f64]| {
                problem
                    .residuals(&scaling.natural(x))
                    .ok()
                    .map(|r| r.into_iter().flatten().collect::<Vec<f64>>())
            };
            gauss_newton(&mut residuals, simplex, 20)
        })
        .collect();
    let evaluations: usize = runs.iter().map(|m| m.evaluations).sum();
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.f < a.f { b } else { a })
        .expect("at least one start");
    if !best.f.is_finite() {
        return Err(Error::Numerical("objective is not finite at any start".into()));
    }
    let values = scaling.natural(&best.x);

    let steps: Vec<f64> = scaling.scale.iter().map(|s| 1e-3 * s).collect();
    let mut objective = |p: &[f64]| problem.objective(p).unwrap_or(f64::NAN);
    let h = hessian(&mut objective, &values, &steps);
    let covariance = (h.iter().all(|v| v.is_finite()))
        .then(|| h.clone().cholesky())
        .flatten()
        .map(|c| c.inverse() * 2.0);
    let uncertainties_reliable = covariance.is_some();

    let residuals = problem.residuals(&values)?;
    let tau: Vec<f64> = problem.bins.iter().map(|&k| problem.grid.center(k)).collect();
    let panels = problem
        .panels
        .iter()
        .zip(residuals)
        .map(|(p, r)| PanelResiduals {
            p1: p.p1,
            p2: p.p2,
            chi2: r.iter().map(|v| v * v).sum(),
            tau_ps: tau.clone(),
            residuals: r,
        })
        .collect::<Vec<_>>();
    let chi2 = panels.iter().map(|p| p.chi2).sum();
    let fitted = problem
        .free
        .iter()
        .enumerate()
        .map(|(i, f)| FittedValue {
            parameter: f.parameter,
            value: values[i],
            uncertainty: covariance.as_ref().map(|c| c[(i, i)].max(0.0).sqrt()),
        })
        .collect();
    Ok(FitResult {
        values: fitted,
        chi2,
        dof: problem.dof(),
        panels,
        converged: best.converged,
        uncertainties_reliable,
        covariance,
        evaluations,
        config: problem.config_at(&values),
        window: problem.window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use PolarizationLabel::*;

    fn grid() -> TauGrid {
        TauGrid::new(-1000.0, 3000.0, 10.0).unwrap()
    }

    fn truth() -> ModelConfig {
        ModelConfig::reference()
    }

    fn clean(panels: &[(PolarizationLabel, PolarizationLabel)]) -> Vec<(PolarizationLabel, PolarizationLabel, Histogram)> {
        synthetic_histograms(&truth(), panels, &grid(), 400.0, None).unwrap()
    }

    fn free_g(initial: f64) -> Vec<FreeParameter> {
        vec![FreeParameter::new(FitParameter::GRate, initial)]
    }

    #[test]
    fn noise_free_data_has_zero_objective() {
        let data = clean(&[(H, H), (D, R), (R, L)]);
        let p = FitProblem::new(data, truth(), free_g(1.25e-4), FitWindow::default()).unwrap();
        assert!(p.chi_squared(&[1.25e-4]).unwrap() < 1e-8);
        let c0 = p.chi_squared(&[1.25e-4]).unwrap();
        let c1 = p.chi_squared(&[1.1 * 1.25e-4]).unwrap();
        assert!(c1 > c0);
    }

    #[test]
    fn single_panel_rate_recovered() {
        let data = clean(&[(H, V)]);
        let p = FitProblem::new(data, truth(), free_g(1.0e-4), FitWindow::default()).unwrap();
        let r = fit(&p, &FitOptions { starts: 1, ..Default::default() }).unwrap();
        let g = r.value(FitParameter::GRate).unwrap();
        assert!((g / 1.25e-4 - 1.0).abs() < 1e-4, "{g}");
    }

    #[test]
    fn panel_order_does_not_matter() {
        let data = clean(&[(H, H), (D, R), (V, L)]);
        let mut reversed = data.clone();
        reversed.reverse();
        let a = FitProblem::new(data, truth(), free_g(1.25e-4), FitWindow::default()).unwrap();
        let b = FitProblem::new(reversed, truth(), free_g(1.25e-4), FitWindow::default()).unwrap();
        assert_eq!(a.chi_squared(&[1.3e-4]).unwrap(), b.chi_squared(&[1.3e-4]).unwrap());
    }

    #[test]
    fn configuration_errors() {
        let data = clean(&[(H, H)]);
        let base = truth();
        assert!(FitProblem::new(data.clone(), base.clone(), vec![], FitWindow::default()).is_err());
        let dup = vec![free_g(1e-4)[0], free_g(2e-4)[0]];
        assert!(FitProblem::new(data.clone(), base.clone(), dup, FitWindow::default()).is_err());
        let bad = vec![FreeParameter::new(FitParameter::DTheta, 0.0).with_bounds(-2.0, 2.0)];
        assert!(FitProblem::new(data.clone(), base.clone(), bad, FitWindow::default()).is_err());
        let outside = vec![FreeParameter::new(FitParameter::GRate, 1.0)];
        assert!(FitProblem::new(data.clone(), base.clone(), outside, FitWindow::default()).is_err());
        let narrow = FitWindow::new(0.0, 0.0);
        assert!(matches!(
            FitProblem::new(data.clone(), base.clone(), free_g(1e-4), narrow),
            Err(Error::Config(_))
        ));
        let p = FitProblem::new(data, base, free_g(1e-4), FitWindow::default()).unwrap();
        assert!(p.chi_squared(&[-1.0]).is_err());
    }

    #[test]
    fn window_selects_bins() {
        let w = FitWindow::new(-500.0, 500.0).excluding_below(100.0);
        assert!(w.contains(-500.0) && w.contains(100.0) && w.contains(-100.0));
        assert!(!w.contains(99.9) && !w.contains(500.1));
        let data = clean(&[(H, H)]);
        let p = FitProblem::new(data, truth(), free_g(1e-4), w).unwrap();
        assert_eq!(p.fitted_bins(), 80);
    }

    #[test]
    fn parameter_names_round_trip() {
        for p in FitParameter::ALL {
            assert_eq!(p.name().parse::<FitParameter>().unwrap(), p);
        }
        assert!("gamma".parse::<FitParameter>().is_err());
    }
}
