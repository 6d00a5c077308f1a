use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qdcascade::cascade::{
    canonical_polarization, nanowire_lifetime, parse_pair, spherical_dot_lifetime, LifetimeInputs,
    PolarizationLabel,
};
use qdcascade::fitting::{FitParameter, FitWindow, FreeParameter};
use qdcascade::montecarlo::{simulate_stream_chunked, DetectorConfig};
use qdcascade::timetag::{parse_timetags, write_timetags, TimeTagFormat};
use qdcascade::{
    build_model, correlate, fit, CascadeModel, FitOptions, FitProblem, G2Evaluator, Histogram, ModelConfig,
    TauGrid,
};

use crate::args::*;
use crate::failure::{Failure, InputContext, Outcome};
use crate::svg::tomography_svg;

fn load_config(path: &Path) -> Outcome<ModelConfig> {
    ModelConfig::load(path).input(&format!("config {}", path.display()))
}

fn load_model(config: &ModelConfig) -> Outcome<CascadeModel> {
    let model = build_model(config.params()).input("model parameters")?;
    Ok(model)
}

fn evaluator(config: &ModelConfig, model: &CascadeModel) -> Outcome<G2Evaluator> {
    Ok(G2Evaluator::new(model)?.with_herald_conjugate(config.herald_conjugate))
}

fn pair(s: &str) -> Outcome<(PolarizationLabel, PolarizationLabel)> {
    parse_pair(s).map_err(|e| Failure::usage(format!("--pol: {e}")))
}

fn grid(tau_min: f64, tau_max: f64, bin: f64) -> Outcome<TauGrid> {
    if !(tau_min < tau_max) {
        return Err(Failure::usage(format!(
            "--tau-min ({tau_min}) must be below --tau-max ({tau_max})"
        )));
    }
    if !(bin > 0.0) {
        return Err(Failure::usage(format!("--bin must be > 0, got {bin}")));
    }
    TauGrid::new(tau_min, tau_max, bin).map_err(|e| Failure::usage(e.to_string()))
}

/// `--irf` wins over the config; zero means no convolution.
fn irf(flag: Option<f64>, config: &ModelConfig) -> Outcome<Option<f64>> {
    let fwhm = flag.unwrap_or(config.irf_fwhm_ps);
    if !(fwhm.is_finite() && fwhm >= 0.0) {
        return Err(Failure::usage(format!("IRF FWHM must be >= 0, got {fwhm}")));
    }
    Ok((fwhm > 0.0).then_some(fwhm))
}

pub fn simulate(a: SimulateArgs) -> Outcome {
    let grid = grid(a.tau_min, a.tau_max, a.bin)?;
    let (p1, p2) = pair(&a.pol)?;
    let config = load_config(&a.config)?;
    let irf = irf(a.irf, &config)?;
    let model = load_model(&config)?;
    let ev = evaluator(&config, &model)?;
    let (s1, s2) = (canonical_polarization(p1), canonical_polarization(p2));
    let curve = match irf {
        Some(fwhm) => ev.convolved_curve(&s1, &s2, config.offsets(), &grid, fwhm)?,
        None => ev.curve(&s1, &s2, config.offsets(), &grid)?,
    };
    curve.write_csv(&a.out)?;
    Ok(())
}

pub fn tomography(a: TomographyArgs) -> Outcome {
    let grid = grid(a.tau_min, a.tau_max, a.bin)?;
    let config = load_config(&a.config)?;
    let irf = irf(a.irf, &config)?;
    let model = load_model(&config)?;
    let tomography = evaluator(&config, &model)?.tomography(config.offsets(), &grid, irf)?;
    fs::create_dir_all(&a.out_dir).map_err(Failure::data)?;
    for (p1, p2, curve) in tomography.iter() {
        curve.write_csv(a.out_dir.join(format!("{p1}{p2}.csv")))?;
    }
    if a.svg {
        fs::write(a.out_dir.join("tomography.svg"), tomography_svg(&tomography)).map_err(Failure::data)?;
    }
    Ok(())
}

/// Fixed-point for occupations of order 1e-3 and above, scientific below.
fn occupation(v: f64) -> String {
    if v.abs() >= 1e-3 {
        format!("{v:.4}")
    } else {
        format!("{v:.2e}")
    }
}

pub fn steady_state(a: ConfigArg) -> Outcome<String> {
    let config = load_config(&a.config)?;
    let model = load_model(&config)?;
    let rho = model.steady_state()?;
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} occupation", "state");
    for (label, p) in model.basis().labels().iter().zip(rho.populations()) {
        let _ = writeln!(out, "{label:<8} {}", occupation(p));
    }
    let _ = writeln!(out, "XX/X line intensity ratio {:.4}", model.line_intensity_ratio(&rho));
    if let Some(top) = model.truncation_warning(&rho) {
        eprintln!("warning: highest rung holds {top:.2e}; consider a larger n_max");
    }
    Ok(out)
}

pub fn lifetimes(a: LifetimeArgs) -> Outcome<String> {
    let inputs = LifetimeInputs {
        e_ex_ev: a.exciton_energy_ev,
        n_m: a.index,
        f: a.oscillator_strength,
        d_w_nm: a.wire_diameter_nm,
        lambda_m_nm: a.wavelength_nm,
    };
    if !(inputs.d_w_nm.is_finite() && inputs.d_w_nm > 0.0) {
        return Err(Failure::usage(format!("--wire-diameter-nm must be > 0, got {}", inputs.d_w_nm)));
    }
    let tau_r = spherical_dot_lifetime(&inputs)?;
    let lambda = inputs.lambda_m_nm();
    let tau_x = nanowire_lifetime(tau_r, inputs.d_w_nm, lambda);
    Ok(format!(
        "tau_r_ns {tau_r:.4}\nlambda_m_nm {lambda:.2}\ntau_x_ns {tau_x:.4}\n"
    ))
}

pub fn mc(a: McArgs) -> Outcome<String> {
    let (p1, p2) = pair(&a.pol)?;
    if !(a.duration_ps.is_finite() && a.duration_ps >= 1.0 && a.duration_ps < u64::MAX as f64) {
        return Err(Failure::usage(format!("--duration-ps out of range: {}", a.duration_ps)));
    }
    let duration = a.duration_ps.round() as u64;
    let config = load_config(&a.config)?;
    let model = load_model(&config)?;
    let mut detector = DetectorConfig::new(canonical_polarization(p1), canonical_polarization(p2), a.eff, a.seed)
        .with_offsets(config.offsets());
    if let Some(e2) = a.eff2 {
        detector.efficiency2 = e2;
    }
    if let Some(j) = a.jitter_fwhm {
        detector = detector.with_jitter(j);
    }
    let stream = simulate_stream_chunked(&model, &detector, duration, a.chunks)?;
    write_timetags(&stream, &a.out, TimeTagFormat::from_path(&a.out))?;
    Ok(format!(
        "events {} (channel 1: {}, channel 2: {}) over {duration} ps\n",
        stream.len(),
        stream.count(1),
        stream.count(2)
    ))
}

pub fn correlate_tags(a: CorrelateArgs) -> Outcome {
    let stream = parse_timetags(&a.tags, TimeTagFormat::from_path(&a.tags))
        .input(&format!("time tags {}", a.tags.display()))?;
    let mut h = correlate(&stream, a.start_channel, a.stop_channel, a.bin, a.window_ps).map_err(|e| match e {
        qdcascade::Error::EmptyChannel(_) => Failure::data(e),
        other => other.into(),
    })?;
    if a.renormalize_plateau {
        h = h.renormalize_plateau()?;
    }
    h.write_csv(&a.out)?;
    Ok(())
}

/// Histogram files `<P1><P2>.csv` in `dir`, in name order.
fn read_panels(dir: &Path) -> Outcome<Vec<(PolarizationLabel, PolarizationLabel, Histogram)>> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::data(format!("data dir {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut panels = Vec::new();
    for path in files {
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        let Ok((p1, p2)) = parse_pair(stem) else {
            continue;
        };
        if stem.chars().any(|c| c.is_ascii_lowercase()) {
            continue;
        }
        let h = Histogram::read_csv(&path).input(&path.display().to_string())?;
        panels.push((p1, p2, h));
    }
    if panels.is_empty() {
        return Err(Failure::data(format!(
            "no histogram files named like HH.csv in {}",
            dir.display()
        )));
    }
    Ok(panels)
}

pub fn fit_data(a: FitArgs) -> Outcome<String> {
    if a.starts == 0 {
        return Err(Failure::usage("--starts must be at least 1"));
    }
    let config = load_config(&a.config)?;
    let free = a
        .free
        .iter()
        .map(|name| {
            let p: FitParameter = name.parse().map_err(|e| Failure::usage(format!("--free: {e}")))?;
            Ok(FreeParameter::new(p, p.get(&config)))
        })
        .collect::<Outcome<Vec<_>>>()?;
    let mut window = FitWindow::new(
        a.window_lo.unwrap_or(f64::NEG_INFINITY),
        a.window_hi.unwrap_or(f64::INFINITY),
    );
    if let Some(cut) = a.exclude_below {
        window = window.excluding_below(cut);
    }
    let panels = read_panels(&a.data_dir)?;
    let problem = FitProblem::new(panels, config, free, window).input("fit problem")?;
    let options = FitOptions {
        starts: a.starts,
        seed: a.seed,
        ..FitOptions::default()
    };
    let result = fit(&problem, &options)?;

    let report_dir = match a.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let residuals = result.write_residuals(&report_dir)?;
    result.write_report(&a.out, &residuals)?;

    let mut out = String::new();
    for v in &result.values {
        match v.uncertainty {
            Some(s) => writeln!(out, "{} {:.6e} +/- {:.2e}", v.parameter, v.value, s),
            None => writeln!(out, "{} {:.6e} +/- n/a", v.parameter, v.value),
        }
        .expect("write to string");
    }
    let _ = writeln!(out, "chi2/dof {:.4} ({} dof)", result.reduced_chi2(), result.dof);
    if !result.converged {
        eprint!("{out}");
        return Err(Failure {
            status: crate::failure::ExitStatus::Numerical,
            message: format!("fit did not converge; report written to {}", a.out.display()),
        });
    }
    Ok(out)
}
