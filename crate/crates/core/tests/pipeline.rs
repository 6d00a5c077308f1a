mod common;

use common::reference_model;
use qdcascade::cascade::{canonical_polarization, PolarizationLabel};
use qdcascade::correlation::{G2Evaluator, TauGrid};
use qdcascade::fitting::{
    fit, synthetic_histograms, FitOptions, FitParameter, FitProblem, FitWindow, FreeParameter,
};
use qdcascade::montecarlo::{simulate_stream, simulate_stream_chunked, DetectorConfig};
use qdcascade::timetag::{
    correlate, parse_timetags, write_timetags, Histogram, TimeTagFormat, PLATEAU_RANGE_PS,
};
use qdcascade::ModelConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use PolarizationLabel::*;

fn detector(p1: PolarizationLabel, p2: PolarizationLabel, eff1: f64, eff2: f64, seed: u64) -> DetectorConfig {
    let mut c = DetectorConfig::new(canonical_polarization(p1), canonical_polarization(p2), eff1, seed)
        .with_offsets(ModelConfig::reference().offsets());
    c.efficiency2 = eff2;
    c
}

#[test]
fn simulated_stream_survives_both_encodings() {
    let m = reference_model();
    let s = simulate_stream(&m, &detector(D, R, 0.3, 0.3, 5), 20_000_000_000).unwrap();
    assert!(s.len() > 1000);
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("t.qdtt");
    let csv = dir.path().join("t.csv");
    write_timetags(&s, &bin, TimeTagFormat::Binary).unwrap();
    write_timetags(&s, &csv, TimeTagFormat::Csv).unwrap();
    let from_bin = parse_timetags(&bin, TimeTagFormat::Binary).unwrap();
    let from_csv = parse_timetags(&csv, TimeTagFormat::Csv).unwrap();
    assert_eq!(from_bin, s);
    assert_eq!(from_csv, s);
}

#[test]
fn long_delay_plateau_is_unity() {
    let m = reference_model();
    let s = simulate_stream(&m, &detector(H, H, 0.5, 0.5, 17), 200_000_000_000).unwrap();
    let h = correlate(&s, 1, 2, 1000, 50_000).unwrap();
    let (lo, hi) = PLATEAU_RANGE_PS;
    let plateau: Vec<f64> = h
        .tau_ps()
        .iter()
        .zip(h.g2())
        .filter(|(t, _)| (lo..=hi).contains(&t.abs()))
        .map(|(_, g)| *g)
        .collect();
    let mean = plateau.iter().sum::<f64>() / plateau.len() as f64;
    assert!((mean - 1.0).abs() < 0.02, "plateau mean {mean}");
}

#[test]
fn monte_carlo_histogram_follows_convolved_model() {
    let m = reference_model();
    let ev = G2Evaluator::new(&m).unwrap();
    for (p1, p2, seed) in [(H, H, 1), (D, R, 2)] {
        let cfg = detector(p1, p2, 0.02, 0.2, seed);
        let s = simulate_stream_chunked(&m, &cfg, 500_000_000_000, 4).unwrap();
        let h = correlate(&s, 1, 2, 10, 2000).unwrap();
        let curve = ev
            .convolved_curve(&cfg.p1, &cfg.p2, cfg.offsets, h.grid(), cfg.pair_irf_fwhm_ps())
            .unwrap();
        let chi2: f64 = (0..h.g2().len())
            .map(|k| ((h.g2()[k] - curve.values()[k]) / h.sigma()[k]).powi(2))
            .sum();
        let per_dof = chi2 / h.g2().len() as f64;
        assert!(per_dof < 1.5, "{p1}{p2}: chi2/dof = {per_dof}");
    }
}

fn truth() -> ModelConfig {
    ModelConfig {
        g_rate_per_ps: 1.0 / 8000.0,
        ..ModelConfig::reference()
    }
}

const PANELS: [(PolarizationLabel, PolarizationLabel); 6] = [(H, H), (H, V), (D, D), (D, R), (R, R), (R, L)];

fn grid() -> TauGrid {
    TauGrid::new(-2000.0, 3000.0, 10.0).unwrap()
}

fn free_three() -> Vec<FreeParameter> {
    vec![
        FreeParameter::new(FitParameter::GRate, 1.0 / 6000.0),
        FreeParameter::new(FitParameter::DTheta, 0.0),
        FreeParameter::new(FitParameter::DPhi, 0.0),
    ]
}

fn start_config() -> ModelConfig {
    ModelConfig {
        g_rate_per_ps: 1.0 / 6000.0,
        dtheta_pi: 0.0,
        dphi_pi: 0.0,
        ..truth()
    }
}

fn with_gaussian_noise(
    data: &[(PolarizationLabel, PolarizationLabel, Histogram)],
    seed: u64,
) -> Vec<(PolarizationLabel, PolarizationLabel, Histogram)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    data.iter()
        .map(|(a, b, h)| {
            let g2 = h
                .g2()
                .iter()
                .zip(h.sigma())
                .map(|(g, s)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    g + s * z
                })
                .collect();
            let noisy = Histogram::from_normalized(
                *h.grid(),
                h.counts().to_vec(),
                g2,
                h.sigma().to_vec(),
                h.acquisition(),
            )
            .unwrap();
            (*a, *b, noisy)
        })
        .collect()
}

#[test]
fn unit_gaussian_noise_gives_unit_reduced_chi2() {
    let clean = synthetic_histograms(&truth(), &PANELS, &grid(), 50.0, None).unwrap();
    let free = vec![FreeParameter::new(FitParameter::GRate, 1.0 / 8000.0)];
    let mut total = 0.0;
    let seeds = 20;
    for seed in 0..seeds {
        let p = FitProblem::new(with_gaussian_noise(&clean, seed), truth(), free.clone(), FitWindow::default())
            .unwrap();
        total += p.chi_squared(&[1.0 / 8000.0]).unwrap() / p.dof() as f64;
    }
    let mean = total / seeds as f64;
    assert!((mean - 1.0).abs() < 0.1, "mean chi2/dof {mean}");
}

#[test]
fn clean_fit_is_window_robust() {
    let clean = synthetic_histograms(&truth(), &PANELS, &grid(), 35.0, None).unwrap();
    let options = FitOptions { starts: 2, ..Default::default() };
    let full = FitProblem::new(clean.clone(), start_config(), free_three(), FitWindow::default()).unwrap();
    let cut = FitProblem::new(
        clean,
        start_config(),
        free_three(),
        FitWindow::default().excluding_below(100.0),
    )
    .unwrap();
    let a = fit(&full, &options).unwrap();
    let b = fit(&cut, &options).unwrap();
    for p in [FitParameter::GRate, FitParameter::DTheta, FitParameter::DPhi] {
        let (va, vb) = (a.value(p).unwrap(), b.value(p).unwrap());
        let sigma = a.uncertainty(p).unwrap().max(b.uncertainty(p).unwrap());
        assert!((va - vb).abs() < sigma, "{p}: {va} vs {vb} (σ {sigma})");
    }
}

#[test]
fn noisy_fit_recovers_truth_with_unbiased_residuals() {
    let data = synthetic_histograms(&truth(), &PANELS, &grid(), 400.0, Some(99)).unwrap();
    let problem = FitProblem::new(data, start_config(), free_three(), FitWindow::default()).unwrap();
    let options = FitOptions { starts: 3, seed: 4, ..Default::default() };
    let r = fit(&problem, &options).unwrap();
    assert!(r.uncertainties_reliable);
    let t = truth();
    for (p, v) in [
        (FitParameter::GRate, t.g_rate_per_ps),
        (FitParameter::DTheta, t.dtheta_pi * std::f64::consts::PI),
        (FitParameter::DPhi, t.dphi_pi * std::f64::consts::PI),
    ] {
        let (got, s) = (r.value(p).unwrap(), r.uncertainty(p).unwrap());
        assert!((got - v).abs() < 4.0 * s, "{p}: {got} ± {s} vs {v}");
    }
    for panel in &r.panels {
        let n = panel.residuals.len() as f64;
        let mean = panel.residuals.iter().sum::<f64>() / n;
        assert!(mean.abs() < 3.0 / n.sqrt(), "{}{}: mean residual {mean}", panel.p1, panel.p2);
    }
    let ratio = r.line_intensity_ratio().unwrap();
    assert!((0.60..=0.70).contains(&ratio), "line ratio {ratio}");

    let again = fit(&problem, &options).unwrap();
    assert_eq!(r.values, again.values);
    assert_eq!(r.chi2, again.chi2);

    let dir = tempfile::tempdir().unwrap();
    let files = r.write_residuals(dir.path()).unwrap();
    assert_eq!(files.len(), PANELS.len());
    let report_path = dir.path().join("fit.json");
    r.write_report(&report_path, &files).unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(report["dof"].as_u64().unwrap() as usize, r.dof);
    assert!(report["parameters"]["g_rate"]["uncertainty"].is_f64());
    assert_eq!(report["panels"].as_array().unwrap().len(), PANELS.len());
    assert_eq!(report["weights"], "equal");
}
