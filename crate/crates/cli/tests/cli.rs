use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const PAPER_CONFIG: &str = "\
delta_uev = 29
tau_h_ps = 1180
tau_v_ps = 990
g_rate_per_ps = 1.25e-4
dtheta_pi = 0.10
dphi_pi = 0.02
";

fn qdcascade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdcascade"))
        .args(args)
        .env("QDCASCADE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn paper_config(dir: &Path) -> PathBuf {
    let p = dir.join("paper.cfg");
    fs::write(&p, PAPER_CONFIG).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn steady_state_prints_occupation_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let o = qdcascade(&["steady-state", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let value = |label: &str| -> f64 {
        text.lines()
            .find_map(|l| l.strip_prefix(label).map(|v| v.trim().parse().unwrap()))
            .unwrap_or_else(|| panic!("no {label} row in\n{text}"))
    };
    assert!((value("G0") - 0.597).abs() < 0.002);
    assert!((value("DE") - 0.298).abs() < 0.002);
    assert!((value("XH") - 0.039).abs() < 0.003);
    assert!((value("XV") - 0.039).abs() < 0.002);
    assert!((value("XX") - 0.025).abs() < 0.002);
}

#[test]
fn lifetimes_prints_estimates() {
    let o = qdcascade(&[
        "lifetimes",
        "--exciton-energy-ev",
        "1.283",
        "--index",
        "3.12",
        "--oscillator-strength",
        "1",
        "--wire-diameter-nm",
        "200",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("tau_r_ns 2.24"), "{text}");
    assert!(text.contains("lambda_m_nm 309.7"), "{text}");
    assert!(text.contains("tau_x_ns 0.93"), "{text}");
}

#[test]
fn simulate_rejects_inverted_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let out = dir.path().join("c.csv");
    let o = qdcascade(&[
        "simulate", "--config", s(&cfg), "--pol", "HH", "--tau-min", "5000", "--tau-max", "-5000", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr(&o).lines().count(), 1);
    assert!(!out.exists());
}

#[test]
fn simulate_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = qdcascade(&["simulate", "--config", s(&cfg), "--pol", "DA", "--irf", "42", "--out", s(&out)]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("tau_ps,g2\n"));
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn tomography_writes_36_curves_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let out = dir.path().join("tomo");
    let o = qdcascade(&["tomography", "--config", s(&cfg), "--out-dir", s(&out), "--svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut csv: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    csv.sort();
    assert_eq!(csv.len(), 36);
    let labels = ['H', 'V', 'D', 'A', 'R', 'L'];
    for a in labels {
        for b in labels {
            assert!(csv.contains(&format!("{a}{b}.csv")));
        }
    }
    let svg = fs::read_to_string(out.join("tomography.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 36);
}

#[test]
fn stream_correlate_and_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let data = dir.path().join("data");
    fs::create_dir(&data).unwrap();
    for pol in ["HH", "RR"] {
        let tags = dir.path().join(format!("{pol}.qdtt"));
        let o = qdcascade(&[
            "mc", "--config", s(&cfg), "--pol", pol, "--duration-ps", "5e10", "--seed", "42", "--eff", "0.3",
            "--out", s(&tags),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("events "));
        let hist = data.join(format!("{pol}.csv"));
        let o = qdcascade(&[
            "correlate", "--tags", s(&tags), "--bin", "20", "--window-ps", "3000", "--out", s(&hist),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let report = dir.path().join("fit").join("R.json");
    let o = qdcascade(&[
        "fit", "--data-dir", s(&data), "--config", s(&cfg), "--free", "g_rate,dtheta,dphi", "--starts", "1",
        "--out", s(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&report).unwrap();
    for key in ["\"parameters\"", "\"g_rate\"", "\"dtheta\"", "\"dphi\"", "\"dof\"", "\"residual_csv\""] {
        assert!(text.contains(key), "{key} missing");
    }
    assert!(dir.path().join("fit").join("residual_HH.csv").exists());
    assert!(dir.path().join("fit").join("residual_RR.csv").exists());
}

#[test]
fn plateau_renormalization_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let tags = dir.path().join("t.csv");
    let o = qdcascade(&[
        "mc", "--config", s(&cfg), "--pol", "HV", "--duration-ps", "2e10", "--eff", "0.5", "--out", s(&tags),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let hist = dir.path().join("h.csv");
    let o = qdcascade(&[
        "correlate", "--tags", s(&tags), "--bin", "1000", "--window-ps", "50000", "--renormalize-plateau",
        "--out", s(&hist),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(fs::read_to_string(hist).unwrap().contains("tau_ps,counts,g2,sigma"));
}

#[test]
fn missing_and_malformed_inputs_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    let o = qdcascade(&["steady-state", "--config", s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr(&o).lines().count(), 1);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "delta_uev = 29\nmystery = 1\n").unwrap();
    let o = qdcascade(&["steady-state", "--config", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mystery"));

    let tags = dir.path().join("t.csv");
    fs::write(&tags, "channel,t_ps\n1,5\n1,9\n").unwrap();
    let o = qdcascade(&[
        "correlate", "--tags", s(&tags), "--bin", "10", "--window-ps", "100", "--out", s(&dir.path().join("h.csv")),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let cfg = paper_config(dir.path());
    let o = qdcascade(&[
        "fit", "--data-dir", s(&empty), "--config", s(&cfg), "--out", s(&dir.path().join("r.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qdcascade(&[]).status.code(), Some(1));
    assert_eq!(qdcascade(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qdcascade(&["lifetimes", "--unknown-flag", "1"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = paper_config(dir.path());
    let o = qdcascade(&["simulate", "--config", s(&cfg), "--pol", "HX", "--out", s(&dir.path().join("c.csv"))]);
    assert_eq!(o.status.code(), Some(1));
    let o = qdcascade(&["fit", "--data-dir", ".", "--config", s(&cfg), "--free", "tilt", "--out", "r.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(qdcascade(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_cap_must_be_positive() {
    let o = Command::new(env!("CARGO_BIN_EXE_qdcascade"))
        .args(["lifetimes"])
        .env("QDCASCADE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
