//! Minimal SVG rendering of the 6×6 tomography grid: rows are the biexciton
//! setting, columns the exciton setting.

use std::fmt::Write as _;

use qdcascade::cascade::PolarizationLabel;
use qdcascade::Tomography;

const PANEL_W: f64 = 150.0;
const PANEL_H: f64 = 100.0;
const GAP: f64 = 12.0;
const MARGIN_LEFT: f64 = 48.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 36.0;

pub fn tomography_svg(tomography: &Tomography) -> String {
    let width = MARGIN_LEFT + 6.0 * PANEL_W + 5.0 * GAP + GAP;
    let height = MARGIN_TOP + 6.0 * PANEL_H + 5.0 * GAP + MARGIN_BOTTOM;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    for (col, p2) in PolarizationLabel::ALL.iter().enumerate() {
        let x = MARGIN_LEFT + col as f64 * (PANEL_W + GAP) + PANEL_W / 2.0;
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="12">X {p2}</text>"#, MARGIN_TOP - 10.0);
    }
    for (row, p1) in PolarizationLabel::ALL.iter().enumerate() {
        let y = MARGIN_TOP + row as f64 * (PANEL_H + GAP) + PANEL_H / 2.0;
        let _ = writeln!(
            s,
            r#"<text x="12" y="{y:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 12 {y:.1})">XX {p1}</text>"#
        );
    }

    for (p1, p2, curve) in tomography.iter() {
        let row = PolarizationLabel::ALL.iter().position(|&l| l == p1).unwrap_or(0);
        let col = PolarizationLabel::ALL.iter().position(|&l| l == p2).unwrap_or(0);
        let x0 = MARGIN_LEFT + col as f64 * (PANEL_W + GAP);
        let y0 = MARGIN_TOP + row as f64 * (PANEL_H + GAP);
        let tau = curve.tau_ps();
        let values = curve.values();
        let (t_lo, t_hi) = (curve.grid().tau_min_ps(), curve.grid().tau_max_ps());
        let y_max = nice_ceiling(values.iter().cloned().fold(1.0, f64::max));
        let px = |t: f64| x0 + (t - t_lo) / (t_hi - t_lo) * PANEL_W;
        let py = |g: f64| y0 + PANEL_H - (g.max(0.0) / y_max).min(1.0) * PANEL_H;

        let _ = writeln!(
            s,
            r#"<rect x="{x0:.1}" y="{y0:.1}" width="{PANEL_W:.1}" height="{PANEL_H:.1}" fill="none" stroke="black" stroke-width="0.8"/>"#
        );
        let _ = writeln!(
            s,
            r##"<line x1="{x0:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#999" stroke-dasharray="3,2" stroke-width="0.6"/>"##,
            x0 + PANEL_W,
            y = py(1.0)
        );
        let mut points = String::new();
        for (t, g) in tau.iter().zip(values) {
            let _ = write!(points, "{:.2},{:.2} ", px(*t), py(*g));
        }
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f4e9c" stroke-width="0.8"/>"##,
            points.trim_end()
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{p1}{p2}</text>"#, x0 + 4.0, y0 + 12.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="8">{y_max}</text>"#,
            x0 - 3.0,
            y0 + 8.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="8">0</text>"#,
            x0 - 3.0,
            y0 + PANEL_H
        );
        if row == 5 {
            let yb = y0 + PANEL_H + 12.0;
            let _ = writeln!(s, r#"<text x="{x0:.1}" y="{yb:.1}" font-size="8">{}</text>"#, t_lo / 1000.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{yb:.1}" text-anchor="end" font-size="8">{}</text>"#,
                x0 + PANEL_W,
                t_hi / 1000.0
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">delay (ns)</text>"#,
        MARGIN_LEFT + 3.0 * (PANEL_W + GAP),
        height - 6.0
    );
    s.push_str("</svg>\n");
    s
}

/// Smallest of 1, 2, 5 × 10ⁿ not below `v`.
fn nice_ceiling(v: f64) -> f64 {
    let exp = v.log10().floor();
    let base = 10f64.powf(exp);
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * base)
        .find(|&c| c >= v * (1.0 - 1e-12))
        .unwrap_or(10.0 * base)
}
