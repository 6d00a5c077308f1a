use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::stream::TimeTagStream;
use crate::correlation::TauGrid;
use crate::error::{invalid, Error, Result};

/// Plateau used by [`Histogram::renormalize_plateau`], |τ| in ps.
pub const PLATEAU_RANGE_PS: (f64, f64) = (40_000.0, 50_000.0);

/// Singles and span entering the normalization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Acquisition {
    pub span_ps: f64,
    pub n_start: u64,
    pub n_stop: u64,
}

/// Coincidence histogram over a [`TauGrid`].
///
/// `g2 = counts / (N₁ N₂ b / T)` and `sigma = √counts` under the same
/// scaling; empty bins use `√1` so every bin carries a finite weight.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    grid: TauGrid,
    counts: Vec<u64>,
    g2: Vec<f64>,
    sigma: Vec<f64>,
    acquisition: Acquisition,
}

impl Histogram {
    /// Normalize raw coincidence counts.
    pub fn from_counts(grid: TauGrid, counts: Vec<u64>, acquisition: Acquisition) -> Result<Self> {
        if counts.len() != grid.len() {
            return Err(invalid(format!(
                "{} counts for a grid of {} bins",
                counts.len(),
                grid.len()
            )));
        }
        let Acquisition {
            span_ps,
            n_start,
            n_stop,
        } = acquisition;
        if !(span_ps > 0.0) || n_start == 0 || n_stop == 0 {
            return Err(Error::Data(format!(
                "cannot normalize: span {span_ps} ps, {n_start} start and {n_stop} stop events"
            )));
        }
        let accidental = n_start as f64 * n_stop as f64 * grid.bin_ps() / span_ps;
        let g2 = counts.iter().map(|&c| c as f64 / accidental).collect();
        let sigma = counts
            .iter()
            .map(|&c| (c.max(1) as f64).sqrt() / accidental)
            .collect();
        Ok(Self {
            grid,
            counts,
            g2,
            sigma,
            acquisition,
        })
    }

    /// Histogram given directly by normalized values, as read back from a
    /// file or produced synthetically.
    pub fn from_normalized(
        grid: TauGrid,
        counts: Vec<u64>,
        g2: Vec<f64>,
        sigma: Vec<f64>,
        acquisition: Acquisition,
    ) -> Result<Self> {
        let n = grid.len();
        if counts.len() != n || g2.len() != n || sigma.len() != n {
            return Err(invalid("histogram columns differ in length from the grid"));
        }
        if let Some(s) = sigma.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(Error::Data(format!("sigma must be finite and > 0, got {s}")));
        }
        if let Some(v) = g2.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite g2 value {v}")));
        }
        Ok(Self {
            grid,
            counts,
            g2,
            sigma,
            acquisition,
        })
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn tau_ps(&self) -> Vec<f64> {
        self.grid.centers()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn g2(&self) -> &[f64] {
        &self.g2
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn acquisition(&self) -> Acquisition {
        self.acquisition
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Rescale so that the mean g2 over `40 ns ≤ |τ| ≤ 50 ns` is one.
    pub fn renormalize_plateau(&self) -> Result<Self> {
        let (lo, hi) = PLATEAU_RANGE_PS;
        let plateau: Vec<f64> = self
            .grid
            .centers()
            .iter()
            .zip(&self.g2)
            .filter(|(t, _)| (lo..=hi).contains(&t.abs()))
            .map(|(_, &v)| v)
            .collect();
        if plateau.is_empty() {
            return Err(Error::Config(format!(
                "histogram window does not reach the {lo}-{hi} ps plateau"
            )));
        }
        let mean = plateau.iter().sum::<f64>() / plateau.len() as f64;
        if !(mean > 0.0) {
            return Err(Error::Data("plateau has no coincidences".into()));
        }
        let mut out = self.clone();
        out.g2.iter_mut().for_each(|v| *v /= mean);
        out.sigma.iter_mut().for_each(|v| *v /= mean);
        Ok(out)
    }

    /// Mirror `τ → −τ` on a symmetric grid.
    pub fn mirrored(&self) -> Result<Self> {
        if self.grid.negative_bins() != self.grid.positive_bins() {
            return Err(invalid("only symmetric histograms can be mirrored"));
        }
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        Ok(Self {
            grid: self.grid,
            counts: self.counts.iter().rev().copied().collect(),
            g2: rev(&self.g2),
            sigma: rev(&self.sigma),
            acquisition: Acquisition {
                n_start: self.acquisition.n_stop,
                n_stop: self.acquisition.n_start,
                ..self.acquisition
            },
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(40 * (self.counts.len() + 4));
        let a = self.acquisition;
        let _ = writeln!(s, "# span_ps = {}", a.span_ps);
        let _ = writeln!(s, "# n_start = {}", a.n_start);
        let _ = writeln!(s, "# n_stop = {}", a.n_stop);
        s.push_str("tau_ps,counts,g2,sigma\n");
        for k in 0..self.counts.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                self.grid.center(k),
                self.counts[k],
                self.g2[k],
                self.sigma[k]
            );
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_csv_string().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// Parse the `tau_ps,counts,g2,sigma` format. Acquisition comments are
    /// optional.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut acq = Acquisition {
            span_ps: 0.0,
            n_start: 0,
            n_stop: 0,
        };
        let (mut tau, mut counts, mut g2, mut sigma) = (vec![], vec![], vec![], vec![]);
        let mut header_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |m: String| Error::Parse {
                location: format!("line {}", i + 1),
                message: m,
            };
            if line.is_empty() {
                continue;
            }
            if let Some(c) = line.strip_prefix('#') {
                if let Some((k, v)) = c.split_once('=') {
                    let v = v.trim();
                    let bad = || err(format!("bad value '{v}'"));
                    match k.trim() {
                        "span_ps" => acq.span_ps = v.parse().map_err(|_| bad())?,
                        "n_start" => acq.n_start = v.parse().map_err(|_| bad())?,
                        "n_stop" => acq.n_stop = v.parse().map_err(|_| bad())?,
                        _ => {}
                    }
                }
                continue;
            }
            if !header_seen {
                if line != "tau_ps,counts,g2,sigma" {
                    return Err(err(format!(
                        "expected header 'tau_ps,counts,g2,sigma', got '{line}'"
                    )));
                }
                header_seen = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(err(format!("expected 4 fields, got {}", f.len())));
            }
            let num = |s: &str, name: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(format!("bad {name} '{s}'")))
            };
            tau.push(num(f[0], "tau_ps")?);
            counts.push(
                f[1].parse::<u64>()
                    .map_err(|_| err(format!("bad counts '{}'", f[1])))?,
            );
            g2.push(num(f[2], "g2")?);
            sigma.push(num(f[3], "sigma")?);
        }
        if !header_seen {
            return Err(Error::Parse {
                location: "line 1".into(),
                message: "missing header 'tau_ps,counts,g2,sigma'".into(),
            });
        }
        let grid = TauGrid::from_centers(&tau)?;
        Self::from_normalized(grid, counts, g2, sigma, acq)
    }
}

/// Histogram stop-minus-start delays within `±window_ps`.
///
/// Positive delays `Δ` fall in `(k·b, (k+1)·b]`, negative ones in
/// `[−(k+1)·b, −k·b)`. A delay of exactly zero counts as positive when the
/// start event precedes the stop event in stream order (channel 1 before
/// channel 2 at equal timestamps), so swapping the channels mirrors the
/// histogram exactly.
pub fn correlate(
    stream: &TimeTagStream,
    ch_start: u8,
    ch_stop: u8,
    bin_ps: u64,
    window_ps: u64,
) -> Result<Histogram> {
    if bin_ps == 0 {
        return Err(invalid("bin width must be > 0"));
    }
    if window_ps == 0 || !window_ps.is_multiple_of(bin_ps) {
        return Err(invalid(format!(
            "window {window_ps} ps must be a positive multiple of the {bin_ps} ps bin"
        )));
    }
    let pick = |ch: u8| -> Vec<(u64, usize)> {
        stream
            .events()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.channel == ch)
            .map(|(i, e)| (e.t_ps, i))
            .collect()
    };
    let starts = pick(ch_start);
    if starts.is_empty() {
        return Err(Error::EmptyChannel(ch_start));
    }
    let stops = if ch_stop == ch_start {
        starts.clone()
    } else {
        pick(ch_stop)
    };
    if stops.is_empty() {
        return Err(Error::EmptyChannel(ch_stop));
    }

    let half = (window_ps / bin_ps) as usize;
    let mut counts = vec![0u64; 2 * half];
    let mut lo = 0usize;
    for &(ts, is) in &starts {
        let earliest = ts.saturating_sub(window_ps);
        while lo < stops.len() && stops[lo].0 < earliest {
            lo += 1;
        }
        let latest = ts.saturating_add(window_ps);
        for &(tp, ip) in &stops[lo..] {
            if tp > latest {
                break;
            }
            if ip == is {
                continue;
            }
            let positive = tp > ts || (tp == ts && is < ip);
            let bin = if positive {
                let d = tp - ts;
                half + if d == 0 { 0 } else { ((d - 1) / bin_ps) as usize }
            } else {
                let d = ts - tp;
                half - 1 - if d == 0 { 0 } else { ((d - 1) / bin_ps) as usize }
            };
            counts[bin] += 1;
        }
    }
    let w = window_ps as f64;
    let grid = TauGrid::new(-w, w, bin_ps as f64)?;
    Histogram::from_counts(
        grid,
        counts,
        Acquisition {
            span_ps: stream.duration_ps() as f64,
            n_start: starts.len() as u64,
            n_stop: stops.len() as u64,
        },
    )
}
