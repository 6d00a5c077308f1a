use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "qdcascade", version, about = "Biexciton-exciton cascade correlations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one g2 curve as CSV.
    Simulate(SimulateArgs),
    /// Write the 36 tomography curves, optionally with an SVG panel grid.
    Tomography(TomographyArgs),
    /// Print steady-state occupations.
    SteadyState(ConfigArg),
    /// Print radiative lifetime estimates.
    Lifetimes(LifetimeArgs),
    /// Generate a synthetic time-tag stream.
    Mc(McArgs),
    /// Histogram a time-tag stream into a normalized g2 CSV.
    Correlate(CorrelateArgs),
    /// Fit the model to a directory of measured histograms.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Model configuration file.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Polarization pair such as HH or DA.
    #[arg(long)]
    pub pol: String,
    #[arg(long, default_value_t = -5000.0, allow_negative_numbers = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 5000.0, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 10.0)]
    pub bin: f64,
    /// Gaussian IRF FWHM in ps; overrides the config, 0 disables convolution.
    #[arg(long)]
    pub irf: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TomographyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Also write tomography.svg.
    #[arg(long)]
    pub svg: bool,
    #[arg(long, default_value_t = -5000.0, allow_negative_numbers = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 5000.0, allow_negative_numbers = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 10.0)]
    pub bin: f64,
    /// Gaussian IRF FWHM in ps; overrides the config, 0 disables convolution.
    #[arg(long)]
    pub irf: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LifetimeArgs {
    #[arg(long, default_value_t = 1.283)]
    pub exciton_energy_ev: f64,
    #[arg(long, default_value_t = 3.12)]
    pub index: f64,
    #[arg(long, default_value_t = 1.0)]
    pub oscillator_strength: f64,
    #[arg(long, default_value_t = 200.0)]
    pub wire_diameter_nm: f64,
    /// Wavelength in the material; derived from energy and index when absent.
    #[arg(long)]
    pub wavelength_nm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub pol: String,
    /// Acquisition length in ps; accepts forms like 1e13.
    #[arg(long)]
    pub duration_ps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Detection efficiency of both channels.
    #[arg(long)]
    pub eff: f64,
    /// Exciton-channel efficiency, when it differs from --eff.
    #[arg(long)]
    pub eff2: Option<f64>,
    /// Per-photon timing jitter FWHM in ps.
    #[arg(long)]
    pub jitter_fwhm: Option<f64>,
    /// Independent trajectories run in parallel and concatenated.
    #[arg(long, default_value_t = 1)]
    pub chunks: usize,
    /// Output file; `.csv` selects CSV, anything else the binary format.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long)]
    pub tags: PathBuf,
    #[arg(long)]
    pub bin: u64,
    #[arg(long)]
    pub window_ps: u64,
    #[arg(long, default_value_t = 1)]
    pub start_channel: u8,
    #[arg(long, default_value_t = 2)]
    pub stop_channel: u8,
    /// Rescale so the 40-50 ns plateau averages 1.
    #[arg(long)]
    pub renormalize_plateau: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Directory of histogram CSVs named like HH.csv or DA.csv.
    #[arg(long)]
    pub data_dir: PathBuf,
    /// Fixed parameters and starting values.
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated free parameters.
    #[arg(long, value_delimiter = ',', default_value = "g_rate,dtheta,dphi")]
    pub free: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub window_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub window_hi: Option<f64>,
    /// Drop bins with |tau| below this many ps.
    #[arg(long)]
    pub exclude_below: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path; residual CSVs go next to it.
    #[arg(long)]
    pub out: PathBuf,
}
