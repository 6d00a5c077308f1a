use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{ensure_finite, invalid, Result};
use crate::lindblad::{
    build_hamiltonian, steady_state, DensityMatrix, Hamiltonian, RateMatrix, StateBasis,
};

/// Top-rung steady-state occupancy above which the ladder truncation is
/// considered too tight.
pub const TRUNCATION_OCCUPANCY_LIMIT: f64 = 1e-6;

/// Default highest multiexciton order.
pub const DEFAULT_N_MAX: usize = 5;

/// Physical parameters of the cascade.
#[derive(Clone, Debug, PartialEq)]
pub struct CascadeParams {
    /// Exciton fine-structure splitting Δ, μeV.
    pub delta_uev: f64,
    /// Lifetime of `|X_H⟩`, ps.
    pub tau_h_ps: f64,
    /// Lifetime of `|X_V⟩`, ps.
    pub tau_v_ps: f64,
    /// Electron-hole pair generation rate G, ps⁻¹.
    pub g_rate: f64,
    /// Highest multiexciton order kept in the ladder.
    pub n_max: usize,
    /// Lifetimes for orders ≥ 3 that replace the channel-counting rule.
    pub explicit_tau_ps: BTreeMap<usize, f64>,
}

impl CascadeParams {
    pub fn new(delta_uev: f64, tau_h_ps: f64, tau_v_ps: f64, g_rate: f64, n_max: usize) -> Self {
        Self {
            delta_uev,
            tau_h_ps,
            tau_v_ps,
            g_rate,
            n_max,
            explicit_tau_ps: BTreeMap::new(),
        }
    }

    /// The fitted parameter set of the InAsP nanowire dot:
    /// Δ = 29 μeV, τ_H = 1180 ps, τ_V = 990 ps, 1/G = 8 ns, n = 5.
    pub fn reference() -> Self {
        Self::new(29.0, 1180.0, 990.0, 1.0 / 8000.0, DEFAULT_N_MAX)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("delta_uev", self.delta_uev)?;
        if self.delta_uev < 0.0 {
            return Err(invalid(format!("delta_uev must be >= 0, got {}", self.delta_uev)));
        }
        for (name, tau) in [("tau_h_ps", self.tau_h_ps), ("tau_v_ps", self.tau_v_ps)] {
            ensure_finite(name, tau)?;
            if tau <= 0.0 {
                return Err(invalid(format!("{name} must be > 0, got {tau}")));
            }
        }
        ensure_finite("g_rate", self.g_rate)?;
        if self.g_rate < 0.0 {
            return Err(invalid(format!("g_rate must be >= 0, got {}", self.g_rate)));
        }
        if self.n_max < 2 {
            return Err(invalid(format!("n_max must be >= 2, got {}", self.n_max)));
        }
        for (&order, &tau) in &self.explicit_tau_ps {
            if order < 3 || order > self.n_max {
                return Err(invalid(format!(
                    "explicit lifetime for order {order} outside 3..={}",
                    self.n_max
                )));
            }
            if !(tau.is_finite() && tau > 0.0) {
                return Err(invalid(format!("explicit lifetime for order {order} must be > 0")));
            }
        }
        Ok(())
    }

    /// Mean exciton lifetime, `1/τ_x = ½(1/τ_H + 1/τ_V)`.
    pub fn mean_exciton_lifetime(&self) -> f64 {
        2.0 / (1.0 / self.tau_h_ps + 1.0 / self.tau_v_ps)
    }
}

/// Radiative lifetime of the multiexciton of order `i ≥ 3`, counting the
/// available recombination channels: `τ_x/(i − ½)` for odd `i`, `τ_x/i` for
/// even `i`.
pub fn multiexciton_lifetime(i: usize, tau_x_ps: f64) -> Result<f64> {
    if i < 3 {
        return Err(invalid(format!(
            "multiexciton order must be >= 3 (orders 1 and 2 use tau_h/tau_v), got {i}"
        )));
    }
    let channels = if i % 2 == 1 { i as f64 - 0.5 } else { i as f64 };
    Ok(tau_x_ps / channels)
}

/// The assembled cascade: basis, Hamiltonian and rate matrix.
#[derive(Clone, Debug)]
pub struct CascadeModel {
    params: CascadeParams,
    basis: StateBasis,
    h: Hamiltonian,
    g: RateMatrix,
    tau_x_ps: f64,
}

impl CascadeModel {
    pub fn params(&self) -> &CascadeParams {
        &self.params
    }

    pub fn basis(&self) -> StateBasis {
        self.basis
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.h
    }

    pub fn rates(&self) -> &RateMatrix {
        &self.g
    }

    pub fn tau_x_ps(&self) -> f64 {
        self.tau_x_ps
    }

    pub fn steady_state(&self) -> Result<DensityMatrix> {
        steady_state(&self.h, &self.g)
    }

    /// Ratio of the biexciton to the exciton line intensity at steady state,
    /// `ρ_XX (1/τ_H + 1/τ_V) / (ρ_XH/τ_H + ρ_XV/τ_V)`.
    pub fn line_intensity_ratio(&self, rho_ss: &DensityMatrix) -> f64 {
        let p = rho_ss.populations();
        let (gh, gv) = (1.0 / self.params.tau_h_ps, 1.0 / self.params.tau_v_ps);
        p[StateBasis::BIEXCITON] * (gh + gv)
            / (p[StateBasis::EXCITON_H] * gh + p[StateBasis::EXCITON_V] * gv)
    }

    /// Occupancy of the highest rung when it exceeds
    /// [`TRUNCATION_OCCUPANCY_LIMIT`].
    pub fn truncation_warning(&self, rho_ss: &DensityMatrix) -> Option<f64> {
        let top = rho_ss.populations()[self.basis.dim() - 1];
        (top > TRUNCATION_OCCUPANCY_LIMIT).then_some(top)
    }
}

/// Assemble the ladder rate matrix and the rotating-frame Hamiltonian.
///
/// Generation from `|0⟩` splits G/4, G/4, G/2 into `|X_H⟩`, `|X_V⟩` and the
/// dark exciton; every exciton (bright or dark) is pumped into `|XX⟩` at G
/// and each higher rung into the next at G. The biexciton decays into
/// `|X_H⟩`/`|X_V⟩` at `1/τ_H`/`1/τ_V`, the bright excitons into `|0⟩` at the
/// same rates, and rung `i ≥ 3` into rung `i − 1` at `1/τ_i`. The dark
/// exciton does not decay radiatively.
pub fn build_model(p: CascadeParams) -> Result<CascadeModel> {
    p.validate()?;
    let basis = StateBasis::new(p.n_max)?;
    let d = basis.dim();
    let tau_x_ps = p.mean_exciton_lifetime();
    let (gh, gv, gen) = (1.0 / p.tau_h_ps, 1.0 / p.tau_v_ps, p.g_rate);

    let (e0, xh, xv, de, xx) = (
        StateBasis::EMPTY,
        StateBasis::EXCITON_H,
        StateBasis::EXCITON_V,
        StateBasis::DARK,
        StateBasis::BIEXCITON,
    );
    let mut g = DMatrix::zeros(d, d);
    g[(xh, e0)] = gen / 4.0;
    g[(xv, e0)] = gen / 4.0;
    g[(de, e0)] = gen / 2.0;
    g[(e0, xh)] = gh;
    g[(e0, xv)] = gv;
    g[(xx, xh)] = gen;
    g[(xx, xv)] = gen;
    g[(xx, de)] = gen;
    g[(xh, xx)] = gh;
    g[(xv, xx)] = gv;
    for order in 3..=p.n_max {
        let k = basis.multiexciton_index(order).expect("order within ladder");
        let tau = match p.explicit_tau_ps.get(&order) {
            Some(&t) => t,
            None => multiexciton_lifetime(order, tau_x_ps)?,
        };
        g[(k, k - 1)] = gen;
        g[(k - 1, k)] = 1.0 / tau;
    }

    let h = build_hamiltonian(p.delta_uev, basis)?;
    let g = RateMatrix::new(basis, g)?;
    Ok(CascadeModel {
        params: p,
        basis,
        h,
        g,
        tau_x_ps,
    })
}
