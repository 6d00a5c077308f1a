use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lindblad::{DensityMatrix, StateBasis};

/// The six tomography settings. `Dbar` (anti-diagonal) is written `A` in
/// ASCII contexts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolarizationLabel {
    H,
    V,
    D,
    Dbar,
    R,
    L,
}

impl PolarizationLabel {
    pub const ALL: [PolarizationLabel; 6] = [Self::H, Self::V, Self::D, Self::Dbar, Self::R, Self::L];

    /// Bloch angles `(θ, φ)`, θ measured from `|X_H⟩`, φ the phase of `|X_V⟩`.
    pub fn angles(self) -> (f64, f64) {
        match self {
            Self::H => (0.0, 0.0),
            Self::V => (PI, 0.0),
            Self::D => (FRAC_PI_2, 0.0),
            Self::Dbar => (FRAC_PI_2, PI),
            Self::R => (FRAC_PI_2, FRAC_PI_2),
            Self::L => (FRAC_PI_2, 3.0 * FRAC_PI_2),
        }
    }

    /// Antipodal partner on the Bloch sphere.
    pub fn orthogonal(self) -> Self {
        match self {
            Self::H => Self::V,
            Self::V => Self::H,
            Self::D => Self::Dbar,
            Self::Dbar => Self::D,
            Self::R => Self::L,
            Self::L => Self::R,
        }
    }

    pub fn ascii(self) -> char {
        match self {
            Self::H => 'H',
            Self::V => 'V',
            Self::D => 'D',
            Self::Dbar => 'A',
            Self::R => 'R',
            Self::L => 'L',
        }
    }
}

impl fmt::Display for PolarizationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ascii())
    }
}

impl FromStr for PolarizationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Self::H),
            "V" | "v" => Ok(Self::V),
            "D" | "d" => Ok(Self::D),
            "A" | "a" | "Dbar" | "D̄" => Ok(Self::Dbar),
            "R" | "r" => Ok(Self::R),
            "L" | "l" => Ok(Self::L),
            other => Err(Error::Parse {
                location: "polarization label".into(),
                message: format!("unknown polarization '{other}' (expected one of H V D A R L)"),
            }),
        }
    }
}

/// Parse a two-letter pair such as `HH` or `RA`.
pub fn parse_pair(s: &str) -> Result<(PolarizationLabel, PolarizationLabel)> {
    let chars: Vec<char> = s.chars().collect();
    if chars.len() != 2 {
        return Err(Error::Parse {
            location: "polarization pair".into(),
            message: format!("expected two letters like HH or RL, got '{s}'"),
        });
    }
    Ok((
        chars[0].to_string().parse()?,
        chars[1].to_string().parse()?,
    ))
}

/// A point on the exciton Bloch sphere, optionally tagged with its label.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarizationSetting {
    pub theta: f64,
    pub phi: f64,
    pub label: Option<PolarizationLabel>,
}

impl PolarizationSetting {
    /// θ must lie in `[0, π]`; φ is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(invalid("polarization angles must be finite"));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(invalid(format!("theta must lie in [0, pi], got {theta}")));
        }
        Ok(Self {
            theta,
            phi: phi.rem_euclid(TAU),
            label: None,
        })
    }

    pub fn label_or_angles(&self) -> String {
        match self.label {
            Some(l) => l.to_string(),
            None => format!("({:.6},{:.6})", self.theta, self.phi),
        }
    }
}

impl From<PolarizationLabel> for PolarizationSetting {
    fn from(label: PolarizationLabel) -> Self {
        canonical_polarization(label)
    }
}

pub fn canonical_polarization(label: PolarizationLabel) -> PolarizationSetting {
    let (theta, phi) = label.angles();
    PolarizationSetting {
        theta,
        phi,
        label: Some(label),
    }
}

/// Systematic polarization-frame offsets, radians, shared by both arms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrameOffsets {
    pub dtheta: f64,
    pub dphi: f64,
}

impl FrameOffsets {
    pub fn new(dtheta: f64, dphi: f64) -> Self {
        Self { dtheta, dphi }
    }

    /// Offsets given as multiples of π.
    pub fn from_pi_units(dtheta_pi: f64, dphi_pi: f64) -> Self {
        Self::new(dtheta_pi * PI, dphi_pi * PI)
    }
}

/// Exciton amplitudes `(cos θ/2, e^{iφ} sin θ/2)` of `|X(θ, φ)⟩`.
pub fn exciton_amplitudes(theta: f64, phi: f64) -> [Complex64; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
}

/// `|X(θ,φ)⟩⟨X(θ,φ)|` embedded in the full basis.
pub fn exciton_projector(theta: f64, phi: f64, basis: StateBasis) -> DensityMatrix {
    let amp = exciton_amplitudes(theta, phi);
    let idx = [StateBasis::EXCITON_H, StateBasis::EXCITON_V];
    let mut rho = DensityMatrix::zeros(basis);
    let m = rho.matrix_mut();
    for (i, &a) in idx.iter().enumerate() {
        for (j, &b) in idx.iter().enumerate() {
            m[(a, b)] = amp[i] * amp[j].conj();
        }
    }
    rho
}

/// Bloch angles of the exciton heralded by a biexciton photon detected at
/// setting `p1`, shifted by the frame offsets. With `conjugate` the phase is
/// reflected, `(θ₁ + Δθ, −(φ₁ + Δφ))`.
pub fn herald_angles(p1: &PolarizationSetting, offsets: FrameOffsets, conjugate: bool) -> (f64, f64) {
    let theta = p1.theta + offsets.dtheta;
    let phi = p1.phi + offsets.dphi;
    (theta, if conjugate { -phi } else { phi })
}

/// Bloch angles read out by an exciton photon detected at setting `p2`.
pub fn detection_angles(p2: &PolarizationSetting, offsets: FrameOffsets) -> (f64, f64) {
    (p2.theta + offsets.dtheta, p2.phi + offsets.dphi)
}

pub fn herald_state(
    p1: &PolarizationSetting,
    offsets: FrameOffsets,
    conjugate: bool,
    basis: StateBasis,
) -> DensityMatrix {
    let (theta, phi) = herald_angles(p1, offsets, conjugate);
    exciton_projector(theta, phi, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn basis() -> StateBasis {
        StateBasis::new(5).unwrap()
    }

    fn overlap(a: PolarizationLabel, b: PolarizationLabel) -> f64 {
        let (ta, pa) = a.angles();
        let (tb, pb) = b.angles();
        let x = exciton_amplitudes(ta, pa);
        let y = exciton_amplitudes(tb, pb);
        (x[0].conj() * y[0] + x[1].conj() * y[1]).norm()
    }

    #[test]
    fn canonical_angles() {
        use PolarizationLabel::*;
        assert_eq!(canonical_polarization(H).theta, 0.0);
        assert_eq!(canonical_polarization(V).theta, PI);
        assert_eq!(canonical_polarization(Dbar).phi, PI);
        assert_eq!(canonical_polarization(L).phi, 1.5 * PI);
        for l in PolarizationLabel::ALL {
            assert!(overlap(l, l.orthogonal()) < 1e-15, "{l}");
            assert!((overlap(l, l) - 1.0).abs() < 1e-15);
        }
        assert!(overlap(D, Dbar) < 1e-15);
        assert!(overlap(R, L) < 1e-15);
    }

    #[test]
    fn labels_parse() {
        assert_eq!("A".parse::<PolarizationLabel>().unwrap(), PolarizationLabel::Dbar);
        assert_eq!("D̄".parse::<PolarizationLabel>().unwrap(), PolarizationLabel::Dbar);
        assert!("X".parse::<PolarizationLabel>().is_err());
        assert_eq!(
            parse_pair("RA").unwrap(),
            (PolarizationLabel::R, PolarizationLabel::Dbar)
        );
        assert!(parse_pair("HHH").is_err());
    }

    #[test]
    fn setting_validation() {
        assert!(PolarizationSetting::new(4.0, 0.0).is_err());
        assert!(PolarizationSetting::new(1.0, f64::NAN).is_err());
        let s = PolarizationSetting::new(1.0, -FRAC_PI_2).unwrap();
        assert!((s.phi - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn projector_poles_and_diagonal() {
        let b = basis();
        for phi in [0.0, 1.0, 4.0] {
            let p = exciton_projector(0.0, phi, b);
            let mut expect = DMatrix::zeros(8, 8);
            expect[(1, 1)] = Complex64::new(1.0, 0.0);
            assert!((p.matrix() - &expect).camax() < 1e-16);
        }
        let d = exciton_projector(FRAC_PI_2, 0.0, b);
        for a in 1..3 {
            for c in 1..3 {
                assert!((d.get(a, c) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
        assert!((d.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn herald_examples() {
        let b = basis();
        let h = herald_state(&PolarizationLabel::H.into(), FrameOffsets::default(), true, b);
        assert!((h.get(1, 1).re - 1.0).abs() < 1e-15);
        assert!(h.get(2, 2).norm() < 1e-15);
        let v = herald_state(&PolarizationLabel::V.into(), FrameOffsets::default(), true, b);
        assert!((v.get(2, 2).re - 1.0).abs() < 1e-15);
        assert!(v.get(1, 1).norm() < 1e-15);

        let off = FrameOffsets::from_pi_units(0.10, 0.02);
        let d = herald_state(&PolarizationLabel::D.into(), off, true, b);
        let expect = exciton_projector(0.6 * PI, -0.02 * PI, b);
        assert!(d.max_abs_diff(&expect) < 1e-15);
        let unconj = herald_state(&PolarizationLabel::D.into(), off, false, b);
        assert!(unconj.max_abs_diff(&exciton_projector(0.6 * PI, 0.02 * PI, b)) < 1e-15);
    }

    proptest! {
        #[test]
        fn projector_is_idempotent(theta in 0.0..PI, phi in 0.0..TAU) {
            let p = exciton_projector(theta, phi, basis());
            let sq = p.matrix() * p.matrix();
            prop_assert!((sq - p.matrix()).camax() < 1e-14);
            prop_assert!((p.trace().re - 1.0).abs() < 1e-14);
            prop_assert!(p.is_hermitian(1e-15));
        }

        #[test]
        fn antipodal_pair_completes_exciton_block(theta in 0.0..PI, phi in 0.0..TAU) {
            let b = basis();
            let sum = exciton_projector(theta, phi, b).into_matrix()
                + exciton_projector(PI - theta, phi + PI, b).into_matrix();
            for a in 0..8 {
                for c in 0..8 {
                    let expect = if a == c && (a == 1 || a == 2) { 1.0 } else { 0.0 };
                    prop_assert!((sum[(a, c)] - Complex64::new(expect, 0.0)).norm() < 1e-14);
                }
            }
        }
    }
}
