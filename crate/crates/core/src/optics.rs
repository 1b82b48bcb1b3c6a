//! Optical elements, source states and the fourth-order phase.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{Axis, FockState, ModeId, ModeMap, Port, Tag};

/// Tolerance on `t² + r² = 1` per axis.
pub const LOSSLESS_TOLERANCE: f64 = 1e-9;

/// Fringe tags a mode map has to cover: untagged photons and the two
/// transverse labels written by [`fringe_prepare`].
const TAGS: [Tag; 2] = [0, 1];

/// Polarization-dependent amplitude coefficients of a lossless beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    pub t_x: f64,
    pub t_y: f64,
    pub r_x: f64,
    pub r_y: f64,
}

impl BeamSplitterSpec {
    pub fn new(t_x: f64, t_y: f64, r_x: f64, r_y: f64) -> Result<Self> {
        let spec = BeamSplitterSpec { t_x, t_y, r_x, r_y };
        spec.validate()?;
        Ok(spec)
    }

    /// 50:50 splitter, all four coefficients `2^{-1/2}`.
    pub fn balanced() -> Self {
        BeamSplitterSpec { t_x: FRAC_1_SQRT_2, t_y: FRAC_1_SQRT_2, r_x: FRAC_1_SQRT_2, r_y: FRAC_1_SQRT_2 }
    }

    /// Polarizing splitter with intensity transmittance `t_x²` on x and
    /// 50:50 on y.
    pub fn polarized(transmittance_x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance_x) {
            return Err(Error::invalid(format!("transmittance {transmittance_x} outside [0, 1]")));
        }
        Self::new(transmittance_x.sqrt(), FRAC_1_SQRT_2, (1.0 - transmittance_x).sqrt(), FRAC_1_SQRT_2)
    }

    /// Polarizing splitter whose ratio `r_x / t_x` equals `r`.
    pub fn from_eberhard_ratio(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!("ratio r = {r} must be finite and non-negative")));
        }
        let t_x = 1.0 / (1.0 + r * r).sqrt();
        Self::new(t_x, FRAC_1_SQRT_2, r * t_x, FRAC_1_SQRT_2)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("t_x", self.t_x), ("t_y", self.t_y), ("r_x", self.r_x), ("r_y", self.r_y)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} outside [0, 1]")));
            }
        }
        for (axis, t, r) in [("x", self.t_x, self.r_x), ("y", self.t_y, self.r_y)] {
            let loss = (t * t + r * r - 1.0).abs();
            if loss > LOSSLESS_TOLERANCE {
                return Err(Error::invalid(format!("splitter is lossy on {axis}: |t^2 + r^2 - 1| = {loss:.3e}")));
            }
        }
        Ok(())
    }

    pub fn t(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.t_x,
            Axis::Y => self.t_y,
        }
    }

    pub fn r(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.r_x,
            Axis::Y => self.r_y,
        }
    }

    pub fn eberhard_ratio(&self) -> f64 {
        self.r_x / self.t_x
    }

    pub fn transmittance_x(&self) -> f64 {
        self.t_x * self.t_x
    }
}

impl Default for BeamSplitterSpec {
    fn default() -> Self {
        Self::balanced()
    }
}

/// Polarizer orientation, or no polarizer at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyzerSetting {
    /// Angle in radians, kept in `[0, π)`.
    Angle(f64),
    Removed,
}

impl AnalyzerSetting {
    pub fn angle(theta: f64) -> Self {
        let mut t = theta.rem_euclid(PI);
        if t >= PI {
            t = 0.0;
        }
        AnalyzerSetting::Angle(t)
    }

    pub fn degrees(deg: f64) -> Self {
        Self::angle(deg.to_radians())
    }

    pub fn radians(&self) -> Option<f64> {
        match *self {
            AnalyzerSetting::Angle(t) => Some(t),
            AnalyzerSetting::Removed => None,
        }
    }

    pub fn is_removed(&self) -> bool {
        matches!(self, AnalyzerSetting::Removed)
    }

    /// The orthogonal channel of the same prism.
    pub fn perpendicular(&self) -> Self {
        match *self {
            AnalyzerSetting::Angle(t) => Self::angle(t + FRAC_PI_2),
            AnalyzerSetting::Removed => AnalyzerSetting::Removed,
        }
    }

    /// Both channels of the prism; a removed polarizer has one.
    pub fn channels(&self) -> Vec<AnalyzerSetting> {
        match self {
            AnalyzerSetting::Angle(_) => vec![*self, self.perpendicular()],
            AnalyzerSetting::Removed => vec![AnalyzerSetting::Removed],
        }
    }
}

/// Source of the fourth-order phase `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PhaseModel {
    Fixed {
        phi: f64,
    },
    /// Detectors at transverse positions `z1`, `z2`, fringe spacing `L`,
    /// detector width `Δz`.
    TransverseFringe {
        z1: f64,
        z2: f64,
        fringe_spacing: f64,
        detector_width: f64,
    },
    /// Frequency beat read out through an optical path difference.
    Beat {
        delta_omega: f64,
        path_difference: f64,
        light_speed: f64,
    },
}

impl Default for PhaseModel {
    fn default() -> Self {
        PhaseModel::Fixed { phi: 0.0 }
    }
}

impl PhaseModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhaseModel::Fixed { phi } if !phi.is_finite() => Err(Error::invalid("phase must be finite")),
            PhaseModel::TransverseFringe { z1, z2, fringe_spacing, detector_width } => {
                if !(fringe_spacing.is_finite() && fringe_spacing > 0.0) {
                    return Err(Error::invalid(format!("fringe spacing L = {fringe_spacing} must be positive")));
                }
                if !(detector_width.is_finite() && detector_width >= 0.0) {
                    return Err(Error::invalid(format!("detector width {detector_width} must be non-negative")));
                }
                if !(z1.is_finite() && z2.is_finite()) {
                    return Err(Error::invalid("detector positions must be finite"));
                }
                Ok(())
            }
            PhaseModel::Beat { delta_omega, path_difference, light_speed } => {
                if !(light_speed.is_finite() && light_speed > 0.0) {
                    return Err(Error::invalid(format!("light speed {light_speed} must be positive")));
                }
                if !(delta_omega.is_finite() && path_difference.is_finite()) {
                    return Err(Error::invalid("beat parameters must be finite"));
                }
                Ok(())
            }
            PhaseModel::Fixed { .. } => Ok(()),
        }
    }

    /// Central value of `φ`.
    pub fn phase(&self) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            PhaseModel::Fixed { phi } => phi,
            PhaseModel::TransverseFringe { z1, z2, fringe_spacing, .. } => 2.0 * PI * (z2 - z1) / fringe_spacing,
            PhaseModel::Beat { delta_omega, path_difference, light_speed } => {
                delta_omega * path_difference / light_speed
            }
        })
    }

    /// Fringe visibility produced by averaging over the detector width.
    pub fn visibility(&self) -> Result<f64> {
        self.validate()?;
        match *self {
            PhaseModel::TransverseFringe { fringe_spacing, detector_width, .. } => {
                crate::analytic::visibility_from_geometry(detector_width, fringe_spacing)
            }
            _ => Ok(1.0),
        }
    }
}

/// The two interfering amplitudes and their relative phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceTerms {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
}

impl InterferenceTerms {
    /// `A² + B² − 2vAB cos φ`.
    pub fn probability(&self, visibility: f64) -> f64 {
        self.a * self.a + self.b * self.b - 2.0 * visibility * self.a * self.b * self.phi.cos()
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn require_angle(setting: AnalyzerSetting, what: &str) -> Result<f64> {
    setting.radians().ok_or_else(|| Error::invalid(format!("{what} needs a polarization angle, not Removed")))
}

fn distinct(a: &Port, b: &Port) -> Result<()> {
    if a == b {
        Err(Error::SamePort(a.to_string()))
    } else {
        Ok(())
    }
}

/// Product of two linearly polarized photons in ports `1_0` and `2_0`.
pub fn make_polarized_pair(theta10: AnalyzerSetting, theta20: AnalyzerSetting) -> Result<FockState> {
    let t1 = require_angle(theta10, "source 1_0")?;
    let t2 = require_angle(theta20, "source 2_0")?;
    polarized_pair_at(&Port::from("1_0"), t1, &Port::from("2_0"), t2)
}

pub(crate) fn polarized_pair_at(a: &Port, t1: f64, b: &Port, t2: f64) -> Result<FockState> {
    distinct(a, b)?;
    let amp = |x: f64, y: f64| [(Axis::X, x), (Axis::Y, y)];
    let mut terms = Vec::with_capacity(4);
    for (ax, ca) in amp(t1.cos(), t1.sin()) {
        for (bx, cb) in amp(t2.cos(), t2.sin()) {
            terms.push((real(ca * cb), vec![ModeId::new(a, ax), ModeId::new(b, bx)]));
        }
    }
    FockState::from_creations(terms)
}

/// `(|x⟩_A|y⟩_B − |y⟩_A|x⟩_B)/√2`.
pub fn make_singlet(a: impl Into<Port>, b: impl Into<Port>) -> Result<FockState> {
    two_term(a.into(), b.into(), -1.0)
}

/// `(|x⟩_A|y⟩_B + |y⟩_A|x⟩_B)/√2`.
pub fn make_triplet_like(a: impl Into<Port>, b: impl Into<Port>) -> Result<FockState> {
    make_r_state(a, b, 1.0)
}

/// `(|x⟩_A|y⟩_B + r|y⟩_A|x⟩_B)/√(1+r²)`.
pub fn make_r_state(a: impl Into<Port>, b: impl Into<Port>, r: f64) -> Result<FockState> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::invalid(format!("r = {r} must be finite and non-negative")));
    }
    two_term(a.into(), b.into(), r)
}

fn two_term(a: Port, b: Port, second: f64) -> Result<FockState> {
    distinct(&a, &b)?;
    let state = FockState::from_creations([
        (real(1.0), vec![ModeId::new(&a, Axis::X), ModeId::new(&b, Axis::Y)]),
        (real(second), vec![ModeId::new(&a, Axis::Y), ModeId::new(&b, Axis::X)]),
    ])?
    .normalize()?;
    debug_assert_eq!(state.photon_number(), Some(2));
    Ok(state)
}

/// Per axis: `a†_inA → t·a†_outA + i r·a†_outB` and `a†_inB → t·a†_outB + i r·a†_outA`.
///
/// Input and output ports may coincide (in-place splitter). The map covers
/// every fringe tag, and carries no phase; see [`BeamSplitter`].
pub fn beam_splitter_map(
    spec: &BeamSplitterSpec,
    in_a: &Port,
    in_b: &Port,
    out_a: &Port,
    out_b: &Port,
) -> Result<ModeMap> {
    spec.validate()?;
    distinct(in_a, in_b)?;
    distinct(out_a, out_b)?;
    let mut map = ModeMap::new();
    for tag in TAGS {
        for axis in Axis::BOTH {
            let t = real(spec.t(axis));
            let ir = Complex64::new(0.0, spec.r(axis));
            map.insert(
                ModeId::tagged(in_a, axis, tag),
                [(ModeId::tagged(out_a, axis, tag), t), (ModeId::tagged(out_b, axis, tag), ir)],
            );
            map.insert(
                ModeId::tagged(in_b, axis, tag),
                [(ModeId::tagged(out_b, axis, tag), t), (ModeId::tagged(out_a, axis, tag), ir)],
            );
        }
    }
    Ok(map)
}

/// In-place polarizing prism at `port`: afterwards the x mode is the
/// channel along `θ` (detector D) and the y mode the orthogonal channel (D⊥).
/// A removed polarizer is the identity.
pub fn analyzer_map(setting: AnalyzerSetting, port: &Port) -> ModeMap {
    let mut map = ModeMap::new();
    let (c, s) = match setting {
        AnalyzerSetting::Angle(t) => (t.cos(), t.sin()),
        AnalyzerSetting::Removed => (1.0, 0.0),
    };
    for tag in TAGS {
        let x = ModeId::tagged(port, Axis::X, tag);
        let y = ModeId::tagged(port, Axis::Y, tag);
        map.insert(x.clone(), [(x.clone(), real(c)), (y.clone(), real(-s))]);
        map.insert(y.clone(), [(x, real(s)), (y, real(c))]);
    }
    map
}

/// Splits every term holding exactly one photon in `a` and one in `b` into
/// two transverse histories, `(e^{iφ/2}|a:0, b:1⟩ + e^{−iφ/2}|a:1, b:0⟩)/√2`.
///
/// After a splitter the transmitted and reflected histories of such a pair
/// then interfere with relative phase `φ`, which gives the `−2AB cos φ`
/// cross term. Terms with any other photon count in `a`, `b` are untouched.
pub fn fringe_prepare(state: &FockState, a: &Port, b: &Port, phi: f64) -> Result<FockState> {
    distinct(a, b)?;
    let modes = state.modes();
    let half = Complex64::from_polar(FRAC_1_SQRT_2, phi / 2.0);
    let half_conj = half.conj();
    let mut terms = Vec::with_capacity(2 * state.len());
    for (occ, amp) in state.terms() {
        let mut ops = Vec::new();
        let mut in_a = Vec::new();
        let mut in_b = Vec::new();
        let mut bosonic = 1.0;
        for (m, &n) in modes.iter().zip(occ) {
            if n == 0 {
                continue;
            }
            bosonic *= (1..=n).map(f64::from).product::<f64>().sqrt();
            for _ in 0..n {
                if m.port == *a {
                    in_a.push(m.clone());
                } else if m.port == *b {
                    in_b.push(m.clone());
                } else {
                    ops.push(m.clone());
                }
            }
        }
        let amp = amp / bosonic;
        match (in_a.as_slice(), in_b.as_slice()) {
            ([pa], [pb]) if pa.tag == 0 && pb.tag == 0 => {
                let mut first = ops.clone();
                first.extend([pa.with_tag(0), pb.with_tag(1)]);
                let mut second = ops;
                second.extend([pa.with_tag(1), pb.with_tag(0)]);
                terms.push((amp * half, first));
                terms.push((amp * half_conj, second));
            }
            _ => {
                ops.extend(in_a);
                ops.extend(in_b);
                terms.push((amp, ops));
            }
        }
    }
    FockState::from_creations(terms)
}

/// A beam splitter together with the fourth-order phase of its input pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSplitter {
    pub spec: BeamSplitterSpec,
    pub in_a: Port,
    pub in_b: Port,
    pub out_a: Port,
    pub out_b: Port,
    pub phi: f64,
}

impl BeamSplitter {
    /// Splitter acting in place on ports `a` and `b`.
    pub fn in_place(spec: BeamSplitterSpec, a: impl Into<Port>, b: impl Into<Port>, phi: f64) -> Self {
        let (a, b) = (a.into(), b.into());
        BeamSplitter { spec, in_a: a.clone(), in_b: b.clone(), out_a: a, out_b: b, phi }
    }

    pub fn map(&self) -> Result<ModeMap> {
        beam_splitter_map(&self.spec, &self.in_a, &self.in_b, &self.out_a, &self.out_b)
    }

    pub fn apply(&self, state: &FockState) -> Result<FockState> {
        let prepared = if self.phi == 0.0 {
            state.clone()
        } else {
            fringe_prepare(state, &self.in_a, &self.in_b, self.phi)?
        };
        prepared.apply(&self.map()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EPS: f64 = 1e-12;

    fn amp(state: &FockState, a: (&str, Axis), b: (&str, Axis)) -> Complex64 {
        state.amplitude(&[(ModeId::new(a.0, a.1), 1), (ModeId::new(b.0, b.1), 1)])
    }

    #[test]
    fn polarized_pair_amplitudes() {
        let s = make_polarized_pair(AnalyzerSetting::angle(0.0), AnalyzerSetting::angle(FRAC_PI_2)).unwrap();
        assert_eq!(s.len(), 1);
        assert!((amp(&s, ("1_0", Axis::X), ("2_0", Axis::Y)) - 1.0).norm() < EPS);

        let s = make_polarized_pair(AnalyzerSetting::angle(PI / 4.0), AnalyzerSetting::angle(PI / 4.0)).unwrap();
        for a in Axis::BOTH {
            for b in Axis::BOTH {
                assert!((amp(&s, ("1_0", a), ("2_0", b)) - 0.5).norm() < EPS);
            }
        }

        let s = make_polarized_pair(AnalyzerSetting::angle(PI / 6.0), AnalyzerSetting::angle(0.0)).unwrap();
        assert!((amp(&s, ("1_0", Axis::X), ("2_0", Axis::X)) - 3f64.sqrt() / 2.0).norm() < EPS);
        assert!(amp(&s, ("1_0", Axis::X), ("2_0", Axis::Y)).norm() < EPS);
        assert!((amp(&s, ("1_0", Axis::Y), ("2_0", Axis::X)) - 0.5).norm() < EPS);
        assert!(amp(&s, ("1_0", Axis::Y), ("2_0", Axis::Y)).norm() < EPS);
    }

    #[test]
    fn polarized_pair_requires_angles() {
        assert!(make_polarized_pair(AnalyzerSetting::Removed, AnalyzerSetting::angle(0.0)).is_err());
    }

    #[test]
    fn singlet_and_r_states() {
        let s = make_singlet("1'", "1").unwrap();
        assert!((amp(&s, ("1'", Axis::X), ("1", Axis::Y)) - FRAC_1_SQRT_2).norm() < EPS);
        assert!((amp(&s, ("1'", Axis::Y), ("1", Axis::X)) + FRAC_1_SQRT_2).norm() < EPS);
        assert_eq!(make_singlet("1", "1"), Err(Error::SamePort("1".into())));

        let t = make_triplet_like("1", "2").unwrap();
        assert!((amp(&t, ("1", Axis::Y), ("2", Axis::X)) - FRAC_1_SQRT_2).norm() < EPS);

        let p = make_r_state("1", "2", 0.0).unwrap();
        assert_eq!(p.len(), 1);

        let r = make_r_state("1", "2", 0.31).unwrap();
        assert!((amp(&r, ("1", Axis::X), ("2", Axis::Y)).re - 0.955_157_6).abs() < 1e-6);
        assert!((amp(&r, ("1", Axis::Y), ("2", Axis::X)).re - 0.296_098_9).abs() < 1e-6);
        assert!(make_r_state("1", "2", -1.0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(BeamSplitterSpec::new(0.9, 0.7, 0.1, 0.7).is_err());
        let s = BeamSplitterSpec::polarized(0.91).unwrap();
        let map = beam_splitter_map(&s, &"1".into(), &"2".into(), &"1".into(), &"2".into()).unwrap();
        assert!(map.unitarity_deviation() < EPS);
        let e = BeamSplitterSpec::from_eberhard_ratio(0.31).unwrap();
        assert!((e.eberhard_ratio() - 0.31).abs() < EPS);
        assert!((e.transmittance_x() - 1.0 / (1.0 + 0.31 * 0.31)).abs() < EPS);
    }

    #[test]
    fn analyzer_channels() {
        let p = Port::from("1");
        let id = analyzer_map(AnalyzerSetting::angle(0.0), &p);
        assert!(id.is_identity(EPS));
        let quarter = analyzer_map(AnalyzerSetting::angle(FRAC_PI_2), &p);
        let img = quarter.image(&ModeId::new("1", Axis::X)).unwrap();
        assert_eq!(img.len(), 1);
        assert_eq!(img[0].0, ModeId::new("1", Axis::Y));
        assert!((img[0].1 + 1.0).norm() < EPS);
        assert!(analyzer_map(AnalyzerSetting::Removed, &p).is_identity(0.0));
    }

    #[test]
    fn phase_models() {
        let fringe = |z1, z2, dz| PhaseModel::TransverseFringe { z1, z2, fringe_spacing: 2.0, detector_width: dz };
        assert_eq!(fringe(0.3, 0.3, 0.0).phase().unwrap(), 0.0);
        assert!((fringe(0.0, 1.0, 0.0).phase().unwrap() - PI).abs() < EPS);
        assert!(fringe(0.0, 1.0, -0.1).phase().is_err());
        let zero_l = PhaseModel::TransverseFringe { z1: 0.0, z2: 0.0, fringe_spacing: 0.0, detector_width: 0.0 };
        assert!(zero_l.phase().is_err());
        let beat = PhaseModel::Beat { delta_omega: 2.0 * PI * 1e13, path_difference: 15e-6, light_speed: 3e8 };
        assert!((beat.phase().unwrap() - PI).abs() < 1e-9);
        assert_eq!(PhaseModel::default().phase().unwrap(), 0.0);
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(AnalyzerSetting::angle(PI), AnalyzerSetting::Angle(0.0));
        let AnalyzerSetting::Angle(t) = AnalyzerSetting::angle(-FRAC_PI_2) else { unreachable!() };
        assert!((t - FRAC_PI_2).abs() < EPS);
        assert_eq!(AnalyzerSetting::Removed.perpendicular(), AnalyzerSetting::Removed);
    }

    #[test]
    fn fringe_preparation_preserves_norm() {
        let s = make_singlet("1'", "1").unwrap().tensor(&make_singlet("2'", "2").unwrap()).unwrap();
        let p = fringe_prepare(&s, &"1".into(), &"2".into(), 1.3).unwrap();
        assert_eq!(p.len(), 2 * s.len());
        assert!((p.norm_sqr() - 1.0).abs() < EPS);
    }

    proptest! {
        #[test]
        fn maps_are_unitary(tx in 0.0f64..=1.0, ty in 0.0f64..=1.0, theta in -10.0f64..10.0) {
            let spec = BeamSplitterSpec::new(tx, ty, (1.0 - tx * tx).sqrt(), (1.0 - ty * ty).sqrt()).unwrap();
            let bs = beam_splitter_map(&spec, &"a".into(), &"b".into(), &"c".into(), &"d".into()).unwrap();
            prop_assert!(bs.unitarity_deviation() < EPS);
            prop_assert!(analyzer_map(AnalyzerSetting::angle(theta), &"a".into()).unitarity_deviation() < EPS);
        }

        #[test]
        fn analyzer_inverse_composes_to_identity(theta in -10.0f64..10.0) {
            let p = Port::from("1");
            let forward = analyzer_map(AnalyzerSetting::Angle(theta), &p);
            let back = analyzer_map(AnalyzerSetting::Angle(-theta), &p);
            prop_assert!(forward.then(&back).is_identity(EPS));
        }
    }
}
