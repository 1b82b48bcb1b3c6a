//! Fock-space pipelines for the two- and four-photon experiments.
//!
//! Each function here builds the source state, propagates it through the
//! splitters and polarizing prisms with [`FockState::apply`], and reads the
//! answer off [`detection_distribution`]. Nothing is taken from the closed
//! forms in [`crate::analytic`]; the two layers are compared in tests.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{detection_distribution, Axis, DetectionPattern, DetectorLayout, FockState, Port};
use crate::optics::{
    analyzer_map, make_singlet, polarized_pair_at, AnalyzerSetting, BeamSplitter, BeamSplitterSpec,
};

pub const D1: &str = "D1";
pub const D1_PERP: &str = "D1perp";
pub const D2: &str = "D2";
pub const D2_PERP: &str = "D2perp";
pub const D1P: &str = "D1'";
pub const D1P_PERP: &str = "D1'perp";
pub const D2P: &str = "D2'";
pub const D2P_PERP: &str = "D2'perp";

/// How the four-photon state entering the central splitter is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceModel {
    /// Two singlets `(1', 1)` and `(2', 2)` taken as given.
    #[default]
    IdealSinglets,
    /// Orthogonally polarized pairs split on 50:50 splitters BS1 and BS2;
    /// both photons may leave on the same side.
    BeamSplitterSources,
}

/// Routes the two prism outputs of `port` to `name` and `name` + `perp`, or
/// both polarizations to `name` when the polarizer is removed.
fn route(layout: &mut DetectorLayout, port: &str, setting: AnalyzerSetting, name: &str, perp: &str) {
    match setting {
        AnalyzerSetting::Angle(_) => {
            layout.assign(port, Axis::X, name).assign(port, Axis::Y, perp);
        }
        AnalyzerSetting::Removed => {
            layout.assign_port(port, name);
        }
    }
}

fn analyze(mut state: FockState, settings: &[(&str, AnalyzerSetting)]) -> Result<FockState> {
    for (port, setting) in settings {
        if !setting.is_removed() {
            state = state.apply(&analyzer_map(*setting, &Port::from(*port)))?;
        }
    }
    Ok(state)
}

fn source_angles(setting: AnalyzerSetting) -> Vec<f64> {
    match setting {
        AnalyzerSetting::Angle(t) => vec![t],
        AnalyzerSetting::Removed => vec![0.0, FRAC_PI_2],
    }
}

/// Polarized photons at `1_0`, `2_0` after a splitter into ports `1`, `2`.
pub fn two_photon_output(theta10: f64, theta20: f64, spec: &BeamSplitterSpec, phi: f64) -> Result<FockState> {
    let (p10, p20) = (Port::from("1_0"), Port::from("2_0"));
    let pair = polarized_pair_at(&p10, theta10, &p20, theta20)?;
    let bs = BeamSplitter { spec: *spec, in_a: p10, in_b: p20, out_a: "1".into(), out_b: "2".into(), phi };
    bs.apply(&pair)
}

/// Opposite-side coincidence D1 ∧ D2.
pub fn prob2(
    theta10: AnalyzerSetting,
    theta20: AnalyzerSetting,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
    spec: &BeamSplitterSpec,
    phi: f64,
) -> Result<f64> {
    let mut layout = DetectorLayout::new();
    route(&mut layout, "1", theta1, D1, D1_PERP);
    route(&mut layout, "2", theta2, D2, D2_PERP);
    let target = DetectionPattern::singles([D1, D2]);
    let mut total = 0.0;
    for t10 in source_angles(theta10) {
        for t20 in source_angles(theta20) {
            let out = analyze(two_photon_output(t10, t20, spec, phi)?, &[("1", theta1), ("2", theta2)])?;
            total += detection_distribution(&out, &layout)?.get(&target).copied().unwrap_or(0.0);
        }
    }
    Ok(total)
}

/// Probability that both photons leave through the same port.
pub fn prob2_same_side(theta10: f64, theta20: f64, spec: &BeamSplitterSpec, phi: f64) -> Result<f64> {
    let out = two_photon_output(theta10, theta20, spec, phi)?;
    let mut layout = DetectorLayout::new();
    layout.assign_port("1", D1).assign_port("2", D2);
    let dist = detection_distribution(&out, &layout)?;
    Ok(dist.iter().filter(|(p, _)| p.count(&D1.into()) != 1).map(|(_, w)| w).sum())
}

/// Rarity–Tapster readout of one arm: a further 50:50 splitter with a vacuum
/// ancilla, polarizer `θa` on one output and `θb` on the other. Returns
/// `2 Σ_arms P(one photon behind each polarizer)`, which is the
/// intensity-correlation value of both photons in one arm.
fn one_arm_readout(
    state: &FockState,
    theta_a: AnalyzerSetting,
    theta_b: AnalyzerSetting,
    extra: &[(&str, AnalyzerSetting, &str, &str)],
) -> Result<f64> {
    let mut total = 0.0;
    for (arm, other) in [("1", "2"), ("2", "1")] {
        let rt = BeamSplitter::in_place(BeamSplitterSpec::balanced(), arm, "rt", 0.0);
        let mut settings = vec![(arm, theta_a), ("rt", theta_b)];
        settings.extend(extra.iter().map(|(p, s, _, _)| (*p, *s)));
        let out = analyze(rt.apply(state)?, &settings)?;
        let mut layout = DetectorLayout::new();
        route(&mut layout, arm, theta_a, "A", "Aperp");
        route(&mut layout, "rt", theta_b, "B", "Bperp");
        layout.assign_port(other, "Q");
        let mut target = vec!["A", "B"];
        for (p, s, name, perp) in extra {
            route(&mut layout, p, *s, name, perp);
            target.push(name);
        }
        let pattern = DetectionPattern::singles(target);
        total += detection_distribution(&out, &layout)?.get(&pattern).copied().unwrap_or(0.0);
    }
    Ok(2.0 * total)
}

/// Both photons in one arm of a 50:50 splitter (φ = 0), resolved by `θ1`, `θ2`.
pub fn prob2_one_arm(theta10: AnalyzerSetting, theta20: AnalyzerSetting, theta1: f64, theta2: f64) -> Result<f64> {
    let bs = BeamSplitterSpec::balanced();
    let mut total = 0.0;
    for t10 in source_angles(theta10) {
        for t20 in source_angles(theta20) {
            let out = two_photon_output(t10, t20, &bs, 0.0)?;
            total += one_arm_readout(&out, AnalyzerSetting::angle(theta1), AnalyzerSetting::angle(theta2), &[])?;
        }
    }
    Ok(total)
}

/// State entering the central splitter.
pub fn four_photon_input(source: SourceModel) -> Result<FockState> {
    match source {
        SourceModel::IdealSinglets => make_singlet("1'", "1")?.tensor(&make_singlet("2'", "2")?),
        SourceModel::BeamSplitterSources => {
            let mut halves = Vec::with_capacity(2);
            for (s, i, prime, plain) in [("s1", "i1", "1'", "1"), ("s2", "i2", "2'", "2")] {
                let (s, i) = (Port::from(s), Port::from(i));
                let pair = polarized_pair_at(&s, 0.0, &i, FRAC_PI_2)?;
                let bs = BeamSplitter {
                    spec: BeamSplitterSpec::balanced(),
                    in_a: s,
                    in_b: i,
                    out_a: prime.into(),
                    out_b: plain.into(),
                    phi: 0.0,
                };
                halves.push(bs.apply(&pair)?);
            }
            halves[0].tensor(&halves[1])
        }
    }
}

/// Four-photon state after the central splitter acting in place on ports `1`, `2`.
pub fn four_photon_output(source: SourceModel, spec: &BeamSplitterSpec, phi: f64) -> Result<FockState> {
    BeamSplitter::in_place(*spec, "1", "2", phi).apply(&four_photon_input(source)?)
}

/// D1', D2', D1, D2 all firing, singlet sources. Visibility `v` replaces
/// `cos φ` by `v cos φ`, the average over the detector width.
pub fn prob4(
    theta1p: AnalyzerSetting,
    theta2p: AnalyzerSetting,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
    spec: &BeamSplitterSpec,
    phi: f64,
    v: f64,
) -> Result<f64> {
    let effective = (v * phi.cos()).clamp(-1.0, 1.0).acos();
    let out = four_photon_output(SourceModel::IdealSinglets, spec, effective)?;
    let out = analyze(out, &[("1'", theta1p), ("2'", theta2p), ("1", theta1), ("2", theta2)])?;
    let mut layout = DetectorLayout::new();
    route(&mut layout, "1'", theta1p, D1P, D1P_PERP);
    route(&mut layout, "2'", theta2p, D2P, D2P_PERP);
    route(&mut layout, "1", theta1, D1, D1_PERP);
    route(&mut layout, "2", theta2, D2, D2_PERP);
    let target = DetectionPattern::singles([D1P, D2P, D1, D2]);
    Ok(detection_distribution(&out, &layout)?.get(&target).copied().unwrap_or(0.0))
}

/// Companions 1 and 2 both in one arm of a 50:50 central splitter (φ = 0),
/// with D1' and D2' firing behind polarizers `theta1p`, `theta2p`.
pub fn prob4_one_arm(
    theta1p: AnalyzerSetting,
    theta2p: AnalyzerSetting,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
) -> Result<f64> {
    let out = four_photon_output(SourceModel::IdealSinglets, &BeamSplitterSpec::balanced(), 0.0)?;
    let prime = [("1'", theta1p, D1P, D1P_PERP), ("2'", theta2p, D2P, D2P_PERP)];
    one_arm_readout(&out, theta1, theta2, &prime)
}

/// Conditional probability of D1' ∧ D2'⊥ given preselection D1 ∧ D2 with
/// polarizers at `π/2` and `0` behind a splitter of ratio `r = r_x/t_x`.
pub fn eberhard_conditional(theta1p: f64, theta2p: f64, r: f64) -> Result<f64> {
    let spec = BeamSplitterSpec::from_eberhard_ratio(r)?;
    let dist = experiment_distribution(
        SourceModel::IdealSinglets,
        &spec,
        0.0,
        Some((AnalyzerSetting::angle(FRAC_PI_2), AnalyzerSetting::angle(0.0))),
        (AnalyzerSetting::angle(theta1p), AnalyzerSetting::angle(theta2p)),
    )?;
    let (d1, d2) = (D1.into(), D2.into());
    let preselected = |p: &DetectionPattern| p.count(&d1) == 1 && p.count(&d2) == 1 && p.total() == 4;
    let norm: f64 = dist.iter().filter(|(p, _)| preselected(p)).map(|(_, w)| w).sum();
    if norm <= 0.0 {
        return Err(Error::invalid("preselection has zero probability"));
    }
    let hit = dist.get(&DetectionPattern::singles([D1, D2, D1P, D2P_PERP])).copied().unwrap_or(0.0);
    Ok(hit / norm)
}

/// Full outcome distribution of the four-photon experiment over the eight
/// detectors. Without preselection polarizers D1 and D2 take both
/// polarizations; a removed prime polarizer sends both to D1' (D2').
pub fn experiment_distribution(
    source: SourceModel,
    spec: &BeamSplitterSpec,
    phi: f64,
    preselection: Option<(AnalyzerSetting, AnalyzerSetting)>,
    prime: (AnalyzerSetting, AnalyzerSetting),
) -> Result<BTreeMap<DetectionPattern, f64>> {
    let (pre1, pre2) = preselection.unwrap_or((AnalyzerSetting::Removed, AnalyzerSetting::Removed));
    let out = four_photon_output(source, spec, phi)?;
    let out = analyze(out, &[("1", pre1), ("2", pre2), ("1'", prime.0), ("2'", prime.1)])?;
    let mut layout = DetectorLayout::new();
    route(&mut layout, "1", pre1, D1, D1_PERP);
    route(&mut layout, "2", pre2, D2, D2_PERP);
    route(&mut layout, "1'", prime.0, D1P, D1P_PERP);
    route(&mut layout, "2'", prime.1, D2P, D2P_PERP);
    detection_distribution(&out, &layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    const EPS: f64 = 1e-12;

    fn ang(t: f64) -> AnalyzerSetting {
        AnalyzerSetting::angle(t)
    }

    #[test]
    fn hong_ou_mandel_and_orthogonal_inputs() {
        let bs = BeamSplitterSpec::balanced();
        let r = AnalyzerSetting::Removed;
        assert!(prob2(ang(0.2), ang(0.2), r, r, &bs, 0.0).unwrap().abs() < EPS);
        assert!((prob2(ang(0.0), ang(FRAC_PI_2), r, r, &bs, 0.0).unwrap() - 0.5).abs() < EPS);
        assert!((prob2(ang(0.0), ang(FRAC_PI_2), ang(0.0), ang(FRAC_PI_2), &bs, 0.0).unwrap() - 0.25).abs() < EPS);
        let p = prob2(ang(0.0), ang(FRAC_PI_2), ang(FRAC_PI_4), ang(-FRAC_PI_4), &bs, PI).unwrap();
        assert!(p.abs() < EPS);
    }

    #[test]
    fn four_photon_examples() {
        let bs = BeamSplitterSpec::balanced();
        let r = AnalyzerSetting::Removed;
        let p = prob4(ang(0.0), ang(FRAC_PI_2), ang(0.0), ang(FRAC_PI_2), &bs, 0.0, 1.0).unwrap();
        assert!((p - 1.0 / 16.0).abs() < EPS);
        assert!(prob4(ang(0.9), ang(0.9), r, r, &bs, 0.0, 1.0).unwrap().abs() < EPS);
    }

    #[test]
    fn source_states_are_normalized() {
        for source in [SourceModel::IdealSinglets, SourceModel::BeamSplitterSources] {
            let s = four_photon_input(source).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < EPS);
            assert_eq!(s.photon_number(), Some(4));
        }
    }

    #[test]
    fn distributions_are_complete() {
        for source in [SourceModel::IdealSinglets, SourceModel::BeamSplitterSources] {
            for phi in [0.0, 1.0, PI] {
                let d = experiment_distribution(
                    source,
                    &BeamSplitterSpec::polarized(0.91).unwrap(),
                    phi,
                    Some((ang(0.3), ang(1.0))),
                    (ang(0.2), AnalyzerSetting::Removed),
                )
                .unwrap();
                assert!((d.values().sum::<f64>() - 1.0).abs() < EPS);
                assert!(d.keys().all(|p| p.total() == 4));
            }
        }
    }

    #[test]
    fn phase_enters_as_mixture_of_extremes() {
        let spec = BeamSplitterSpec::new(0.8, 0.6, 0.6, 0.8).unwrap();
        let prime = (ang(0.4), ang(1.3));
        let pre = Some((ang(0.1), ang(2.0)));
        for source in [SourceModel::IdealSinglets, SourceModel::BeamSplitterSources] {
            let p0 = experiment_distribution(source, &spec, 0.0, pre, prime).unwrap();
            let pi = experiment_distribution(source, &spec, PI, pre, prime).unwrap();
            for phi in [0.3, 1.7, 2.9] {
                let w = (phi / 2.0f64).cos().powi(2);
                let p = experiment_distribution(source, &spec, phi, pre, prime).unwrap();
                for (pattern, prob) in &p {
                    let mix = w * p0.get(pattern).unwrap_or(&0.0) + (1.0 - w) * pi.get(pattern).unwrap_or(&0.0);
                    assert!((prob - mix).abs() < EPS, "{pattern}: {prob} vs {mix}");
                }
            }
        }
    }

    #[test]
    fn eberhard_preselection() {
        let r: f64 = 0.31;
        let p = eberhard_conditional(0.0, 0.0, r).unwrap();
        assert!((p - 1.0 / (1.0 + r * r)).abs() < EPS);
    }
}
