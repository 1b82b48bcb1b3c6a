//! JSON run configuration.
//!
//! Five top-level sections, all optional: `experiment`, `phase`,
//! `detectors`, `angles`, `run`. Angles are degrees or the string
//! `"removed"`. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::Visibility;
use crate::bell::{AngleQuadruple, SearchOptions, VisibilityConvention};
use crate::engine::SourceModel;
use crate::error::{Error, Result};
use crate::montecarlo::{fringe_with_visibility, DetectorSpec, ExperimentConfig, SLOTS, SLOT_LABELS};
use crate::optics::{AnalyzerSetting, BeamSplitterSpec, PhaseModel};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub phase: PhaseSection,
    #[serde(default)]
    pub detectors: DetectorsSection,
    #[serde(default)]
    pub angles: AnglesSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    #[serde(default)]
    pub source: SourceModel,
    /// Amplitude coefficients of the central splitter; 50:50 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_bs: Option<BeamSplitterSpec>,
    /// Polarizing central splitter with `r_x / t_x = r`, 50:50 on y.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eberhard_ratio: Option<f64>,
}

impl ExperimentSection {
    pub fn splitter(&self) -> Result<BeamSplitterSpec> {
        match (self.central_bs, self.eberhard_ratio) {
            (Some(_), Some(_)) => Err(Error::Config("experiment: give central_bs or eberhard_ratio, not both".into())),
            (Some(spec), None) => {
                spec.validate().map_err(|e| Error::Config(format!("experiment.central_bs: {e}")))?;
                Ok(spec)
            }
            (None, Some(r)) => {
                BeamSplitterSpec::from_eberhard_ratio(r).map_err(|e| Error::Config(format!("experiment.eberhard_ratio: {e}")))
            }
            (None, None) => Ok(BeamSplitterSpec::balanced()),
        }
    }
}

/// Phase model. `visibility` is shorthand for a transverse fringe with unit
/// spacing whose detector width produces visibility `v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseSection {
    Fixed {
        #[serde(default)]
        phi: f64,
    },
    TransverseFringe {
        z1: f64,
        z2: f64,
        fringe_spacing: f64,
        detector_width: f64,
    },
    Beat {
        delta_omega: f64,
        path_difference: f64,
        light_speed: f64,
    },
    Visibility {
        #[serde(default)]
        phi: f64,
        v: f64,
    },
}

impl Default for PhaseSection {
    fn default() -> Self {
        PhaseSection::Fixed { phi: 0.0 }
    }
}

impl PhaseSection {
    pub fn model(&self) -> Result<PhaseModel> {
        let model = match *self {
            PhaseSection::Fixed { phi } => PhaseModel::Fixed { phi },
            PhaseSection::TransverseFringe { z1, z2, fringe_spacing, detector_width } => {
                PhaseModel::TransverseFringe { z1, z2, fringe_spacing, detector_width }
            }
            PhaseSection::Beat { delta_omega, path_difference, light_speed } => {
                PhaseModel::Beat { delta_omega, path_difference, light_speed }
            }
            PhaseSection::Visibility { phi, v } => {
                fringe_with_visibility(phi, Visibility::new(v).map_err(|e| Error::Config(format!("phase.v: {e}")))?)
            }
        };
        model.validate().map_err(|e| Error::Config(format!("phase: {e}")))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorsSection {
    #[serde(default = "one")]
    pub efficiency: f64,
    #[serde(default)]
    pub dark_count_prob: f64,
    /// Per-detector values keyed by label (`D1`, `D1perp`, `D1'`, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, DetectorSpec>,
}

impl Default for DetectorsSection {
    fn default() -> Self {
        DetectorsSection { efficiency: 1.0, dark_count_prob: 0.0, overrides: BTreeMap::new() }
    }
}

impl DetectorsSection {
    pub fn specs(&self) -> Result<[DetectorSpec; SLOTS]> {
        let common = DetectorSpec::new(self.efficiency, self.dark_count_prob)
            .map_err(|e| Error::Config(format!("detectors: {e}")))?;
        let mut specs = [common; SLOTS];
        for (label, spec) in &self.overrides {
            let slot = SLOT_LABELS.iter().position(|l| l == label).ok_or_else(|| {
                Error::Config(format!("detectors.overrides: unknown detector {label:?}, expected one of {SLOT_LABELS:?}"))
            })?;
            spec.validate().map_err(|e| Error::Config(format!("detectors.overrides.{label}: {e}")))?;
            specs[slot] = *spec;
        }
        Ok(specs)
    }
}

/// An angle in degrees, or `"removed"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Degrees(f64),
    Keyword(Removed),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Removed {
    #[serde(rename = "removed")]
    Removed,
}

impl Angle {
    pub const REMOVED: Angle = Angle::Keyword(Removed::Removed);

    pub fn setting(self) -> Result<AnalyzerSetting> {
        match self {
            Angle::Degrees(d) if d.is_finite() => Ok(AnalyzerSetting::degrees(d)),
            Angle::Degrees(d) => Err(Error::Config(format!("angle {d} is not finite"))),
            Angle::Keyword(Removed::Removed) => Ok(AnalyzerSetting::Removed),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnglesSection {
    /// Polarizers at D1, D2. Absent means bare detectors gated on D1∧D2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preselection: Option<[Angle; 2]>,
    #[serde(default = "zero_pair")]
    pub prime: [Angle; 2],
    /// `(a, a', b, b')` in degrees for the `bell` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell: Option<[f64; 4]>,
}

impl Default for AnglesSection {
    fn default() -> Self {
        AnglesSection { preselection: None, prime: zero_pair(), bell: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pulse_period")]
    pub pulse_period: f64,
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub analytic: Vec<AnalyticRequest>,
    #[serde(default)]
    pub bell: BellSection,
    #[serde(default)]
    pub scan: ScanSection,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            trials: default_trials(),
            seed: 0,
            pulse_period: default_pulse_period(),
            window: default_window(),
            analytic: Vec::new(),
            bell: BellSection::default(),
            scan: ScanSection::default(),
        }
    }
}

/// One closed form evaluated on the cartesian product of its grid axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticRequest {
    pub formula: String,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Angle>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    #[default]
    Visibility,
    Eberhard,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BellSection {
    #[serde(default)]
    pub predictor: PredictorKind,
    #[serde(default = "one")]
    pub v: f64,
    #[serde(default = "fringe")]
    pub convention: VisibilityConvention,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "half")]
    pub grid_step_deg: f64,
    #[serde(default = "yes")]
    pub refine: bool,
}

impl Default for BellSection {
    fn default() -> Self {
        BellSection {
            predictor: PredictorKind::Visibility,
            v: 1.0,
            convention: VisibilityConvention::Fringe,
            eta: 1.0,
            r: 1.0,
            grid_step_deg: 0.5,
            refine: true,
        }
    }
}

impl BellSection {
    pub fn search(&self) -> Result<SearchOptions> {
        search_options(self.grid_step_deg, self.refine, "run.bell.grid_step_deg")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(default = "default_visibilities")]
    pub visibilities: Vec<f64>,
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    #[serde(default = "one")]
    pub eberhard_visibility: f64,
    #[serde(default = "half")]
    pub grid_step_deg: f64,
    #[serde(default = "one")]
    pub eberhard_grid_step_deg: f64,
    #[serde(default = "yes")]
    pub refine: bool,
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            visibilities: default_visibilities(),
            r_values: default_r_values(),
            eberhard_visibility: 1.0,
            grid_step_deg: 0.5,
            eberhard_grid_step_deg: 1.0,
            refine: true,
        }
    }
}

fn search_options(step_deg: f64, refine: bool, field: &str) -> Result<SearchOptions> {
    if !(step_deg.is_finite() && step_deg > 0.0 && step_deg <= 180.0) {
        return Err(Error::Config(format!("{field} = {step_deg} must lie in (0, 180]")));
    }
    Ok(SearchOptions::degrees(step_deg, refine))
}

impl ScanSection {
    pub fn search(&self) -> Result<SearchOptions> {
        search_options(self.grid_step_deg, self.refine, "run.scan.grid_step_deg")
    }

    pub fn eberhard_search(&self) -> Result<SearchOptions> {
        search_options(self.eberhard_grid_step_deg, self.refine, "run.scan.eberhard_grid_step_deg")
    }
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn fringe() -> VisibilityConvention {
    VisibilityConvention::Fringe
}
fn zero_pair() -> [Angle; 2] {
    [Angle::Degrees(0.0), Angle::Degrees(0.0)]
}
fn default_trials() -> u64 {
    100_000
}
fn default_pulse_period() -> f64 {
    ExperimentConfig::DEFAULT_PULSE_PERIOD
}
fn default_window() -> f64 {
    ExperimentConfig::DEFAULT_WINDOW
}
fn default_visibilities() -> Vec<f64> {
    vec![1.0, 0.87, 0.8]
}
fn default_r_values() -> Vec<f64> {
    vec![1.0, 0.8, 0.6, 0.5, 0.4, 0.31, 0.2]
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Compact JSON with every default filled in; the input to the hash.
    pub fn normalized(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn sha256(&self) -> String {
        format!("{:x}", Sha256::digest(self.normalized().as_bytes()))
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let prime = (self.angles.prime[0].setting()?, self.angles.prime[1].setting()?);
        let preselection = match self.angles.preselection {
            Some([a, b]) => Some((a.setting()?, b.setting()?)),
            None => None,
        };
        let cfg = ExperimentConfig {
            source: self.experiment.source,
            central_bs: self.experiment.splitter()?,
            phase: self.phase.model()?,
            preselection,
            prime,
            detectors: self.detectors.specs()?,
            trials: self.run.trials,
            seed: self.run.seed,
            pulse_period: self.run.pulse_period,
            window: self.run.window,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn bell_quadruple(&self) -> Option<AngleQuadruple> {
        self.angles.bell.map(|[a, a2, b, b2]| AngleQuadruple::degrees(a, a2, b, b2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_takes_defaults() {
        let c = Config::from_json("{}").unwrap();
        assert_eq!(c, Config::default());
        let e = c.experiment_config().unwrap();
        assert_eq!(e.trials, 100_000);
        assert_eq!(e.preselection, None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Config::from_json(r#"{"experimnet": {}}"#), Err(Error::Config(_))));
        assert!(matches!(Config::from_json(r#"{"run": {"trails": 3}}"#), Err(Error::Config(_))));
        assert!(matches!(Config::from_json(r#"{"phase": {"model": "fixed", "psi": 1}}"#), Err(Error::Config(_))));
    }

    #[test]
    fn angles_accept_degrees_and_removed() {
        let c = Config::from_json(r#"{"angles": {"prime": [45, "removed"], "preselection": [90, 0]}}"#).unwrap();
        let e = c.experiment_config().unwrap();
        assert_eq!(e.prime.1, AnalyzerSetting::Removed);
        assert!((e.prime.0.radians().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(Config::from_json(r#"{"angles": {"prime": [45, "gone"]}}"#).is_err());
    }

    #[test]
    fn normalized_echo_round_trips() {
        let text = r#"{"experiment": {"eberhard_ratio": 0.31},
                       "phase": {"model": "visibility", "v": 0.87},
                       "detectors": {"efficiency": 0.9, "overrides": {"D2'": {"efficiency": 0.8}}},
                       "angles": {"prime": [0, 22.5]},
                       "run": {"analytic": [{"formula": "prob4_removed", "grid": {"theta2p": [0, 90, "removed"]}}]}}"#;
        let c = Config::from_json(text).unwrap();
        let again = Config::from_json(&c.normalized()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.sha256(), again.sha256());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let bad = [
            r#"{"detectors": {"efficiency": 1.5}}"#,
            r#"{"detectors": {"overrides": {"D9": {"efficiency": 0.5}}}}"#,
            r#"{"run": {"trials": 0}}"#,
            r#"{"run": {"window": 1e-7}}"#,
            r#"{"experiment": {"eberhard_ratio": 0.3, "central_bs": {"t_x": 1, "t_y": 1, "r_x": 0, "r_y": 0}}}"#,
            r#"{"phase": {"model": "visibility", "v": 2}}"#,
        ];
        for text in bad {
            let c = Config::from_json(text).unwrap();
            assert!(matches!(c.experiment_config(), Err(Error::Config(_))), "{text}");
        }
    }
}
