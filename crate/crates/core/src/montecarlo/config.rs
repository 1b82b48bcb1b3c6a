use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{width_for_visibility, Visibility};
use crate::engine::{self, SourceModel};
use crate::error::{Error, Result};
use crate::optics::{AnalyzerSetting, BeamSplitterSpec, PhaseModel};

pub const SLOTS: usize = 8;

/// Detector slots in tally order.
pub const SLOT_LABELS: [&str; SLOTS] = [
    engine::D1,
    engine::D1_PERP,
    engine::D2,
    engine::D2_PERP,
    engine::D1P,
    engine::D1P_PERP,
    engine::D2P,
    engine::D2P_PERP,
];

pub(crate) const D1: usize = 0;
pub(crate) const D1_PERP: usize = 1;
pub(crate) const D2: usize = 2;
pub(crate) const D2_PERP: usize = 3;
pub(crate) const D1P: usize = 4;
pub(crate) const D1P_PERP: usize = 5;
pub(crate) const D2P: usize = 6;
pub(crate) const D2P_PERP: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub efficiency: f64,
    #[serde(default)]
    pub dark_count_prob: f64,
}

impl DetectorSpec {
    pub const IDEAL: DetectorSpec = DetectorSpec { efficiency: 1.0, dark_count_prob: 0.0 };

    pub fn new(efficiency: f64, dark_count_prob: f64) -> Result<Self> {
        let d = DetectorSpec { efficiency, dark_count_prob };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::invalid(format!("efficiency {} outside [0, 1]", self.efficiency)));
        }
        if !(0.0..=1.0).contains(&self.dark_count_prob) {
            return Err(Error::invalid(format!("dark count probability {} outside [0, 1]", self.dark_count_prob)));
        }
        Ok(())
    }

    /// Threshold detector: `1 − (1−η)ⁿ (1−d)`.
    pub fn click_probability(&self, photons: u8) -> f64 {
        1.0 - (1.0 - self.efficiency).powi(i32::from(photons)) * (1.0 - self.dark_count_prob)
    }
}

impl Default for DetectorSpec {
    fn default() -> Self {
        Self::IDEAL
    }
}

/// One Monte Carlo run of the four-photon preselection experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceModel,
    pub central_bs: BeamSplitterSpec,
    pub phase: PhaseModel,
    /// Polarizers in front of D1 and D2. `None` means bare D1, D2 detectors.
    pub preselection: Option<(AnalyzerSetting, AnalyzerSetting)>,
    pub prime: (AnalyzerSetting, AnalyzerSetting),
    /// Indexed like [`SLOT_LABELS`].
    pub detectors: [DetectorSpec; SLOTS],
    pub trials: u64,
    pub seed: u64,
    /// Seconds between pump pulses.
    pub pulse_period: f64,
    /// Coincidence window in seconds.
    pub window: f64,
}

impl ExperimentConfig {
    pub const DEFAULT_PULSE_PERIOD: f64 = 50e-9;
    pub const DEFAULT_WINDOW: f64 = 10e-9;

    /// Ideal singlet sources, 50:50 splitter, φ = 0, perfect detectors.
    pub fn ideal(prime: (AnalyzerSetting, AnalyzerSetting), trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            source: SourceModel::IdealSinglets,
            central_bs: BeamSplitterSpec::balanced(),
            phase: PhaseModel::default(),
            preselection: None,
            prime,
            detectors: [DetectorSpec::IDEAL; SLOTS],
            trials,
            seed,
            pulse_period: Self::DEFAULT_PULSE_PERIOD,
            window: Self::DEFAULT_WINDOW,
        }
    }

    pub fn with_efficiency(mut self, efficiency: f64) -> Self {
        for d in &mut self.detectors {
            d.efficiency = efficiency;
        }
        self
    }

    /// Replaces the phase model by a transverse fringe with the same centre
    /// phase and a detector width that yields visibility `v`.
    pub fn with_visibility(mut self, v: Visibility) -> Result<Self> {
        self.phase = fringe_with_visibility(self.phase.phase()?, v);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.central_bs.validate()?;
        self.phase.validate()?;
        for d in &self.detectors {
            d.validate()?;
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if !(self.pulse_period.is_finite() && self.pulse_period > 0.0) {
            return Err(Error::invalid(format!("pulse period {} must be positive", self.pulse_period)));
        }
        if !(self.window.is_finite() && self.window > 0.0 && self.window < self.pulse_period) {
            return Err(Error::invalid(format!(
                "window {} must be positive and shorter than the pulse period {}",
                self.window, self.pulse_period
            )));
        }
        Ok(())
    }
}

/// Transverse-fringe model with unit fringe spacing, centre phase `phi` and
/// visibility `v`.
pub fn fringe_with_visibility(phi: f64, v: Visibility) -> PhaseModel {
    PhaseModel::TransverseFringe {
        z1: 0.0,
        z2: phi / (2.0 * PI),
        fringe_spacing: 1.0,
        detector_width: width_for_visibility(v),
    }
}
