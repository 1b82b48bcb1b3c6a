//! Closed-form coincidence probabilities.
//!
//! Angles are [`AnalyzerSetting`]s. A removed polarizer at a detector means
//! both prism channels are counted, so the probability is summed over the
//! two orthogonal channels. A removed polarizer at a source means an
//! unpolarized photon, summed over the x and y preparations.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::optics::{AnalyzerSetting, BeamSplitterSpec, InterferenceTerms};

/// Fringe visibility, `0 ≤ v ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Visibility(f64);

impl Visibility {
    pub const PERFECT: Visibility = Visibility(1.0);

    pub fn new(v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&v) {
            Ok(Visibility(v))
        } else {
            Err(Error::invalid(format!("visibility {v} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `s_x cosθi cosθj + s_y sinθi sinθj`.
pub fn s_coeff(s_x: f64, s_y: f64, theta_i: f64, theta_j: f64) -> f64 {
    s_x * theta_i.cos() * theta_j.cos() + s_y * theta_i.sin() * theta_j.sin()
}

/// `q_x sinθi cosθj − q_y cosθi sinθj`.
pub fn q_coeff(q_x: f64, q_y: f64, theta_i: f64, theta_j: f64) -> f64 {
    q_x * theta_i.sin() * theta_j.cos() - q_y * theta_i.cos() * theta_j.sin()
}

/// Detector-side expansion: a removed polarizer contributes both channels.
fn detector_channels(setting: AnalyzerSetting) -> [Option<f64>; 2] {
    match setting {
        AnalyzerSetting::Angle(t) => [Some(t), None],
        AnalyzerSetting::Removed => [Some(0.0), Some(FRAC_PI_2)],
    }
}

fn sum_over<F: FnMut(f64, f64) -> f64>(a: AnalyzerSetting, b: AnalyzerSetting, mut f: F) -> f64 {
    let mut total = 0.0;
    for ta in detector_channels(a).into_iter().flatten() {
        for tb in detector_channels(b).into_iter().flatten() {
            total += f(ta, tb);
        }
    }
    total
}

/// Two polarized photons through one splitter, detected at D1 and D2 on
/// opposite sides: `A² + B² − 2AB cos φ`.
pub fn prob2(
    theta10: AnalyzerSetting,
    theta20: AnalyzerSetting,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
    spec: &BeamSplitterSpec,
    phi: f64,
) -> f64 {
    sum_over(theta10, theta20, |t10, t20| {
        sum_over(theta1, theta2, |t1, t2| two_photon_terms(t10, t20, t1, t2, spec, phi).probability(1.0))
    })
}

pub fn two_photon_terms(t10: f64, t20: f64, t1: f64, t2: f64, spec: &BeamSplitterSpec, phi: f64) -> InterferenceTerms {
    InterferenceTerms {
        a: s_coeff(spec.t_x, spec.t_y, t10, t1) * s_coeff(spec.t_x, spec.t_y, t20, t2),
        b: s_coeff(spec.r_x, spec.r_y, t10, t2) * s_coeff(spec.r_x, spec.r_y, t20, t1),
        phi,
    }
}

/// Both photons leave on one side, polarization not measured (50:50, φ = 0).
pub fn prob2_same_side(theta10: f64, theta20: f64) -> f64 {
    0.5 * (1.0 + (theta10 - theta20).cos().powi(2))
}

/// Opposite sides with one polarizer removed (50:50, φ = 0); independent of `θ1`.
pub fn prob2_unpolarized_out(theta10: f64, theta20: f64) -> f64 {
    0.25 * (theta10 - theta20).sin().powi(2)
}

/// Unpolarized inputs detected on opposite sides (50:50, φ = 0).
pub fn prob2_unpolarized_in(theta1: f64, theta2: f64) -> f64 {
    0.5 * (theta1 - theta2).sin().powi(2)
}

/// Both photons in one arm, resolved by polarizers `θ1`, `θ2` (50:50, φ = 0).
/// Removed source settings sum over x/y preparations.
pub fn prob2_one_arm(theta10: AnalyzerSetting, theta20: AnalyzerSetting, theta1: f64, theta2: f64) -> f64 {
    sum_over(theta10, theta20, |t10, t20| {
        let s = (t10 - theta1).cos() * (t20 - theta2).cos() + (t10 - theta2).cos() * (t20 - theta1).cos();
        0.25 * s * s
    })
}

/// Unpolarized inputs, both in one arm: `½[1 + cos²(θ1 − θ2)]`.
pub fn prob2_one_arm_unpolarized(theta1: f64, theta2: f64) -> f64 {
    0.5 * (1.0 + (theta1 - theta2).cos().powi(2))
}

/// Four photons from two singlets, D1', D2', D1, D2 all firing:
/// `¼(A² + B² − 2vAB cos φ)`.
pub fn prob4(
    theta1p: AnalyzerSetting,
    theta2p: AnalyzerSetting,
    theta1: AnalyzerSetting,
    theta2: AnalyzerSetting,
    spec: &BeamSplitterSpec,
    phi: f64,
    v: Visibility,
) -> f64 {
    sum_over(theta1p, theta2p, |t1p, t2p| {
        sum_over(theta1, theta2, |t1, t2| 0.25 * four_photon_terms(t1p, t2p, t1, t2, spec, phi).probability(v.0))
    })
}

pub fn four_photon_terms(
    t1p: f64,
    t2p: f64,
    t1: f64,
    t2: f64,
    spec: &BeamSplitterSpec,
    phi: f64,
) -> InterferenceTerms {
    InterferenceTerms {
        a: q_coeff(spec.t_x, spec.t_y, t1p, t1) * q_coeff(spec.t_x, spec.t_y, t2p, t2),
        b: q_coeff(spec.r_x, spec.r_y, t1p, t2) * q_coeff(spec.r_x, spec.r_y, t2p, t1),
        phi,
    }
}

/// 50:50, φ = 0, v = 1: `(1/16) sin²(θ1' − θ2') sin²(θ1 − θ2)`.
pub fn prob4_factorized(theta1p: f64, theta2p: f64, theta1: f64, theta2: f64) -> f64 {
    (theta1p - theta2p).sin().powi(2) * (theta1 - theta2).sin().powi(2) / 16.0
}

/// Polarizers behind the central splitter removed, with visibility:
/// `(1/8)[1 − v cos²(θ1' − θ2')]`.
pub fn prob4_removed(theta1p: f64, theta2p: f64, v: Visibility) -> f64 {
    (1.0 - v.0 * (theta1p - theta2p).cos().powi(2)) / 8.0
}

/// Companions 1 and 2 both in one arm of the central splitter (50:50, φ = 0),
/// resolved there by polarizers `θ1`, `θ2`. Removed `θ1`/`θ2` sum over both
/// channels.
///
/// The angles `θ1'`, `θ2'` are the polarizations the companions are
/// projected onto, so with singlet sources this is the coincidence of the
/// orthogonal prime channels D1'⊥ ∧ D2'⊥. Summed over the four prime
/// channel pairs it gives [`prob4_one_arm_nopol`] either way.
pub fn prob4_one_arm(theta1p: f64, theta2p: f64, theta1: AnalyzerSetting, theta2: AnalyzerSetting) -> f64 {
    sum_over(theta1, theta2, |t1, t2| {
        let s = (theta1p - t1).cos() * (theta2p - t2).cos() + (theta1p - t2).cos() * (theta2p - t1).cos();
        s * s / 16.0
    })
}

/// `(1/8)[1 + cos²(θ1' − θ2')]`.
pub fn prob4_one_arm_nopol(theta1p: f64, theta2p: f64) -> f64 {
    (1.0 + (theta1p - theta2p).cos().powi(2)) / 8.0
}

/// D1' with D2'⊥, polarizers behind the central splitter removed: `(1/8) cos²(θ1' − θ2')`.
pub fn prob4_triplet(theta1p: f64, theta2p: f64) -> f64 {
    (theta1p - theta2p).cos().powi(2) / 8.0
}

/// `[sin(πΔz/L)/(πΔz/L)]²`, equal to 1 at `Δz = 0`.
pub fn visibility_from_geometry(detector_width: f64, fringe_spacing: f64) -> Result<f64> {
    if !(fringe_spacing.is_finite() && fringe_spacing > 0.0) {
        return Err(Error::invalid(format!("fringe spacing L = {fringe_spacing} must be positive")));
    }
    if !(detector_width.is_finite() && detector_width >= 0.0) {
        return Err(Error::invalid(format!("detector width {detector_width} must be non-negative")));
    }
    let x = PI * detector_width / fringe_spacing;
    if x < 1e-8 {
        return Ok(1.0 - x * x / 3.0);
    }
    Ok((x.sin() / x).powi(2))
}

/// Detector width (in units of `L`) whose sinc² visibility equals `v`,
/// taken on the main lobe `0 ≤ Δz/L ≤ 1`.
pub fn width_for_visibility(v: Visibility) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let vm = visibility_from_geometry(mid, 1.0).expect("positive spacing");
        if vm > v.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unequal-superposition coincidence D1' ∧ D2'⊥ after preselection by
/// D1 at π/2 and D2 at 0: `(cosθ1' cosθ2' + r sinθ1' sinθ2')² / (1 + r²)`.
pub fn eberhard_prob(theta1p: f64, theta2p: f64, r: f64) -> f64 {
    let s = theta1p.cos() * theta2p.cos() + r * theta1p.sin() * theta2p.sin();
    s * s / (1.0 + r * r)
}
