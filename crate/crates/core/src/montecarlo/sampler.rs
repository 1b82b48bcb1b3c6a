use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, D1, D1P, D1P_PERP, D1_PERP, D2, D2P, D2P_PERP, D2_PERP, SLOTS, SLOT_LABELS};
use super::tally::{GateDecision, PreselectionPattern, PrimePattern};
use crate::engine::experiment_distribution;
use crate::error::Result;
use crate::fock::{DetectionPattern, Detector};
use crate::optics::PhaseModel;

/// Outcomes below this probability are dropped from the sampling tables.
const NEGLIGIBLE: f64 = 1e-24;

/// Photons delivered to each slot.
pub type Delivery = [u8; SLOTS];

/// How the preselection gate is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Bare D1 and D2; the gate opens on their coincidence.
    Coincidence,
    /// Polarizing prisms in front of D1 and D2; exactly one detector per side.
    Analyzed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventRecord {
    pub trial: u64,
    /// Indexed like [`SLOT_LABELS`](super::SLOT_LABELS).
    pub clicks: [bool; SLOTS],
    pub decision: GateDecision,
}

fn exactly_one(a: bool, b: bool) -> bool {
    a ^ b
}

/// Gating rule applied to the clicks of one pulse slot.
pub fn gate_event(clicks: &[bool; SLOTS], scheme: Scheme) -> GateDecision {
    let open = match scheme {
        Scheme::Coincidence => clicks[D1] && clicks[D2],
        Scheme::Analyzed => exactly_one(clicks[D1], clicks[D1_PERP]) && exactly_one(clicks[D2], clicks[D2_PERP]),
    };
    if !open {
        return GateDecision::GateClosed;
    }
    if !(exactly_one(clicks[D1P], clicks[D1P_PERP]) && exactly_one(clicks[D2P], clicks[D2P_PERP])) {
        return GateDecision::DiscardedNoPrimePair;
    }
    GateDecision::Accepted {
        preselection: PreselectionPattern::from_perp(clicks[D1_PERP], clicks[D2_PERP]),
        prime: PrimePattern::from_perp(clicks[D1P_PERP], clicks[D2P_PERP]),
    }
}

/// One realization of `φ`. For a transverse fringe the two detection points
/// are drawn uniformly over the detector widths.
pub fn sample_phase<R: Rng + ?Sized>(model: &PhaseModel, rng: &mut R) -> f64 {
    match *model {
        PhaseModel::Fixed { phi } => phi,
        PhaseModel::Beat { delta_omega, path_difference, light_speed } => delta_omega * path_difference / light_speed,
        PhaseModel::TransverseFringe { z1, z2, fringe_spacing, detector_width } => {
            if detector_width == 0.0 {
                return 2.0 * PI * (z2 - z1) / fringe_spacing;
            }
            let mut jitter = || (rng.random::<f64>() - 0.5) * detector_width;
            let z1s = z1 + jitter();
            let z2s = z2 + jitter();
            2.0 * PI * (z2s - z1s) / fringe_spacing
        }
    }
}

/// Cumulative table over delivery patterns.
#[derive(Debug, Clone)]
struct Table {
    cumulative: Vec<f64>,
    outcomes: Vec<Delivery>,
}

impl Table {
    fn build(dist: impl IntoIterator<Item = (DetectionPattern, f64)>) -> Self {
        let detectors: Vec<Detector> = SLOT_LABELS.iter().map(|l| Detector::from(*l)).collect();
        let mut cumulative = Vec::new();
        let mut outcomes = Vec::new();
        let mut acc = 0.0;
        for (pattern, p) in dist {
            if p < NEGLIGIBLE {
                continue;
            }
            let mut delivery = [0u8; SLOTS];
            for (slot, d) in detectors.iter().enumerate() {
                delivery[slot] = pattern.count(d);
            }
            acc += p;
            cumulative.push(acc);
            outcomes.push(delivery);
        }
        Table { cumulative, outcomes }
    }

    fn sample(&self, u: f64) -> &Delivery {
        let total = *self.cumulative.last().expect("distribution is never empty");
        let target = u * total;
        let i = self.cumulative.partition_point(|&c| c <= target).min(self.outcomes.len() - 1);
        &self.outcomes[i]
    }
}

/// Per-run sampling state: outcome tables at `φ = 0` and `φ = π` and the
/// click probabilities of every slot.
///
/// The outcome distribution at any `φ` is the mixture
/// `cos²(φ/2)·P₀ + sin²(φ/2)·P_π`, so a trial first picks a branch and then
/// an outcome from that branch.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ExperimentConfig,
    scheme: Scheme,
    in_phase: Table,
    out_of_phase: Table,
    /// `click[slot][n]` for `n` photons.
    click: [[f64; 5]; SLOTS],
    base: ChaCha8Rng,
}

impl Simulator {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let dist = |phi| {
            experiment_distribution(config.source, &config.central_bs, phi, config.preselection, config.prime)
                .map(Table::build)
        };
        let in_phase = dist(0.0)?;
        let out_of_phase = dist(PI)?;
        let mut active = [true; SLOTS];
        match config.preselection {
            None => {
                active[D1_PERP] = false;
                active[D2_PERP] = false;
            }
            Some((a, b)) => {
                active[D1_PERP] = !a.is_removed();
                active[D2_PERP] = !b.is_removed();
            }
        }
        active[D1P_PERP] = !config.prime.0.is_removed();
        active[D2P_PERP] = !config.prime.1.is_removed();
        let mut click = [[0.0; 5]; SLOTS];
        for slot in 0..SLOTS {
            if active[slot] {
                for (n, c) in click[slot].iter_mut().enumerate() {
                    *c = config.detectors[slot].click_probability(n as u8);
                }
            }
        }
        Ok(Simulator {
            config: config.clone(),
            scheme: if config.preselection.is_some() { Scheme::Analyzed } else { Scheme::Coincidence },
            in_phase,
            out_of_phase,
            click,
            base: rand::SeedableRng::seed_from_u64(config.seed),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Independent stream for `trial`; the same for every schedule.
    fn stream(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(trial);
        rng
    }

    pub fn event(&self, trial: u64) -> EventRecord {
        let mut rng = self.stream(trial);
        let phi = sample_phase(&self.config.phase, &mut rng);
        let w = (phi / 2.0).cos().powi(2);
        let table = if bernoulli(&mut rng, w) { &self.in_phase } else { &self.out_of_phase };
        let delivery = table.sample(rng.random::<f64>());
        let mut clicks = [false; SLOTS];
        for slot in 0..SLOTS {
            let n = usize::from(delivery[slot]).min(4);
            clicks[slot] = bernoulli(&mut rng, self.click[slot][n]);
        }
        EventRecord { trial, clicks, decision: gate_event(&clicks, self.scheme) }
    }
}

/// Draws only when the outcome is uncertain, so exact zeros stay exact.
fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::f64::consts::FRAC_PI_2;

    fn clicks(on: &[usize]) -> [bool; SLOTS] {
        let mut c = [false; SLOTS];
        for &i in on {
            c[i] = true;
        }
        c
    }

    #[test]
    fn gating_rules() {
        let accepted = gate_event(&clicks(&[D1, D2, D1P, D2P_PERP]), Scheme::Coincidence);
        assert_eq!(
            accepted,
            GateDecision::Accepted { preselection: PreselectionPattern::Both, prime: PrimePattern::SecondPerp }
        );
        assert_eq!(gate_event(&clicks(&[D1, D1P, D2P]), Scheme::Coincidence), GateDecision::GateClosed);
        assert_eq!(
            gate_event(&clicks(&[D1, D2, D1P, D1P_PERP, D2P]), Scheme::Coincidence),
            GateDecision::DiscardedNoPrimePair
        );
        assert_eq!(gate_event(&clicks(&[D1, D1_PERP, D2, D1P, D2P]), Scheme::Analyzed), GateDecision::GateClosed);
        assert_eq!(
            gate_event(&clicks(&[D1_PERP, D2, D1P_PERP, D2P_PERP]), Scheme::Analyzed),
            GateDecision::Accepted { preselection: PreselectionPattern::FirstPerp, prime: PrimePattern::BothPerp }
        );
    }

    #[test]
    fn zero_width_fringe_is_deterministic() {
        let model = PhaseModel::TransverseFringe { z1: 0.1, z2: 0.35, fringe_spacing: 1.0, detector_width: 0.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert!((sample_phase(&model, &mut rng) - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn table_sampling_hits_every_outcome() {
        let mut a = DetectionPattern::new();
        a.add(Detector::from(SLOT_LABELS[0]), 1);
        let mut b = DetectionPattern::new();
        b.add(Detector::from(SLOT_LABELS[3]), 2);
        let t = Table::build([(a, 0.25), (b, 0.75)]);
        assert_eq!(t.sample(0.0)[0], 1);
        assert_eq!(t.sample(0.2499)[0], 1);
        assert_eq!(t.sample(0.25)[3], 2);
        assert_eq!(t.sample(0.999_999)[3], 2);
    }
}
