//! Event-level simulation of the preselection experiment.
//!
//! Each trial is one pump pulse. The outcome is drawn from the exact Fock
//! distribution, photons become clicks on threshold detectors, and the gate
//! decides whether the prime coincidence is kept. Trial `k` always reads
//! stream `k` of the seeded ChaCha8 generator, so the tally does not depend
//! on how trials are spread over threads.

mod config;
mod sampler;
mod tally;

pub use config::{fringe_with_visibility, DetectorSpec, ExperimentConfig, SLOTS, SLOT_LABELS};
pub use sampler::{gate_event, sample_phase, Delivery, EventRecord, Scheme, Simulator};
pub use tally::{binomial_se, GateDecision, PreselectionPattern, PrimePattern, Tally};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optics::PhaseModel;
use crate::par;

/// Trials per work unit.
pub const CHUNK: u64 = 4096;

fn chunks(trials: u64) -> Result<usize> {
    usize::try_from(trials.div_ceil(CHUNK)).map_err(|_| Error::CounterOverflow)
}

fn chunk_range(i: usize, trials: u64) -> std::ops::Range<u64> {
    let start = i as u64 * CHUNK;
    start..(start + CHUNK).min(trials)
}

impl Simulator {
    fn tally_range(&self, range: std::ops::Range<u64>) -> Tally {
        let mut t = Tally::default();
        for trial in range {
            t.record(self.event(trial).decision);
        }
        t
    }

    /// Runs every trial, in parallel chunks when the `parallel` feature is on.
    pub fn run(&self) -> Result<Tally> {
        let trials = self.config().trials;
        let parts = par::map_indexed(chunks(trials)?, |i| self.tally_range(chunk_range(i, trials)));
        let mut total = Tally::default();
        for part in &parts {
            total.merge(part)?;
        }
        Ok(total)
    }

    /// Same result as [`Simulator::run`] on the calling thread.
    pub fn run_sequential(&self) -> Result<Tally> {
        let trials = self.config().trials;
        let mut total = Tally::default();
        for i in 0..chunks(trials)? {
            total.merge(&self.tally_range(chunk_range(i, trials)))?;
        }
        Ok(total)
    }
}

pub fn run_trials(config: &ExperimentConfig) -> Result<Tally> {
    Simulator::new(config)?.run()
}

pub fn run_trials_sequential(config: &ExperimentConfig) -> Result<Tally> {
    Simulator::new(config)?.run_sequential()
}

/// Sample mean of `cos φ` over `draws` phase realizations, with its standard
/// error. Draw `k` uses stream `k` of `seed`.
pub fn mean_cos_phase(model: &PhaseModel, draws: u64, seed: u64) -> Result<(f64, f64)> {
    model.validate()?;
    if draws < 2 {
        return Err(Error::InsufficientStatistics("need at least two phase draws".into()));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let parts = par::map_indexed(chunks(draws)?, |i| {
        let (mut s, mut s2) = (0.0, 0.0);
        for k in chunk_range(i, draws) {
            let mut rng = base.clone();
            rng.set_stream(k);
            let c = sample_phase(model, &mut rng).cos();
            s += c;
            s2 += c * c;
        }
        (s, s2)
    });
    let (s, s2) = parts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = draws as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Visibility;
    use crate::optics::AnalyzerSetting;

    fn deg(d: f64) -> AnalyzerSetting {
        AnalyzerSetting::degrees(d)
    }

    #[test]
    fn parallel_and_sequential_runs_agree() {
        let cfg = ExperimentConfig::ideal((deg(10.0), deg(70.0)), 10_000, 42)
            .with_efficiency(0.9)
            .with_visibility(Visibility::new(0.87).unwrap())
            .unwrap();
        assert_eq!(run_trials(&cfg).unwrap(), run_trials_sequential(&cfg).unwrap());
    }

    #[test]
    fn parallel_prime_settings_never_coincide() {
        let cfg = ExperimentConfig::ideal((deg(33.0), deg(33.0)), 20_000, 7);
        let t = run_trials(&cfg).unwrap();
        assert_eq!(t.count(PrimePattern::Both), 0);
        assert_eq!(t.count(PrimePattern::BothPerp), 0);
        assert!(t.accepted() > 0);
    }

    #[test]
    fn tally_invariants_hold() {
        let mut cfg = ExperimentConfig::ideal((deg(0.0), deg(45.0)), 5_000, 1).with_efficiency(0.7);
        cfg.detectors[3].dark_count_prob = 0.05;
        cfg.preselection = Some((deg(90.0), deg(0.0)));
        let t = run_trials(&cfg).unwrap();
        assert!(t.accepted() + t.n_discarded == t.n_gate_opened);
        assert!(t.n_gate_opened <= t.n_trials);
        assert_eq!(t.n_trials, 5_000);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = ExperimentConfig::ideal((deg(0.0), deg(0.0)), 0, 1);
        assert!(matches!(run_trials(&cfg), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn window_must_fit_in_pulse_period() {
        let mut cfg = ExperimentConfig::ideal((deg(0.0), deg(0.0)), 1, 1);
        cfg.window = cfg.pulse_period;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn different_seeds_differ() {
        let a = run_trials(&ExperimentConfig::ideal((deg(0.0), deg(60.0)), 4_000, 1)).unwrap();
        let b = run_trials(&ExperimentConfig::ideal((deg(0.0), deg(60.0)), 4_000, 2)).unwrap();
        assert_ne!(a, b);
    }
}
