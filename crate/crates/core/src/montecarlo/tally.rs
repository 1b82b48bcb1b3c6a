use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Accepted coincidence of the prime detectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PrimePattern {
    Both,
    SecondPerp,
    FirstPerp,
    BothPerp,
}

impl PrimePattern {
    pub const ALL: [PrimePattern; 4] =
        [PrimePattern::Both, PrimePattern::SecondPerp, PrimePattern::FirstPerp, PrimePattern::BothPerp];

    pub(crate) fn from_perp(first: bool, second: bool) -> Self {
        Self::ALL[usize::from(first) * 2 + usize::from(second)]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PrimePattern::Both => "D1'&D2'",
            PrimePattern::SecondPerp => "D1'&D2'perp",
            PrimePattern::FirstPerp => "D1'perp&D2'",
            PrimePattern::BothPerp => "D1'perp&D2'perp",
        }
    }
}

impl fmt::Display for PrimePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Preselection coincidence that opened the gate. Without preselection
/// polarizers every open gate is `Both`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PreselectionPattern {
    Both,
    SecondPerp,
    FirstPerp,
    BothPerp,
}

impl PreselectionPattern {
    pub const ALL: [PreselectionPattern; 4] = [
        PreselectionPattern::Both,
        PreselectionPattern::SecondPerp,
        PreselectionPattern::FirstPerp,
        PreselectionPattern::BothPerp,
    ];

    pub(crate) fn from_perp(first: bool, second: bool) -> Self {
        Self::ALL[usize::from(first) * 2 + usize::from(second)]
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            PreselectionPattern::Both => "D1&D2",
            PreselectionPattern::SecondPerp => "D1&D2perp",
            PreselectionPattern::FirstPerp => "D1perp&D2",
            PreselectionPattern::BothPerp => "D1perp&D2perp",
        }
    }
}

/// Outcome of gating one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateDecision {
    GateClosed,
    DiscardedNoPrimePair,
    Accepted { preselection: PreselectionPattern, prime: PrimePattern },
}

/// Event counts of a run. Merging is component-wise addition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Tally {
    /// `counts[preselection][prime]`.
    pub counts: [[u64; 4]; 4],
    pub n_gate_opened: u64,
    pub n_discarded: u64,
    pub n_trials: u64,
}

impl Tally {
    pub fn record(&mut self, decision: GateDecision) {
        self.n_trials += 1;
        match decision {
            GateDecision::GateClosed => {}
            GateDecision::DiscardedNoPrimePair => {
                self.n_gate_opened += 1;
                self.n_discarded += 1;
            }
            GateDecision::Accepted { preselection, prime } => {
                self.n_gate_opened += 1;
                self.counts[preselection.index()][prime.index()] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Tally) -> Result<()> {
        let add = |a: &mut u64, b: u64| -> Result<()> {
            *a = a.checked_add(b).ok_or(Error::CounterOverflow)?;
            Ok(())
        };
        for (row, other_row) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                add(c, *o)?;
            }
        }
        add(&mut self.n_gate_opened, other.n_gate_opened)?;
        add(&mut self.n_discarded, other.n_discarded)?;
        add(&mut self.n_trials, other.n_trials)
    }

    pub fn accepted(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn count(&self, pattern: PrimePattern) -> u64 {
        self.counts.iter().map(|row| row[pattern.index()]).sum()
    }

    pub fn count_given(&self, preselection: PreselectionPattern, pattern: PrimePattern) -> u64 {
        self.counts[preselection.index()][pattern.index()]
    }

    pub fn accepted_given(&self, preselection: PreselectionPattern) -> u64 {
        self.counts[preselection.index()].iter().sum()
    }

    /// `n(pattern) / n(all accepted)`.
    pub fn frequency(&self, pattern: PrimePattern) -> Result<f64> {
        ratio(self.count(pattern), self.accepted(), "no accepted events")
    }

    /// Frequency among events accepted under one preselection pattern.
    pub fn conditional_frequency(&self, preselection: PreselectionPattern, pattern: PrimePattern) -> Result<f64> {
        ratio(
            self.count_given(preselection, pattern),
            self.accepted_given(preselection),
            "no accepted events for this preselection pattern",
        )
    }

    /// Estimate of the four-photon probability with the companion polarizers
    /// removed: the frequency divided by 4.
    pub fn estimate_p(&self, pattern: PrimePattern) -> Result<f64> {
        Ok(self.frequency(pattern)? / 4.0)
    }

    /// Binomial standard error of [`Tally::frequency`].
    pub fn standard_error(&self, pattern: PrimePattern) -> Result<f64> {
        let f = self.frequency(pattern)?;
        Ok(binomial_se(f, self.accepted()))
    }

    pub fn conditional_standard_error(&self, preselection: PreselectionPattern, pattern: PrimePattern) -> Result<f64> {
        let f = self.conditional_frequency(preselection, pattern)?;
        Ok(binomial_se(f, self.accepted_given(preselection)))
    }

    pub fn gate_open_rate(&self) -> Result<f64> {
        ratio(self.n_gate_opened, self.n_trials, "no trials")
    }

    pub fn gate_open_standard_error(&self) -> Result<f64> {
        Ok(binomial_se(self.gate_open_rate()?, self.n_trials))
    }
}

pub fn binomial_se(f: f64, n: u64) -> f64 {
    (f * (1.0 - f) / n as f64).sqrt()
}

fn ratio(num: u64, den: u64, what: &str) -> Result<f64> {
    if den == 0 {
        Err(Error::InsufficientStatistics(what.to_owned()))
    } else {
        Ok(num as f64 / den as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tally_from(counts: [u64; 4]) -> Tally {
        let mut t = Tally::default();
        t.counts[0] = counts;
        t.n_gate_opened = counts.iter().sum();
        t.n_trials = 4 * t.n_gate_opened;
        t
    }

    #[test]
    fn equal_counts_give_quarter_frequencies() {
        let t = tally_from([7, 7, 7, 7]);
        for p in PrimePattern::ALL {
            assert_eq!(t.frequency(p).unwrap(), 0.25);
            assert_eq!(t.estimate_p(p).unwrap(), 0.0625);
        }
    }

    #[test]
    fn empty_tally_reports_insufficient_statistics() {
        let t = Tally::default();
        assert!(matches!(t.frequency(PrimePattern::Both), Err(Error::InsufficientStatistics(_))));
        assert!(matches!(t.gate_open_rate(), Err(Error::InsufficientStatistics(_))));
    }

    #[test]
    fn merge_detects_overflow() {
        let mut a = Tally { n_trials: u64::MAX, ..Tally::default() };
        let b = Tally { n_trials: 1, ..Tally::default() };
        assert_eq!(a.merge(&b), Err(Error::CounterOverflow));
    }

    #[test]
    fn record_keeps_invariants() {
        let mut t = Tally::default();
        t.record(GateDecision::GateClosed);
        t.record(GateDecision::DiscardedNoPrimePair);
        t.record(GateDecision::Accepted { preselection: PreselectionPattern::Both, prime: PrimePattern::FirstPerp });
        assert_eq!((t.n_trials, t.n_gate_opened, t.n_discarded, t.accepted()), (3, 2, 1, 1));
        assert_eq!(t.count(PrimePattern::FirstPerp), 1);
    }

    proptest! {
        #[test]
        fn merge_is_commutative_and_associative(
            a in proptest::array::uniform4(0u64..1000),
            b in proptest::array::uniform4(0u64..1000),
            c in proptest::array::uniform4(0u64..1000),
        ) {
            let (ta, tb, tc) = (tally_from(a), tally_from(b), tally_from(c));
            let mut ab = ta;
            ab.merge(&tb).unwrap();
            let mut ba = tb;
            ba.merge(&ta).unwrap();
            prop_assert_eq!(ab, ba);
            let mut ab_c = ab;
            ab_c.merge(&tc).unwrap();
            let mut bc = tb;
            bc.merge(&tc).unwrap();
            let mut a_bc = ta;
            a_bc.merge(&bc).unwrap();
            prop_assert_eq!(ab_c, a_bc);
        }
    }
}
