//! Spin-correlated fourth-order interference on beam splitters.
//!
//! The crate computes coincidence probabilities for two- and four-photon
//! polarization experiments in three independent ways: closed forms
//! ([`analytic`]), exact Fock-space propagation ([`fock`], [`optics`],
//! [`engine`]) and an event-level Monte Carlo with threshold detectors and
//! preselection gating ([`montecarlo`]). [`bell`] evaluates the CH
//! inequality and detector-efficiency thresholds on top of any of them.

pub mod analytic;
pub mod bell;
pub mod cli;
pub mod engine;
pub mod error;
pub mod fock;
pub mod montecarlo;
pub mod optics;
pub mod par;

pub use error::{Error, Result};
