//! Quick oracle checks runnable from the installed binary.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{self, Visibility};
use crate::bell::{efficiency_threshold_fringe, optimize_angles, SearchOptions, VisibilityPredictor};
use crate::engine;
use crate::error::Result;
use crate::montecarlo::{run_trials, run_trials_sequential, ExperimentConfig};
use crate::optics::{AnalyzerSetting, BeamSplitterSpec};

const TUPLES: usize = 100;
const TOL: f64 = 1e-10;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn worst<F: FnMut(&mut ChaCha8Rng) -> Result<f64>>(seed: u64, mut f: F) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..TUPLES {
        worst = worst.max(f(&mut rng)?);
    }
    Ok(worst)
}

fn random_spec(rng: &mut ChaCha8Rng) -> BeamSplitterSpec {
    let tx: f64 = rng.random_range(0.0..1.0);
    let ty: f64 = rng.random_range(0.0..1.0);
    BeamSplitterSpec::new(tx, ty, (1.0 - tx * tx).sqrt(), (1.0 - ty * ty).sqrt()).expect("lossless by construction")
}

fn angle(rng: &mut ChaCha8Rng) -> AnalyzerSetting {
    AnalyzerSetting::angle(rng.random_range(0.0..PI))
}

fn deviation_check(name: &'static str, result: Result<f64>) -> Check {
    match result {
        Ok(dev) => Check { name, passed: dev < TOL, detail: format!("max deviation {dev:.2e}") },
        Err(e) => Check { name, passed: false, detail: e.to_string() },
    }
}

pub fn run() -> Vec<Check> {
    let mut checks = Vec::new();

    checks.push(deviation_check(
        "two-photon closed form vs engine",
        worst(11, |rng| {
            let spec = random_spec(rng);
            let phi = rng.random_range(-PI..PI);
            let s = [angle(rng), angle(rng), angle(rng), angle(rng)];
            let exact = engine::prob2(s[0], s[1], s[2], s[3], &spec, phi)?;
            Ok((analytic::prob2(s[0], s[1], s[2], s[3], &spec, phi) - exact).abs())
        }),
    ));

    checks.push(deviation_check(
        "four-photon closed form vs engine",
        worst(12, |rng| {
            let spec = random_spec(rng);
            let phi = rng.random_range(-PI..PI);
            let v = rng.random_range(0.0..=1.0);
            let s = [angle(rng), angle(rng), angle(rng), angle(rng)];
            let exact = engine::prob4(s[0], s[1], s[2], s[3], &spec, phi, v)?;
            Ok((analytic::prob4(s[0], s[1], s[2], s[3], &spec, phi, Visibility::new(v)?) - exact).abs())
        }),
    ));

    checks.push(deviation_check(
        "unequal superposition vs engine",
        worst(13, |rng| {
            let (a, b) = (rng.random_range(0.0..PI), rng.random_range(0.0..PI));
            let r = rng.random_range(0.0..2.0);
            Ok((analytic::eberhard_prob(a, b, r) - engine::eberhard_conditional(a, b, r)?).abs())
        }),
    ));

    let optimum = optimize_angles(&VisibilityPredictor::ideal(), SearchOptions::degrees(1.0, true));
    checks.push(match optimum {
        Ok(r) => Check {
            name: "CH optimum of the singlet",
            passed: (r.s - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-6,
            detail: format!("S_max = {:.8}", r.s),
        },
        Err(e) => Check { name: "CH optimum of the singlet", passed: false, detail: e.to_string() },
    });

    let eta = efficiency_threshold_fringe(1.0).unwrap_or(f64::NAN);
    checks.push(Check {
        name: "efficiency threshold at v = 1",
        passed: (eta - 0.828_427_124_746_190_2).abs() < 1e-12,
        detail: format!("eta = {eta:.6}"),
    });

    let cfg = ExperimentConfig::ideal((AnalyzerSetting::degrees(20.0), AnalyzerSetting::degrees(80.0)), 20_000, 5)
        .with_efficiency(0.9);
    let det = run_trials(&cfg).and_then(|a| run_trials_sequential(&cfg).map(|b| (a, b)));
    checks.push(match det {
        Ok((a, b)) => Check {
            name: "parallel and sequential tallies identical",
            passed: a == b,
            detail: format!("{} accepted events", a.accepted()),
        },
        Err(e) => Check { name: "parallel and sequential tallies identical", passed: false, detail: e.to_string() },
    });

    checks
}
