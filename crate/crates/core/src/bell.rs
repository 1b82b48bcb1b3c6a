//! Clauser–Horne inequality on the prime pair.
//!
//! With `a, a'` the settings at D1' and `b, b'` those at D2',
//!
//! ```text
//! S = P(a,b) − P(a,b') + P(a',b') + P(a',b) − P(a',∞) − P(∞,b) ≤ 0
//! ```
//!
//! holds for every local model. `P` is anything implementing
//! [`JointProbability`]: a closed-form predictor, or Monte Carlo frequencies.

use std::f64::consts::{PI, SQRT_2};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::montecarlo::{ExperimentConfig, PrimePattern, Simulator};
use crate::optics::AnalyzerSetting;
use crate::par;

/// Joint detection probability of the prime pair. A removed setting stands
/// for "either channel", which gives the singles terms.
pub trait JointProbability: Sync {
    fn probability(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64>;

    /// Standard error of [`JointProbability::probability`]; zero for exact predictors.
    fn standard_error(&self, _a: AnalyzerSetting, _b: AnalyzerSetting) -> Result<f64> {
        Ok(0.0)
    }

    /// True when `P(a,b)` depends on `a − b` only, so one angle can be fixed.
    fn is_rotationally_covariant(&self) -> bool {
        false
    }

    fn inputs(&self) -> BellInputs {
        BellInputs::default()
    }
}

/// Model parameters attached to a result, where they apply.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BellInputs {
    pub v: Option<f64>,
    pub eta: Option<f64>,
    pub r: Option<f64>,
}

/// `(a, a', b, b')`, each reduced to `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleQuadruple {
    pub a: f64,
    pub a2: f64,
    pub b: f64,
    pub b2: f64,
}

fn reduce(t: f64) -> f64 {
    let r = t.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

impl AngleQuadruple {
    pub fn new(a: f64, a2: f64, b: f64, b2: f64) -> Self {
        AngleQuadruple { a: reduce(a), a2: reduce(a2), b: reduce(b), b2: reduce(b2) }
    }

    pub fn degrees(a: f64, a2: f64, b: f64, b2: f64) -> Self {
        Self::new(a.to_radians(), a2.to_radians(), b.to_radians(), b2.to_radians())
    }

    fn to_array(self) -> [f64; 4] {
        [self.a, self.a2, self.b, self.b2]
    }

    fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

/// The six probabilities entering `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChTerms {
    pub ab: f64,
    pub ab2: f64,
    pub a2b2: f64,
    pub a2b: f64,
    pub a2_inf: f64,
    pub inf_b: f64,
}

impl ChTerms {
    pub fn s(&self) -> f64 {
        self.ab - self.ab2 + self.a2b2 + self.a2b - self.a2_inf - self.inf_b
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.ab, self.ab2, self.a2b2, self.a2b, self.a2_inf, self.inf_b]
    }

    pub const NAMES: [&'static str; 6] = ["P(a,b)", "P(a,b')", "P(a',b')", "P(a',b)", "P(a',inf)", "P(inf,b)"];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellResult {
    pub s: f64,
    pub quadruple: AngleQuadruple,
    pub inputs: BellInputs,
    pub terms: ChTerms,
    /// Quadrature sum of the term errors; zero for exact predictors.
    pub standard_error: f64,
}

fn term_settings(q: &AngleQuadruple) -> [(AnalyzerSetting, AnalyzerSetting); 6] {
    let s = AnalyzerSetting::Angle;
    let inf = AnalyzerSetting::Removed;
    [(s(q.a), s(q.b)), (s(q.a), s(q.b2)), (s(q.a2), s(q.b2)), (s(q.a2), s(q.b)), (s(q.a2), inf), (inf, s(q.b))]
}

/// Evaluates `S` at one quadruple.
pub fn ch_statistic<P: JointProbability + ?Sized>(p: &P, q: AngleQuadruple) -> Result<BellResult> {
    let settings = term_settings(&q);
    let mut values = [0.0; 6];
    let mut var = 0.0;
    for (v, (a, b)) in values.iter_mut().zip(settings) {
        *v = p.probability(a, b)?;
        var += p.standard_error(a, b)?.powi(2);
    }
    let terms = ChTerms {
        ab: values[0],
        ab2: values[1],
        a2b2: values[2],
        a2b: values[3],
        a2_inf: values[4],
        inf_b: values[5],
    };
    Ok(BellResult { s: terms.s(), quadruple: q, inputs: p.inputs(), terms, standard_error: var.sqrt() })
}

/// Grid search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Requested grid spacing in radians; the grid uses `round(π/step)` points on `[0, π)`.
    pub grid_step: f64,
    pub refine: bool,
}

impl SearchOptions {
    pub const REFINE_TOLERANCE: f64 = 1e-6;

    pub fn degrees(step: f64, refine: bool) -> Self {
        SearchOptions { grid_step: step.to_radians(), refine }
    }
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self::degrees(0.5, true)
    }
}

/// Maximizes `S` over the grid, first maximum in `(a, a', b, b')` order,
/// then polishes by coordinate search with step halving.
///
/// For fixed `(a, a')` the `b` and `b'` terms separate, so each row costs
/// two linear scans. Rotationally covariant predictors fix `a = 0`.
pub fn optimize_angles<P: JointProbability + ?Sized>(p: &P, opts: SearchOptions) -> Result<BellResult> {
    if !(opts.grid_step.is_finite() && opts.grid_step > 0.0) {
        return Err(Error::invalid(format!("grid step {} must be positive", opts.grid_step)));
    }
    let n = ((PI / opts.grid_step).round() as usize).max(1);
    let theta = |i: usize| i as f64 * PI / n as f64;
    let angle = |i: usize| AnalyzerSetting::Angle(theta(i));

    let joint: Vec<Result<Vec<f64>>> =
        par::map_indexed(n, |i| (0..n).map(|j| p.probability(angle(i), angle(j))).collect());
    let joint = joint.into_iter().collect::<Result<Vec<_>>>()?;
    let single_a = (0..n).map(|i| p.probability(angle(i), AnalyzerSetting::Removed)).collect::<Result<Vec<_>>>()?;
    let single_b = (0..n).map(|j| p.probability(AnalyzerSetting::Removed, angle(j))).collect::<Result<Vec<_>>>()?;

    let rows = if p.is_rotationally_covariant() { 1 } else { n };
    let best_in_row = |idx: usize| {
        let (i, k) = (idx / n, idx % n);
        let (ji, jk) = (&joint[i], &joint[k]);
        let (mut jb, mut sb) = (0, f64::NEG_INFINITY);
        let (mut jb2, mut sb2) = (0, f64::NEG_INFINITY);
        for j in 0..n {
            let t = ji[j] + jk[j] - single_b[j];
            if t > sb {
                (jb, sb) = (j, t);
            }
            let t2 = jk[j] - ji[j];
            if t2 > sb2 {
                (jb2, sb2) = (j, t2);
            }
        }
        (sb + sb2 - single_a[k], [i, k, jb, jb2])
    };
    let candidates = par::map_indexed(rows * n, best_in_row);
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if c.0 > best.0 {
            best = *c;
        }
    }
    let [i, k, jb, jb2] = best.1;
    let mut q = AngleQuadruple::new(theta(i), theta(k), theta(jb), theta(jb2));
    if opts.refine {
        q = refine(p, q, PI / n as f64 / 2.0)?;
    }
    ch_statistic(p, q)
}

fn refine<P: JointProbability + ?Sized>(p: &P, start: AngleQuadruple, step: f64) -> Result<AngleQuadruple> {
    const MAX_MOVES: usize = 100_000;
    let free: &[usize] = if p.is_rotationally_covariant() { &[1, 2, 3] } else { &[0, 1, 2, 3] };
    let mut x = start.to_array();
    let mut s = ch_statistic(p, start)?.s;
    let mut step = step;
    let mut moves = 0;
    while step >= SearchOptions::REFINE_TOLERANCE && moves < MAX_MOVES {
        let mut improved = false;
        for &c in free {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[c] += dir * step;
                let t = ch_statistic(p, AngleQuadruple::from_array(y))?.s;
                if t > s {
                    (x, s, improved) = (y, t, true);
                    moves += 1;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(AngleQuadruple::from_array(x))
}

/// How a finite visibility enters the prime-pair coincidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityConvention {
    /// `P(a,b) = ¼(1 − v cos 2Δ)`: the interference fringe loses contrast.
    Fringe,
    /// `P(a,b) = ½(1 − v cos²Δ)`: only the interfering cross term is damped,
    /// as in the four-photon probability with both preselection polarizers removed.
    CrossTerm,
}

impl VisibilityConvention {
    pub fn label(self) -> &'static str {
        match self {
            VisibilityConvention::Fringe => "fringe",
            VisibilityConvention::CrossTerm => "cross_term",
        }
    }
}

/// Prime-pair singlet with visibility `v`; singles are ½.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityPredictor {
    pub v: f64,
    pub convention: VisibilityConvention,
}

impl VisibilityPredictor {
    pub fn ideal() -> Self {
        VisibilityPredictor { v: 1.0, convention: VisibilityConvention::Fringe }
    }
}

impl JointProbability for VisibilityPredictor {
    fn probability(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
        Ok(match (a, b) {
            (AnalyzerSetting::Angle(a), AnalyzerSetting::Angle(b)) => {
                let d = a - b;
                match self.convention {
                    VisibilityConvention::Fringe => 0.25 * (1.0 - self.v * (2.0 * d).cos()),
                    VisibilityConvention::CrossTerm => 0.5 * (1.0 - self.v * d.cos().powi(2)),
                }
            }
            (AnalyzerSetting::Removed, AnalyzerSetting::Removed) => 1.0,
            _ => 0.5,
        })
    }

    fn is_rotationally_covariant(&self) -> bool {
        true
    }

    fn inputs(&self) -> BellInputs {
        BellInputs { v: Some(self.v), ..BellInputs::default() }
    }
}

/// Joint detections scale as `η²`, singles as `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyScaled<P> {
    pub inner: P,
    pub eta: f64,
}

impl<P: JointProbability> JointProbability for EfficiencyScaled<P> {
    fn probability(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
        let detectors = i32::from(!a.is_removed()) + i32::from(!b.is_removed());
        Ok(self.eta.powi(detectors) * self.inner.probability(a, b)?)
    }

    fn is_rotationally_covariant(&self) -> bool {
        self.inner.is_rotationally_covariant()
    }

    fn inputs(&self) -> BellInputs {
        BellInputs { eta: Some(self.eta), ..self.inner.inputs() }
    }
}

/// Unequal superposition `(|x⟩|y⟩ + r|y⟩|x⟩)/√(1+r²)` read out on D1' and
/// D2'⊥, with the cross term damped by `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EberhardPredictor {
    pub r: f64,
    pub v: f64,
}

impl EberhardPredictor {
    fn single(&self, t: f64) -> f64 {
        (t.cos().powi(2) + self.r * self.r * t.sin().powi(2)) / (1.0 + self.r * self.r)
    }
}

impl JointProbability for EberhardPredictor {
    fn probability(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
        let r = self.r;
        Ok(match (a, b) {
            (AnalyzerSetting::Angle(a), AnalyzerSetting::Angle(b)) => {
                let (ca, sa, cb, sb) = (a.cos(), a.sin(), b.cos(), b.sin());
                let direct = (ca * cb).powi(2) + (r * sa * sb).powi(2);
                (direct + 2.0 * self.v * r * ca * cb * sa * sb) / (1.0 + r * r)
            }
            (AnalyzerSetting::Angle(t), AnalyzerSetting::Removed) | (AnalyzerSetting::Removed, AnalyzerSetting::Angle(t)) => {
                self.single(t)
            }
            (AnalyzerSetting::Removed, AnalyzerSetting::Removed) => 1.0,
        })
    }

    fn is_rotationally_covariant(&self) -> bool {
        self.r == 1.0
    }

    fn inputs(&self) -> BellInputs {
        BellInputs { v: Some(self.v), r: Some(self.r), ..BellInputs::default() }
    }
}

/// Local model `P(a,b) = p(a)·q(b)` with `p(t) = c + d·cos²(t − λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductPredictor {
    pub first: (f64, f64, f64),
    pub second: (f64, f64, f64),
}

impl ProductPredictor {
    fn side((c, d, lambda): (f64, f64, f64), s: AnalyzerSetting) -> f64 {
        match s {
            AnalyzerSetting::Angle(t) => c + d * (t - lambda).cos().powi(2),
            AnalyzerSetting::Removed => 1.0,
        }
    }
}

impl JointProbability for ProductPredictor {
    fn probability(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
        Ok(Self::side(self.first, a) * Self::side(self.second, b))
    }
}

/// Frequencies from Monte Carlo runs. `P(a,b)` is the accepted frequency of
/// D1'∧D2' with the prime polarizers at `(a, b)`; a removed side counts
/// either channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloPredictor {
    pub base: ExperimentConfig,
}

impl MonteCarloPredictor {
    fn run(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<(f64, f64)> {
        let mut cfg = self.base.clone();
        cfg.prime = (a, b);
        cfg.seed = self.derived_seed(a, b);
        let tally = Simulator::new(&cfg)?.run()?;
        Ok((tally.frequency(PrimePattern::Both)?, tally.standard_error(PrimePattern::Both)?))
    }

    /// Each setting pair gets its own key so the six runs are independent.
    fn derived_seed(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> u64 {
        let code = |s: AnalyzerSetting| s.radians().map_or(u64::MAX, f64::to_bits);
        let mut rng = ChaCha8Rng::seed_from_u64(self.base.seed);
        rng.set_stream(code(a) ^ code(b).rotate_left(32));
        rng.next_u64()
    }
}

impl JointProbability for MonteCarloPredictor {
    fn probability(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
        Ok(self.run(a, b)?.0)
    }

    fn standard_error(&self, a: AnalyzerSetting, b: AnalyzerSetting) -> Result<f64> {
        Ok(self.run(a, b)?.1)
    }

    fn inputs(&self) -> BellInputs {
        BellInputs { eta: Some(self.base.detectors[0].efficiency), ..BellInputs::default() }
    }
}

/// Runs the six Monte Carlo settings once and returns `S` with its error.
pub fn ch_statistic_monte_carlo(p: &MonteCarloPredictor, q: AngleQuadruple) -> Result<BellResult> {
    let settings = term_settings(&q);
    let mut values = [0.0; 6];
    let mut var = 0.0;
    for (v, (a, b)) in values.iter_mut().zip(settings) {
        let (f, se) = p.run(a, b)?;
        *v = f;
        var += se * se;
    }
    let terms = ChTerms {
        ab: values[0],
        ab2: values[1],
        a2b2: values[2],
        a2b: values[3],
        a2_inf: values[4],
        inf_b: values[5],
    };
    Ok(BellResult { s: terms.s(), quadruple: q, inputs: p.inputs(), terms, standard_error: var.sqrt() })
}

fn check_visibility(v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("visibility {v} must lie in (0, 1]")))
    }
}

/// Closed-form threshold `η > 2/(1 + v√2)` for the fringe convention.
pub fn efficiency_threshold_fringe(v: f64) -> Result<f64> {
    check_visibility(v)?;
    Ok(2.0 / (1.0 + v * SQRT_2))
}

/// Closed-form threshold `η > 2/(2 + v(√2 − 1))` for the cross-term convention.
pub fn efficiency_threshold_cross_term(v: f64) -> Result<f64> {
    check_visibility(v)?;
    Ok(2.0 / (2.0 + v * (SQRT_2 - 1.0)))
}

/// Smallest `η` for which the optimized `S` of `make(η)` is positive,
/// bisected to 1e-6. `None` when even `η = 1` gives no violation.
pub fn efficiency_threshold<P, F>(make: F, opts: SearchOptions) -> Result<Option<f64>>
where
    P: JointProbability,
    F: Fn(f64) -> P,
{
    const TOLERANCE: f64 = 1e-6;
    if optimize_angles(&make(1.0), opts)?.s <= 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if optimize_angles(&make(mid), opts)?.s > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Efficiency threshold of the visibility predictor.
pub fn efficiency_threshold_model(v: f64, convention: VisibilityConvention, opts: SearchOptions) -> Result<Option<f64>> {
    check_visibility(v)?;
    efficiency_threshold(|eta| EfficiencyScaled { inner: VisibilityPredictor { v, convention }, eta }, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub v: f64,
    pub convention: VisibilityConvention,
    pub closed_form: f64,
    pub eta_min: Option<f64>,
}

pub fn threshold_scan(visibilities: &[f64], opts: SearchOptions) -> Result<Vec<ThresholdRow>> {
    let mut rows = Vec::new();
    for &v in visibilities {
        for convention in [VisibilityConvention::Fringe, VisibilityConvention::CrossTerm] {
            let closed_form = match convention {
                VisibilityConvention::Fringe => efficiency_threshold_fringe(v)?,
                VisibilityConvention::CrossTerm => efficiency_threshold_cross_term(v)?,
            };
            rows.push(ThresholdRow { v, convention, closed_form, eta_min: efficiency_threshold_model(v, convention, opts)? });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EberhardRow {
    pub r: f64,
    /// `T_x = t_x² = 1/(1 + r²)` of the lossless polarizing splitter.
    pub transmittance_x: f64,
    /// Optimized `S` at `η = 1`.
    pub s_max: f64,
    pub eta_min: Option<f64>,
}

pub fn eberhard_scan(r_values: &[f64], v: f64, opts: SearchOptions) -> Result<Vec<EberhardRow>> {
    check_visibility(v)?;
    r_values
        .iter()
        .map(|&r| {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::invalid(format!("ratio r = {r} must be non-negative")));
            }
            let predictor = EberhardPredictor { r, v };
            Ok(EberhardRow {
                r,
                transmittance_x: 1.0 / (1.0 + r * r),
                s_max: optimize_angles(&predictor, opts)?.s,
                eta_min: efficiency_threshold(|eta| EfficiencyScaled { inner: predictor, eta }, opts)?,
            })
        })
        .collect()
}
