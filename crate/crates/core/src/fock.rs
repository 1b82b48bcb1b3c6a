//! Exact few-photon Fock states over (port, polarization) modes.
//!
//! A [`FockState`] is a finite superposition of occupation vectors. Linear
//! optical elements act through a [`ModeMap`], which substitutes every input
//! creation operator by a complex combination of output creation operators;
//! the product is re-expanded with the bosonic factors `a†ⁿ|0⟩ = √n! |n⟩`.
//! Measurement is a Born-rule sum over occupation vectors, binned by the
//! detector each mode is routed to.
//!
//! Modes are kept sorted, and terms live in a `BTreeMap` keyed by occupation
//! vector, so iteration order is lexicographic and reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest photon number any state may carry.
pub const MAX_PHOTONS: usize = 8;

/// Terms whose amplitude magnitude falls below this are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Largest tolerated `|M M† − I|` (Frobenius) for a mode map.
pub const UNITARITY_TOLERANCE: f64 = 1e-9;

const SQRT_FACTORIAL: [f64; MAX_PHOTONS + 1] = [
    1.0,
    1.0,
    std::f64::consts::SQRT_2,
    2.449_489_742_783_178,
    4.898_979_485_566_356,
    10.954_451_150_103_322,
    26.832_815_729_997_478,
    70.992_957_397_195_4,
    200.798_406_368_590_95,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];
}

/// Spatial port label, e.g. `1`, `2`, `1'`, `2'`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Port(String);

impl Port {
    pub fn new(name: impl Into<String>) -> Self {
        Port(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Port {
    fn from(s: &str) -> Self {
        Port(s.to_owned())
    }
}

impl From<&Port> for Port {
    fn from(p: &Port) -> Self {
        p.clone()
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Transverse fringe label carried by photons that passed a fringe-phase
/// preparation. Detectors never resolve it.
pub type Tag = u8;

/// One optical mode: a spatial port, a polarization axis and a fringe tag.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub port: Port,
    pub axis: Axis,
    pub tag: Tag,
}

impl ModeId {
    pub fn new(port: impl Into<Port>, axis: Axis) -> Self {
        ModeId { port: port.into(), axis, tag: 0 }
    }

    pub fn tagged(port: impl Into<Port>, axis: Axis, tag: Tag) -> Self {
        ModeId { port: port.into(), axis, tag }
    }

    pub fn with_tag(&self, tag: Tag) -> Self {
        ModeId { port: self.port.clone(), axis: self.axis, tag }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let axis = match self.axis {
            Axis::X => "x",
            Axis::Y => "y",
        };
        if self.tag == 0 {
            write!(f, "{}{}", self.port, axis)
        } else {
            write!(f, "{}{}#{}", self.port, axis, self.tag)
        }
    }
}

pub type Occupation = Vec<u8>;

/// Linear map from input creation operators to combinations of output
/// creation operators. Modes that are not inputs pass through unchanged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeMap {
    rules: BTreeMap<ModeId, Vec<(ModeId, Complex64)>>,
}

impl ModeMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the image of `input`. Repeated outputs are summed and zero
    /// coefficients dropped.
    pub fn insert(&mut self, input: ModeId, outputs: impl IntoIterator<Item = (ModeId, Complex64)>) -> &mut Self {
        let mut merged: BTreeMap<ModeId, Complex64> = BTreeMap::new();
        for (m, c) in outputs {
            *merged.entry(m).or_default() += c;
        }
        let image = merged.into_iter().filter(|(_, c)| c.norm() >= PRUNE_THRESHOLD).collect();
        self.rules.insert(input, image);
        self
    }

    pub fn image(&self, input: &ModeId) -> Option<&[(ModeId, Complex64)]> {
        self.rules.get(input).map(Vec::as_slice)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &ModeId> {
        self.rules.keys()
    }

    pub fn outputs(&self) -> BTreeSet<ModeId> {
        self.rules.values().flatten().map(|(m, _)| m.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Frobenius norm of `M M† − I` over the map's inputs, i.e. how far the
    /// rows are from orthonormal.
    pub fn unitarity_deviation(&self) -> f64 {
        let rows: Vec<BTreeMap<&ModeId, Complex64>> = self
            .rules
            .values()
            .map(|img| img.iter().map(|(m, c)| (m, *c)).collect())
            .collect();
        let mut sum = 0.0;
        for (i, ri) in rows.iter().enumerate() {
            for (j, rj) in rows.iter().enumerate() {
                let mut dot = Complex64::new(0.0, 0.0);
                for (m, c) in ri {
                    if let Some(d) = rj.get(m) {
                        dot += c * d.conj();
                    }
                }
                if i == j {
                    dot -= 1.0;
                }
                sum += dot.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// The map "first `self`, then `next`".
    pub fn then(&self, next: &ModeMap) -> ModeMap {
        let mut out = ModeMap::new();
        for (input, image) in &self.rules {
            let mut composed = Vec::new();
            for (mid, c) in image {
                match next.rules.get(mid) {
                    Some(img2) => composed.extend(img2.iter().map(|(o, c2)| (o.clone(), c * c2))),
                    None => composed.push((mid.clone(), *c)),
                }
            }
            out.insert(input.clone(), composed);
        }
        let produced = self.outputs();
        for (input, image) in &next.rules {
            if !self.rules.contains_key(input) && !produced.contains(input) {
                out.insert(input.clone(), image.iter().cloned());
            }
        }
        out
    }

    /// True when every input maps to itself with unit coefficient (within `tol`).
    pub fn is_identity(&self, tol: f64) -> bool {
        self.rules.iter().all(|(input, image)| match image.as_slice() {
            [(m, c)] => m == input && (c - 1.0).norm() <= tol,
            _ => false,
        })
    }
}

/// Superposition of occupation vectors over an ordered set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: Vec<ModeId>,
    terms: BTreeMap<Occupation, Complex64>,
}

impl FockState {
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        FockState { modes: Vec::new(), terms }
    }

    /// Builds `Σ amp · Π a†_m |0⟩` from lists of creation operators. Not normalized.
    pub fn from_creations<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, Vec<ModeId>)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let modes: Vec<ModeId> = terms
            .iter()
            .flat_map(|(_, ops)| ops.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&ModeId, usize> = modes.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut occupations = Vec::with_capacity(terms.len());
        for (amp, ops) in &terms {
            if ops.len() > MAX_PHOTONS {
                return Err(Error::TooManyPhotons(ops.len()));
            }
            let mut occ = vec![0u8; modes.len()];
            for m in ops {
                occ[index[m]] += 1;
            }
            let bosonic: f64 = occ.iter().map(|&n| SQRT_FACTORIAL[n as usize]).product();
            occupations.push((occ, amp * bosonic));
        }
        Self::from_occupations(modes, occupations)
    }

    /// Builds a state from explicit occupation vectors over `modes`. Equal
    /// vectors add coherently. Not normalized.
    pub fn from_occupations<I>(modes: Vec<ModeId>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut order: Vec<usize> = (0..modes.len()).collect();
        order.sort_by(|&a, &b| modes[a].cmp(&modes[b]));
        for w in order.windows(2) {
            if modes[w[0]] == modes[w[1]] {
                return Err(Error::DuplicateMode(modes[w[0]].to_string()));
            }
        }
        let sorted_modes: Vec<ModeId> = order.iter().map(|&i| modes[i].clone()).collect();
        let mut acc: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != modes.len() {
                return Err(Error::invalid(format!(
                    "occupation vector has {} entries for {} modes",
                    occ.len(),
                    modes.len()
                )));
            }
            let total: usize = occ.iter().map(|&n| n as usize).sum();
            if total > MAX_PHOTONS {
                return Err(Error::TooManyPhotons(total));
            }
            let permuted: Occupation = order.iter().map(|&i| occ[i]).collect();
            *acc.entry(permuted).or_default() += amp;
        }
        Ok(FockState { modes: sorted_modes, terms: prune(acc) })
    }

    pub fn normalize(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if norm < PRUNE_THRESHOLD {
            return Err(Error::ZeroNorm);
        }
        for amp in self.terms.values_mut() {
            *amp /= norm;
        }
        Ok(self)
    }

    pub fn modes(&self) -> &[ModeId] {
        &self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// Common photon number of all terms, or `None` if they differ.
    pub fn photon_number(&self) -> Option<usize> {
        let mut totals = self.terms.keys().map(|occ| occ.iter().map(|&n| n as usize).sum::<usize>());
        let first = totals.next().unwrap_or(0);
        totals.all(|t| t == first).then_some(first)
    }

    /// Amplitude of the occupation given as (mode, count) pairs; unlisted modes are empty.
    pub fn amplitude(&self, occupied: &[(ModeId, u8)]) -> Complex64 {
        let mut occ = vec![0u8; self.modes.len()];
        for (m, n) in occupied {
            match self.modes.binary_search(m) {
                Ok(i) => occ[i] += n,
                Err(_) if *n == 0 => {}
                Err(_) => return Complex64::new(0.0, 0.0),
            }
        }
        self.terms.get(&occ).copied().unwrap_or_default()
    }

    /// `⟨self|other⟩`, matching modes by identity.
    pub fn inner(&self, other: &FockState) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (occ, a) in &self.terms {
            let pairs: Vec<(ModeId, u8)> =
                self.modes.iter().cloned().zip(occ.iter().copied()).filter(|(_, n)| *n > 0).collect();
            sum += a.conj() * other.amplitude(&pairs);
        }
        sum
    }

    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        for m in &other.modes {
            if self.modes.binary_search(m).is_ok() {
                return Err(Error::DuplicateMode(m.to_string()));
            }
        }
        let mut modes = self.modes.clone();
        modes.extend(other.modes.iter().cloned());
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (oa, aa) in &self.terms {
            for (ob, ab) in &other.terms {
                let mut occ = oa.clone();
                occ.extend_from_slice(ob);
                terms.push((occ, aa * ab));
            }
        }
        FockState::from_occupations(modes, terms)
    }

    /// Applies a linear-optical mode map. The map must be unitary on its
    /// inputs; norm is then preserved.
    pub fn apply(&self, map: &ModeMap) -> Result<FockState> {
        let deviation = map.unitarity_deviation();
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        let outputs = map.outputs();
        let untouched: Vec<&ModeId> = self.modes.iter().filter(|m| map.image(m).is_none()).collect();
        if let Some(m) = untouched.iter().find(|m| outputs.contains(**m)) {
            return Err(Error::ModeCollision(m.to_string()));
        }
        let new_modes: Vec<ModeId> =
            untouched.iter().map(|m| (*m).clone()).chain(outputs).collect::<BTreeSet<_>>().into_iter().collect();
        let position = |m: &ModeId| new_modes.binary_search(m).expect("output mode registered");

        // Per input mode: list of (new index, coefficient).
        let images: Vec<Vec<(usize, Complex64)>> = self
            .modes
            .iter()
            .map(|m| match map.image(m) {
                Some(img) => img.iter().map(|(o, c)| (position(o), *c)).collect(),
                None => vec![(position(m), Complex64::new(1.0, 0.0))],
            })
            .collect();

        let mut acc: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        let mut photons = Vec::with_capacity(MAX_PHOTONS);
        let mut counts = vec![0u8; new_modes.len()];
        for (occ, amp) in &self.terms {
            photons.clear();
            let mut denom = 1.0;
            for (k, &n) in occ.iter().enumerate() {
                denom *= SQRT_FACTORIAL[n as usize];
                photons.extend(std::iter::repeat_n(k, n as usize));
            }
            expand(&photons, &images, *amp / denom, &mut counts, &mut acc);
        }
        Ok(FockState { modes: new_modes, terms: prune(acc) })
    }
}

fn expand(
    photons: &[usize],
    images: &[Vec<(usize, Complex64)>],
    coeff: Complex64,
    counts: &mut Occupation,
    acc: &mut BTreeMap<Occupation, Complex64>,
) {
    match photons.split_first() {
        None => {
            let bosonic: f64 = counts.iter().map(|&n| SQRT_FACTORIAL[n as usize]).product();
            *acc.entry(counts.clone()).or_default() += coeff * bosonic;
        }
        Some((&first, rest)) => {
            for &(out, c) in &images[first] {
                counts[out] += 1;
                expand(rest, images, coeff * c, counts, acc);
                counts[out] -= 1;
            }
        }
    }
}

fn prune(terms: BTreeMap<Occupation, Complex64>) -> BTreeMap<Occupation, Complex64> {
    terms.into_iter().filter(|(_, a)| a.norm() >= PRUNE_THRESHOLD).collect()
}

/// Detector label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Detector(String);

impl Detector {
    pub fn new(name: impl Into<String>) -> Self {
        Detector(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Detector {
    fn from(s: &str) -> Self {
        Detector(s.to_owned())
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Routing of (port, axis) pairs to detectors. Fringe tags are not resolved.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DetectorLayout {
    routes: BTreeMap<(Port, Axis), Detector>,
}

impl DetectorLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, port: impl Into<Port>, axis: Axis, detector: impl Into<Detector>) -> &mut Self {
        self.routes.insert((port.into(), axis), detector.into());
        self
    }

    /// Routes both polarization axes of `port` to one detector.
    pub fn assign_port(&mut self, port: impl Into<Port>, detector: impl Into<Detector>) -> &mut Self {
        let port = port.into();
        let detector = detector.into();
        for axis in Axis::BOTH {
            self.routes.insert((port.clone(), axis), detector.clone());
        }
        self
    }

    pub fn detector_for(&self, mode: &ModeId) -> Option<&Detector> {
        self.routes.get(&(mode.port.clone(), mode.axis))
    }
}

/// Photon counts delivered to each detector in one outcome (zero counts omitted).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DetectionPattern {
    counts: BTreeMap<Detector, u8>,
}

impl DetectionPattern {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pattern with one photon at each listed detector.
    pub fn singles<I, D>(detectors: I) -> Self
    where
        I: IntoIterator<Item = D>,
        D: Into<Detector>,
    {
        let mut p = DetectionPattern::new();
        for d in detectors {
            p.add(d.into(), 1);
        }
        p
    }

    pub fn add(&mut self, detector: Detector, n: u8) {
        if n > 0 {
            *self.counts.entry(detector).or_default() += n;
        }
    }

    pub fn count(&self, detector: &Detector) -> u8 {
        self.counts.get(detector).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().map(|&n| n as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Detector, u8)> {
        self.counts.iter().map(|(d, n)| (d, *n))
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (d, n) in &self.counts {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            if *n == 1 {
                write!(f, "{d}")?;
            } else {
                write!(f, "{n}{d}")?;
            }
        }
        if first {
            f.write_str("none")?;
        }
        Ok(())
    }
}

/// Outcome probabilities of measuring every mode of `state` with the given
/// detector routing. Distinct occupation vectors add incoherently.
pub fn detection_distribution(
    state: &FockState,
    layout: &DetectorLayout,
) -> Result<BTreeMap<DetectionPattern, f64>> {
    let routes: Vec<&Detector> = state
        .modes
        .iter()
        .map(|m| layout.detector_for(m).ok_or_else(|| Error::UnassignedMode(m.to_string())))
        .collect::<Result<_>>()?;
    let mut dist = BTreeMap::new();
    for (occ, amp) in &state.terms {
        let mut pattern = DetectionPattern::new();
        for (k, &n) in occ.iter().enumerate() {
            pattern.add(routes[k].clone(), n);
        }
        *dist.entry(pattern).or_insert(0.0) += amp.norm_sqr();
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn balanced(a: &str, b: &str) -> ModeMap {
        let i = Complex64::new(0.0, FRAC_1_SQRT_2);
        let t = c(FRAC_1_SQRT_2);
        let mut map = ModeMap::new();
        for axis in Axis::BOTH {
            map.insert(ModeId::new(a, axis), [(ModeId::new(a, axis), t), (ModeId::new(b, axis), i)]);
            map.insert(ModeId::new(b, axis), [(ModeId::new(b, axis), t), (ModeId::new(a, axis), i)]);
        }
        map
    }

    #[test]
    fn creation_applies_bosonic_factor() {
        let m = ModeId::new("1", Axis::X);
        let s = FockState::from_creations([(c(1.0), vec![m.clone(), m.clone()])]).unwrap();
        assert!((s.amplitude(&[(m, 2)]) - c(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn hong_ou_mandel_null() {
        let s = FockState::from_creations([(c(1.0), vec![ModeId::new("1", Axis::X), ModeId::new("2", Axis::X)])])
            .unwrap();
        let out = s.apply(&balanced("1", "2")).unwrap();
        assert!(out.amplitude(&[(ModeId::new("1", Axis::X), 1), (ModeId::new("2", Axis::X), 1)]).norm() < 1e-15);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn orthogonal_photons_split_half_the_time() {
        let s = FockState::from_creations([(c(1.0), vec![ModeId::new("1", Axis::X), ModeId::new("2", Axis::Y)])])
            .unwrap();
        let out = s.apply(&balanced("1", "2")).unwrap();
        let mut layout = DetectorLayout::new();
        layout.assign_port("1", "D1").assign_port("2", "D2");
        let dist = detection_distribution(&out, &layout).unwrap();
        let opposite = dist[&DetectionPattern::singles(["D1", "D2"])];
        assert!((opposite - 0.5).abs() < 1e-12);
        assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_map_leaves_state_unchanged() {
        let a = ModeId::new("1", Axis::X);
        let b = ModeId::new("1", Axis::Y);
        let s = FockState::from_creations([(c(0.6), vec![a.clone()]), (Complex64::new(0.0, 0.8), vec![b.clone()])])
            .unwrap();
        let mut id = ModeMap::new();
        id.insert(a.clone(), [(a, c(1.0))]).insert(b.clone(), [(b, c(1.0))]);
        assert_eq!(s.apply(&id).unwrap(), s);
    }

    #[test]
    fn non_unitary_map_is_rejected() {
        let a = ModeId::new("1", Axis::X);
        let mut map = ModeMap::new();
        map.insert(a.clone(), [(a.clone(), c(0.5))]);
        let s = FockState::from_creations([(c(1.0), vec![a])]).unwrap();
        match s.apply(&map) {
            Err(Error::NonUnitary { deviation }) => assert!((deviation - 0.75).abs() < 1e-12),
            other => panic!("expected NonUnitary, got {other:?}"),
        }
    }

    #[test]
    fn output_collision_is_rejected() {
        let a = ModeId::new("1", Axis::X);
        let b = ModeId::new("2", Axis::X);
        let s = FockState::from_creations([(c(1.0), vec![a.clone(), b.clone()])]).unwrap();
        let mut map = ModeMap::new();
        map.insert(a, [(b, c(1.0))]);
        assert!(matches!(s.apply(&map), Err(Error::ModeCollision(_))));
    }

    #[test]
    fn tensor_rejects_shared_modes() {
        let a = ModeId::new("1", Axis::X);
        let s = FockState::from_creations([(c(1.0), vec![a.clone()])]).unwrap();
        assert_eq!(s.tensor(&s), Err(Error::DuplicateMode("1x".into())));
    }

    #[test]
    fn tensor_with_vacuum_is_identity() {
        let s = FockState::from_creations([(c(1.0), vec![ModeId::new("1", Axis::Y)])]).unwrap();
        assert_eq!(FockState::vacuum().tensor(&s).unwrap(), s);
    }

    #[test]
    fn photon_limit_enforced() {
        let ops = vec![ModeId::new("1", Axis::X); MAX_PHOTONS + 1];
        assert_eq!(FockState::from_creations([(c(1.0), ops)]), Err(Error::TooManyPhotons(9)));
    }

    #[test]
    fn unassigned_mode_is_named() {
        let s = FockState::from_creations([(c(1.0), vec![ModeId::new("7", Axis::X)])]).unwrap();
        assert_eq!(detection_distribution(&s, &DetectorLayout::new()), Err(Error::UnassignedMode("7x".into())));
    }

    #[test]
    fn single_detector_layout_collects_everything() {
        let s = FockState::from_creations([
            (c(0.6), vec![ModeId::new("1", Axis::X), ModeId::new("2", Axis::Y)]),
            (c(0.8), vec![ModeId::new("1", Axis::Y), ModeId::new("2", Axis::X)]),
        ])
        .unwrap();
        let mut layout = DetectorLayout::new();
        layout.assign_port("1", "D").assign_port("2", "D");
        let dist = detection_distribution(&s, &layout).unwrap();
        assert_eq!(dist.len(), 1);
        let mut all = DetectionPattern::new();
        all.add("D".into(), 2);
        assert!((dist[&all] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn composition_with_inverse_is_identity() {
        let map = balanced("1", "2");
        let mut inverse = ModeMap::new();
        let i = Complex64::new(0.0, -FRAC_1_SQRT_2);
        let t = c(FRAC_1_SQRT_2);
        for axis in Axis::BOTH {
            inverse.insert(ModeId::new("1", axis), [(ModeId::new("1", axis), t), (ModeId::new("2", axis), i)]);
            inverse.insert(ModeId::new("2", axis), [(ModeId::new("2", axis), t), (ModeId::new("1", axis), i)]);
        }
        assert!(map.then(&inverse).is_identity(1e-12));
    }
}
