//! Sparse second-quantized states over `(path, ell)` modes.
//!
//! A [`PureState`] is a map from canonical Fock basis elements
//! ([`BasisState`]) to complex amplitudes. Every stored basis element carries
//! the same total photon number, and the map is kept normalized and pruned of
//! negligible amplitudes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SimError};

/// Tolerance on the 2-norm of every public state.
pub const NORM_TOL: f64 = 1e-9;
/// Amplitudes with modulus below this are dropped.
pub const AMP_PRUNE: f64 = 1e-14;
/// Default bound on `|ell|`; override with the `OAMSIM_LMAX` environment variable.
pub const DEFAULT_L_MAX: i64 = 4096;

/// The active bound on `|ell|`, read once from `OAMSIM_LMAX`.
pub fn l_max() -> i64 {
    static L_MAX: OnceLock<i64> = OnceLock::new();
    *L_MAX.get_or_init(|| {
        std::env::var("OAMSIM_LMAX")
            .ok()
            .and_then(|v| v.trim().parse::<i64>().ok())
            .filter(|&v| v >= 0)
            .unwrap_or(DEFAULT_L_MAX)
    })
}

pub fn check_ell(ell: i64) -> Result<i64> {
    let l_max = l_max();
    if ell.checked_abs().is_none_or(|a| a > l_max) {
        Err(SimError::EllOutOfRange { ell, l_max })
    } else {
        Ok(ell)
    }
}

/// Opaque spatial path label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathId(pub u32);

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A bosonic mode: a path together with an OAM winding number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    pub path: PathId,
    pub ell: i64,
}

impl Mode {
    pub fn new(path: PathId, ell: i64) -> Result<Self> {
        Ok(Mode { path, ell: check_ell(ell)? })
    }
}

/// One Fock basis element: occupied modes in canonical order with counts `>= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BasisState {
    occupations: Vec<(Mode, u32)>,
}

impl BasisState {
    pub fn vacuum() -> Self {
        BasisState::default()
    }

    /// Builds a basis element from `(mode, count)` pairs in any order,
    /// merging repeated modes and dropping zero counts.
    pub fn from_occupations<I: IntoIterator<Item = (Mode, u32)>>(iter: I) -> Self {
        let mut occupations: Vec<(Mode, u32)> =
            iter.into_iter().filter(|&(_, c)| c > 0).collect();
        occupations.sort_unstable_by_key(|&(m, _)| m);
        occupations.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 += next.1;
                true
            } else {
                false
            }
        });
        BasisState { occupations }
    }

    pub fn from_modes<I: IntoIterator<Item = Mode>>(modes: I) -> Self {
        Self::from_occupations(modes.into_iter().map(|m| (m, 1)))
    }

    pub fn single(mode: Mode) -> Self {
        BasisState { occupations: vec![(mode, 1)] }
    }

    pub fn occupations(&self) -> &[(Mode, u32)] {
        &self.occupations
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn photon_count(&self) -> u32 {
        self.occupations.iter().map(|&(_, c)| c).sum()
    }

    pub fn count(&self, mode: Mode) -> u32 {
        self.occupations
            .binary_search_by_key(&mode, |&(m, _)| m)
            .map(|i| self.occupations[i].1)
            .unwrap_or(0)
    }

    pub fn count_on_path(&self, path: PathId) -> u32 {
        self.on_path(path).map(|(_, c)| c).sum()
    }

    /// Occupied modes of one path, in increasing `ell`.
    pub fn on_path(&self, path: PathId) -> impl Iterator<Item = (Mode, u32)> + '_ {
        self.occupations.iter().copied().filter(move |(m, _)| m.path == path)
    }

    /// Relabels every mode through `f` and re-canonicalizes.
    pub fn map_modes<F: FnMut(Mode) -> Mode>(&self, mut f: F) -> Self {
        Self::from_occupations(self.occupations.iter().map(|&(m, c)| (f(m), c)))
    }

    /// Multiset union of two basis elements.
    pub fn union(&self, other: &BasisState) -> Self {
        Self::from_occupations(self.occupations.iter().chain(&other.occupations).copied())
    }

    /// Splits into the part living on `paths` and the remainder.
    pub fn partition(&self, paths: &BTreeSet<PathId>) -> (BasisState, BasisState) {
        let (inside, outside): (Vec<_>, Vec<_>) =
            self.occupations.iter().partition(|(m, _)| paths.contains(&m.path));
        (BasisState { occupations: inside }, BasisState { occupations: outside })
    }
}

impl fmt::Display for BasisState {
    /// Canonical text form: `path:ell:count` triples joined by `;`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (m, c)) in self.occupations.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{}:{}:{}", m.path, m.ell, c)?;
        }
        Ok(())
    }
}

impl FromStr for BasisState {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(BasisState::vacuum());
        }
        let bad = || SimError::ParseBasis(s.to_string());
        let mut occ = Vec::new();
        for triple in s.split(';') {
            let mut parts = triple.trim().split(':');
            let (Some(p), Some(l), Some(c), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(bad());
            };
            let path = PathId(p.parse().map_err(|_| bad())?);
            let ell: i64 = l.parse().map_err(|_| bad())?;
            let count: u32 = c.parse().map_err(|_| bad())?;
            if count == 0 {
                return Err(bad());
            }
            occ.push((Mode::new(path, ell)?, count));
        }
        Ok(BasisState::from_occupations(occ))
    }
}

/// A normalized superposition of Fock basis elements with a fixed photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    terms: BTreeMap<BasisState, C64>,
    photons: u32,
}

impl PureState {
    pub fn vacuum() -> Self {
        Self::basis(BasisState::vacuum())
    }

    pub fn basis(basis: BasisState) -> Self {
        let photons = basis.photon_count();
        PureState { terms: BTreeMap::from([(basis, C64::new(1.0, 0.0))]), photons }
    }

    pub fn single_photon(path: PathId, ell: i64) -> Result<Self> {
        Ok(Self::basis(BasisState::single(Mode::new(path, ell)?)))
    }

    /// Path dual-rail qubit: `alpha |path_zero, 0> + beta |path_one, 0>`.
    pub fn qubit(spec: &QubitSpec) -> Result<Self> {
        spec.validate()?;
        Self::from_terms([
            (BasisState::single(Mode { path: spec.path_zero, ell: 0 }), spec.alpha),
            (BasisState::single(Mode { path: spec.path_one, ell: 0 }), spec.beta),
        ])
    }

    /// Builds a state from explicit terms. Repeated basis elements are summed;
    /// the result must already be normalized within [`NORM_TOL`].
    pub fn from_terms<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisState, C64)>,
    {
        let state = Self::collect_unnormalized(terms)?;
        let norm_sqr = state.norm_sqr();
        if (norm_sqr.sqrt() - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized { norm_sqr });
        }
        Ok(state)
    }

    /// Builds a state from arbitrary terms and rescales it to unit norm.
    /// Returns the state and the norm before rescaling.
    pub fn normalized_from_terms<I>(terms: I) -> Result<(Self, f64)>
    where
        I: IntoIterator<Item = (BasisState, C64)>,
    {
        let mut state = Self::collect_unnormalized(terms)?;
        let norm = state.norm();
        if norm < AMP_PRUNE {
            return Err(SimError::ZeroNorm);
        }
        for amp in state.terms.values_mut() {
            *amp /= norm;
        }
        state.prune();
        Ok((state, norm))
    }

    fn collect_unnormalized<I>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisState, C64)>,
    {
        let mut map: BTreeMap<BasisState, C64> = BTreeMap::new();
        let mut photons = None;
        for (basis, amp) in terms {
            let n = basis.photon_count();
            match photons {
                None => photons = Some(n),
                Some(p) if p != n => return Err(SimError::MixedPhotonNumber),
                _ => {}
            }
            for &(m, _) in basis.occupations() {
                check_ell(m.ell)?;
            }
            *map.entry(basis).or_default() += amp;
        }
        let mut state = PureState { terms: map, photons: photons.unwrap_or(0) };
        state.prune();
        if state.terms.is_empty() {
            return Err(SimError::ZeroNorm);
        }
        Ok(state)
    }

    /// Assembles the image of a linear map. Callers guarantee photon-number
    /// conservation and unit norm.
    pub(crate) fn from_map(terms: BTreeMap<BasisState, C64>, photons: u32) -> Self {
        let mut state = PureState { terms, photons };
        state.prune();
        debug_assert!(state.terms.keys().all(|b| b.photon_count() == photons));
        state
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= AMP_PRUNE);
    }

    pub fn photon_number(&self) -> u32 {
        self.photons
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical basis order.
    pub fn terms(&self) -> impl Iterator<Item = (&BasisState, &C64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, basis: &BasisState) -> C64 {
        self.terms.get(basis).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Every path carrying a photon in at least one term.
    pub fn occupied_paths(&self) -> BTreeSet<PathId> {
        self.terms
            .keys()
            .flat_map(|b| b.occupations().iter().map(|(m, _)| m.path))
            .collect()
    }

    /// Every occupied mode of `path` across all terms.
    pub fn modes_on_path(&self, path: PathId) -> BTreeSet<Mode> {
        self.terms.keys().flat_map(|b| b.on_path(path).map(|(m, _)| m)).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.photons != other.photons {
            return Err(SimError::PhotonNumberMismatch {
                left: self.photons,
                right: other.photons,
            });
        }
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let sum: C64 = small
            .terms
            .iter()
            .filter_map(|(b, a)| large.terms.get(b).map(|c| a.conj() * c))
            .sum();
        Ok(if flip { sum.conj() } else { sum })
    }

    /// `|<a|b>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Largest modulus of amplitude difference over the union of supports.
    pub fn max_amplitude_deviation(&self, other: &PureState) -> f64 {
        let keys: BTreeSet<&BasisState> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter()
            .map(|b| (self.amplitude(b) - other.amplitude(b)).norm())
            .fold(0.0, f64::max)
    }

    /// Product state. Photons landing in the same mode add their occupation
    /// counts without a bosonic enhancement factor; if such collisions change
    /// the norm the product is rescaled.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut map: BTreeMap<BasisState, C64> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                *map.entry(a.union(b)).or_default() += x * y;
            }
        }
        let mut state = PureState::from_map(map, self.photons + other.photons);
        let norm = state.norm();
        if (norm - 1.0).abs() > f64::EPSILON * 8.0 && norm > AMP_PRUNE {
            for a in state.terms.values_mut() {
                *a /= norm;
            }
        }
        state
    }

    /// Probability of finding at least one photon on `path`.
    pub fn marginal_path_probability(&self, path: PathId) -> f64 {
        self.terms
            .iter()
            .filter(|(b, _)| b.count_on_path(path) > 0)
            .fold(0.0, |acc, (_, a)| acc + a.norm_sqr())
            .min(1.0)
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> PureState {
        let phase = C64::from_polar(1.0, theta);
        PureState {
            terms: self.terms.iter().map(|(b, a)| (b.clone(), a * phase)).collect(),
            photons: self.photons,
        }
    }

    /// Projects onto terms satisfying `keep` and renormalizes. Returns the
    /// projected state and the probability of the kept subspace.
    pub fn project<F: FnMut(&BasisState) -> bool>(&self, mut keep: F) -> Result<(PureState, f64)> {
        let kept: Vec<_> = self
            .terms
            .iter()
            .filter(|(b, _)| keep(b))
            .map(|(b, a)| (b.clone(), *a))
            .collect();
        let (state, norm) = Self::normalized_from_terms(kept)?;
        Ok((state, norm * norm))
    }

    /// Removes the photons living on `paths`, provided they sit in the same
    /// configuration in every term (so the state factorizes across the cut).
    pub fn trace_out_definite(&self, paths: &[PathId]) -> Result<PureState> {
        let paths: BTreeSet<PathId> = paths.iter().copied().collect();
        let mut fixed: Option<BasisState> = None;
        let mut rest = BTreeMap::new();
        for (b, a) in &self.terms {
            let (inside, outside) = b.partition(&paths);
            match &fixed {
                None => fixed = Some(inside),
                Some(f) if *f != inside => return Err(SimError::NotSeparable),
                _ => {}
            }
            rest.insert(outside, *a);
        }
        let removed = fixed.map(|f| f.photon_count()).unwrap_or(0);
        Ok(PureState::from_map(rest, self.photons - removed))
    }

    /// Canonical serialized entries, amplitudes with 17 significant digits.
    pub fn entries(&self) -> Vec<StateEntry> {
        self.terms
            .iter()
            .map(|(b, a)| StateEntry {
                basis: b.to_string(),
                re: format_amplitude(a.re),
                im: format_amplitude(a.im),
            })
            .collect()
    }

    pub fn from_entries(entries: &[StateEntry]) -> Result<Self> {
        let terms = entries
            .iter()
            .map(|e| {
                let b: BasisState = e.basis.parse()?;
                let re = e.re.parse::<f64>().map_err(|_| SimError::ParseBasis(e.re.clone()))?;
                let im = e.im.parse::<f64>().map_err(|_| SimError::ParseBasis(e.im.clone()))?;
                Ok((b, C64::new(re, im)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(terms)
    }
}

/// Decimal text with 17 significant digits, enough to round-trip an `f64`.
pub fn format_amplitude(x: f64) -> String {
    format!("{x:.16e}")
}

/// One serialized term of a [`PureState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEntry {
    pub basis: String,
    pub re: String,
    pub im: String,
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PureState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<StateEntry>::deserialize(deserializer)?;
        PureState::from_entries(&entries).map_err(D::Error::custom)
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (b, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|{}>", a.re, a.im, b)?;
        }
        Ok(())
    }
}

/// Amplitudes of a dual-rail qubit without its path assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    pub alpha: C64,
    pub beta: C64,
}

impl Qubit {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized { norm_sqr });
        }
        Ok(Qubit { alpha, beta })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(C64::new(alpha, 0.0), C64::new(beta, 0.0))
    }

    pub fn zero() -> Self {
        Qubit { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    pub fn one() -> Self {
        Qubit { alpha: C64::new(0.0, 0.0), beta: C64::new(1.0, 0.0) }
    }

    pub fn bit(b: bool) -> Self {
        if b {
            Self::one()
        } else {
            Self::zero()
        }
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Qubit { alpha: C64::new(h, 0.0), beta: C64::new(h, 0.0) }
    }

    pub fn on_paths(self, path_zero: PathId, path_one: PathId) -> QubitSpec {
        QubitSpec { alpha: self.alpha, beta: self.beta, path_zero, path_one }
    }
}

/// A dual-rail qubit with its two paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSpec {
    pub alpha: C64,
    pub beta: C64,
    pub path_zero: PathId,
    pub path_one: PathId,
}

impl QubitSpec {
    pub fn new(alpha: C64, beta: C64, path_zero: PathId, path_one: PathId) -> Result<Self> {
        let spec = QubitSpec { alpha, beta, path_zero, path_one };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        Qubit::new(self.alpha, self.beta)?;
        if self.path_zero == self.path_one {
            return Err(SimError::InvalidParameter(format!(
                "dual-rail qubit needs two distinct paths, got {} twice",
                self.path_zero
            )));
        }
        Ok(())
    }
}
