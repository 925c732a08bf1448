//! Primitive optical elements acting on [`PureState`]s.
//!
//! Linear elements (hologram, Dove prism, mirror flip, beamsplitter, arm
//! phase) act mode by mode. The dual-rail CNOT and the `x factor` scale block
//! are idealized basis relabelings. Detection primitives live at the bottom.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{check_ell, BasisState, Mode, PathId, PureState};

/// Default threshold for [`assert_vacuum`].
pub const VACUUM_TOL: f64 = 1e-10;

/// A rotation angle. Rational multiples of pi are kept exact so that phases
/// `e^{i ell alpha}` at multiples of `pi/2` come out without rounding.
///
/// JSON forms: `{"pi_over": k}`, `{"pi": [num, den]}`, `{"radians": x}` or a
/// bare number of radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AngleRepr", into = "AngleRepr")]
pub enum Angle {
    /// `pi * num / den`, `den > 0`.
    PiRational { num: i64, den: i64 },
    Radians(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum AngleRepr {
    PiOver { pi_over: i64 },
    Pi { pi: [i64; 2] },
    Radians { radians: f64 },
    Bare(f64),
}

impl TryFrom<AngleRepr> for Angle {
    type Error = SimError;

    fn try_from(r: AngleRepr) -> Result<Self> {
        let a = match r {
            AngleRepr::PiOver { pi_over: 0 } => {
                return Err(SimError::InvalidParameter("pi_over must be non-zero".into()))
            }
            AngleRepr::PiOver { pi_over } => Angle::pi_over(pi_over),
            AngleRepr::Pi { pi: [num, den] } => Angle::PiRational { num, den },
            AngleRepr::Radians { radians } | AngleRepr::Bare(radians) => Angle::Radians(radians),
        };
        a.validate()?;
        Ok(a)
    }
}

impl From<Angle> for AngleRepr {
    fn from(a: Angle) -> Self {
        match a {
            Angle::PiRational { num: 1, den } => AngleRepr::PiOver { pi_over: den },
            Angle::PiRational { num, den } => AngleRepr::Pi { pi: [num, den] },
            Angle::Radians(radians) => AngleRepr::Radians { radians },
        }
    }
}

impl Angle {
    /// `pi / k`.
    pub fn pi_over(k: i64) -> Self {
        if k < 0 {
            Angle::PiRational { num: -1, den: -k }
        } else {
            Angle::PiRational { num: 1, den: k }
        }
    }

    pub fn neg(self) -> Self {
        match self {
            Angle::PiRational { num, den } => Angle::PiRational { num: -num, den },
            Angle::Radians(r) => Angle::Radians(-r),
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            Angle::PiRational { num, den } => PI * num as f64 / den as f64,
            Angle::Radians(r) => r,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            Angle::PiRational { den, .. } if den <= 0 => Err(SimError::InvalidParameter(
                format!("angle denominator must be positive, got {den}"),
            )),
            Angle::Radians(r) if !r.is_finite() => {
                Err(SimError::InvalidParameter("angle must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// `e^{i * times * alpha}`.
    pub fn phase(self, times: i64) -> C64 {
        match self {
            Angle::PiRational { num, den } => {
                let den = den as i128;
                let t = (times as i128 * num as i128).rem_euclid(2 * den);
                if (2 * t) % den == 0 {
                    match (2 * t) / den {
                        0 => C64::new(1.0, 0.0),
                        1 => C64::new(0.0, 1.0),
                        2 => C64::new(-1.0, 0.0),
                        _ => C64::new(0.0, -1.0),
                    }
                } else {
                    C64::from_polar(1.0, PI * t as f64 / den as f64)
                }
            }
            Angle::Radians(r) => C64::from_polar(1.0, r * times as f64),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::PiRational { num, den } => write!(f, "{num}pi/{den}"),
            Angle::Radians(r) => write!(f, "{r}rad"),
        }
    }
}

/// One primitive transform.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Hologram { path: PathId, delta_ell: i64 },
    DovePrism { path: PathId, alpha: Angle },
    OamFlip { path: PathId },
    Beamsplitter { path_up: PathId, path_down: PathId },
    ArmPhase { path: PathId, alpha: Angle },
    DualRailCnot { control: PathId, target_a: PathId, target_b: PathId },
    OamScale { path: PathId, factor: i64 },
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Hologram { .. } => ElementKind::Hologram,
            Element::DovePrism { .. } => ElementKind::Dove,
            Element::OamFlip { .. } => ElementKind::Flip,
            Element::Beamsplitter { .. } => ElementKind::Beamsplitter,
            Element::ArmPhase { .. } => ElementKind::ArmPhase,
            Element::DualRailCnot { .. } => ElementKind::Cnot,
            Element::OamScale { .. } => ElementKind::Scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Element::Beamsplitter { path_up, path_down } if path_up == path_down => {
                Err(SimError::InvalidParameter(format!("beamsplitter ports coincide ({path_up})")))
            }
            Element::DualRailCnot { control, target_a, target_b }
                if control == target_a || control == target_b || target_a == target_b =>
            {
                Err(SimError::InvalidParameter(format!(
                    "cnot paths must be pairwise distinct ({control}, {target_a}, {target_b})"
                )))
            }
            Element::OamScale { factor, .. } if factor < 1 => {
                Err(SimError::InvalidParameter(format!("scale factor must be >= 1, got {factor}")))
            }
            Element::DovePrism { alpha, .. } | Element::ArmPhase { alpha, .. } => alpha.validate(),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.validate()?;
        match *self {
            Element::Hologram { path, delta_ell } => apply_hologram(state, path, delta_ell),
            Element::DovePrism { path, alpha } => Ok(apply_dove(state, path, alpha)),
            Element::OamFlip { path } => Ok(apply_oam_flip(state, path)),
            Element::Beamsplitter { path_up, path_down } => {
                apply_beamsplitter(state, path_up, path_down)
            }
            Element::ArmPhase { path, alpha } => Ok(apply_arm_phase(state, path, alpha)),
            Element::DualRailCnot { control, target_a, target_b } => {
                apply_dual_rail_cnot(state, control, target_a, target_b)
            }
            Element::OamScale { path, factor } => apply_oam_scale(state, path, factor),
        }
    }

    /// Applies the element and records it in `tally`.
    pub fn apply_tallied(&self, state: &PureState, tally: &mut GateTally) -> Result<PureState> {
        let out = self.apply(state)?;
        tally.record(self.kind());
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Hologram,
    Dove,
    Flip,
    Beamsplitter,
    ArmPhase,
    Cnot,
    Scale,
    AssertVacuum,
    Qnd,
    ClassicalSwitch,
}

/// Counters of applied elements, per run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateTally {
    pub holograms: u64,
    pub doves: u64,
    pub flips: u64,
    pub beamsplitters: u64,
    pub arm_phases: u64,
    pub cnots: u64,
    pub scales: u64,
    pub vacuum_checks: u64,
    pub qnd_measurements: u64,
    pub classical_switches: u64,
    /// Complete sorting interferometers (each also counts two beamsplitters
    /// and one arm phase).
    pub interferometers: u64,
    /// Counts of user-labelled elements.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, u64>,
}

impl GateTally {
    pub fn record(&mut self, kind: ElementKind) {
        let slot = match kind {
            ElementKind::Hologram => &mut self.holograms,
            ElementKind::Dove => &mut self.doves,
            ElementKind::Flip => &mut self.flips,
            ElementKind::Beamsplitter => &mut self.beamsplitters,
            ElementKind::ArmPhase => &mut self.arm_phases,
            ElementKind::Cnot => &mut self.cnots,
            ElementKind::Scale => &mut self.scales,
            ElementKind::AssertVacuum => &mut self.vacuum_checks,
            ElementKind::Qnd => &mut self.qnd_measurements,
            ElementKind::ClassicalSwitch => &mut self.classical_switches,
        };
        *slot += 1;
    }

    pub fn record_label(&mut self, label: &str) {
        *self.labels.entry(label.to_string()).or_default() += 1;
    }

    pub fn cnot_count(&self) -> u64 {
        self.cnots
    }

    pub fn hologram_count(&self) -> u64 {
        self.holograms
    }

    pub fn interferometer_count(&self) -> u64 {
        self.interferometers
    }

    pub fn merge(&mut self, other: &GateTally) {
        self.holograms += other.holograms;
        self.doves += other.doves;
        self.flips += other.flips;
        self.beamsplitters += other.beamsplitters;
        self.arm_phases += other.arm_phases;
        self.cnots += other.cnots;
        self.scales += other.scales;
        self.vacuum_checks += other.vacuum_checks;
        self.qnd_measurements += other.qnd_measurements;
        self.classical_switches += other.classical_switches;
        self.interferometers += other.interferometers;
        for (k, v) in &other.labels {
            *self.labels.entry(k.clone()).or_default() += v;
        }
    }
}

/// Maps every basis element through a mode relabeling plus a per-term phase.
/// The relabeling must be injective on the support of `state`.
fn relabel<F>(state: &PureState, mut f: F) -> Result<PureState>
where
    F: FnMut(&BasisState) -> Result<(BasisState, C64)>,
{
    let mut out = BTreeMap::new();
    for (b, a) in state.terms() {
        let (nb, phase) = f(b)?;
        *out.entry(nb).or_insert(C64::new(0.0, 0.0)) += a * phase;
    }
    Ok(PureState::from_map(out, state.photon_number()))
}

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `|ell> -> |ell + delta_ell>` on every photon of `path`.
pub fn apply_hologram(state: &PureState, path: PathId, delta_ell: i64) -> Result<PureState> {
    if delta_ell == 0 {
        return Ok(state.clone());
    }
    relabel(state, |b| {
        for (m, _) in b.on_path(path) {
            check_ell(m.ell.checked_add(delta_ell).unwrap_or(i64::MAX))?;
        }
        let nb = b.map_modes(|m| if m.path == path { Mode { ell: m.ell + delta_ell, ..m } } else { m });
        Ok((nb, ONE))
    })
}

/// `|ell> -> e^{i ell alpha} |-ell>` per photon on `path`.
pub fn apply_dove(state: &PureState, path: PathId, alpha: Angle) -> PureState {
    relabel(state, |b| {
        let phase = b.on_path(path).map(|(m, c)| alpha.phase(m.ell * c as i64)).product();
        let nb = b.map_modes(|m| if m.path == path { Mode { ell: -m.ell, ..m } } else { m });
        Ok((nb, phase))
    })
    .expect("dove relabeling cannot fail")
}

/// Mirror reflection: `ell -> -ell` on `path`, no phase.
pub fn apply_oam_flip(state: &PureState, path: PathId) -> PureState {
    relabel(state, |b| {
        Ok((b.map_modes(|m| if m.path == path { Mode { ell: -m.ell, ..m } } else { m }), ONE))
    })
    .expect("flip relabeling cannot fail")
}

/// Phase `e^{i ell alpha}` per photon on `path`, modes unchanged.
pub fn apply_arm_phase(state: &PureState, path: PathId, alpha: Angle) -> PureState {
    relabel(state, |b| {
        let phase = b.on_path(path).map(|(m, c)| alpha.phase(m.ell * c as i64)).product();
        Ok((b.clone(), phase))
    })
    .expect("phase map cannot fail")
}

/// Swaps `target_a` and `target_b` in every term whose `control` path holds a photon.
pub fn apply_dual_rail_cnot(
    state: &PureState,
    control: PathId,
    target_a: PathId,
    target_b: PathId,
) -> Result<PureState> {
    Element::DualRailCnot { control, target_a, target_b }.validate()?;
    relabel(state, |b| {
        if b.count_on_path(control) == 0 {
            return Ok((b.clone(), ONE));
        }
        Ok((swap_in_basis(b, target_a, target_b), ONE))
    })
}

fn swap_in_basis(b: &BasisState, p: PathId, q: PathId) -> BasisState {
    b.map_modes(|m| match m.path {
        x if x == p => Mode { path: q, ..m },
        x if x == q => Mode { path: p, ..m },
        _ => m,
    })
}

/// Classically controlled path exchange (the switch replacing a CNOT in the
/// QND sorter).
pub fn apply_path_swap(state: &PureState, a: PathId, b: PathId) -> PureState {
    relabel(state, |basis| Ok((swap_in_basis(basis, a, b), ONE))).expect("swap cannot fail")
}

/// `|ell> -> |factor * ell>` on `path`.
pub fn apply_oam_scale(state: &PureState, path: PathId, factor: i64) -> Result<PureState> {
    Element::OamScale { path, factor }.validate()?;
    if factor == 1 {
        return Ok(state.clone());
    }
    relabel(state, |b| {
        for (m, _) in b.on_path(path) {
            check_ell(m.ell.checked_mul(factor).unwrap_or(i64::MAX))?;
        }
        let nb = b.map_modes(|m| if m.path == path { Mode { ell: m.ell * factor, ..m } } else { m });
        Ok((nb, ONE))
    })
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Output occupations `(n_up', n_down', amplitude)` of `|n_up, n_down>` in a
/// single `ell` under `a_u -> (a_u + a_d)/sqrt2`, `a_d -> (a_u - a_d)/sqrt2`.
fn beamsplitter_fan_out(n_up: u32, n_down: u32) -> Vec<(u32, u32, f64)> {
    let total = n_up + n_down;
    let prefactor = 2f64.powf(-(total as f64) / 2.0) / (factorial(n_up) * factorial(n_down)).sqrt();
    (0..=total)
        .filter_map(|p| {
            let mut sum = 0.0;
            for k in 0..=n_up.min(p) {
                let m = p - k;
                if m > n_down {
                    continue;
                }
                let sign = if (n_down - m) % 2 == 0 { 1.0 } else { -1.0 };
                sum += sign * binomial(n_up, k) * binomial(n_down, m);
            }
            let amp = sum * prefactor * (factorial(p) * factorial(total - p)).sqrt();
            (amp != 0.0).then_some((p, total - p, amp))
        })
        .collect()
}

/// 50% beamsplitter with the real matrix `[[1, 1], [1, -1]] / sqrt2` on
/// `(path_up, path_down)`, applied independently per winding number with
/// bosonic multi-occupancy normalization.
pub fn apply_beamsplitter(state: &PureState, path_up: PathId, path_down: PathId) -> Result<PureState> {
    Element::Beamsplitter { path_up, path_down }.validate()?;
    let mut out: BTreeMap<BasisState, C64> = BTreeMap::new();
    for (b, a) in state.terms() {
        let mut spectators = Vec::new();
        let mut per_ell: BTreeMap<i64, (u32, u32)> = BTreeMap::new();
        for &(m, c) in b.occupations() {
            if m.path == path_up {
                per_ell.entry(m.ell).or_default().0 += c;
            } else if m.path == path_down {
                per_ell.entry(m.ell).or_default().1 += c;
            } else {
                spectators.push((m, c));
            }
        }
        let mut partial: Vec<(Vec<(Mode, u32)>, f64)> = vec![(spectators, 1.0)];
        for (&ell, &(nu, nd)) in &per_ell {
            let fan = beamsplitter_fan_out(nu, nd);
            let mut next = Vec::with_capacity(partial.len() * fan.len());
            for (occ, amp) in &partial {
                for &(pu, pd, f) in &fan {
                    let mut o = occ.clone();
                    o.push((Mode { path: path_up, ell }, pu));
                    o.push((Mode { path: path_down, ell }, pd));
                    next.push((o, amp * f));
                }
            }
            partial = next;
        }
        for (occ, f) in partial {
            *out.entry(BasisState::from_occupations(occ)).or_default() += a * f;
        }
    }
    Ok(PureState::from_map(out, state.photon_number()))
}

/// Photodetector check that `path` is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuumCheck {
    pub path: PathId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub probability: f64,
    pub tol: f64,
    pub passed: bool,
}

pub fn assert_vacuum(state: &PureState, path: PathId, tol: f64) -> VacuumCheck {
    let probability = state.marginal_path_probability(path);
    VacuumCheck { path, label: None, probability, tol, passed: probability <= tol }
}

/// Quantum non-demolition photon-presence measurement on `path`.
///
/// Returns the outcome bit (1 = at least one photon on `path`) and the state
/// projected onto that outcome. Superpositions inside the surviving subspace,
/// including OAM superpositions on `path`, are untouched.
pub fn qnd_measure_path<R: Rng + ?Sized>(
    state: &PureState,
    path: PathId,
    rng: &mut R,
) -> Result<(bool, PureState)> {
    let p_one = state.marginal_path_probability(path);
    let bit = if p_one <= 0.0 {
        false
    } else if p_one >= 1.0 {
        true
    } else {
        rng.gen::<f64>() < p_one
    };
    if (bit && p_one >= 1.0) || (!bit && p_one <= 0.0) {
        return Ok((bit, state.clone()));
    }
    let (collapsed, _) = state.project(|b| (b.count_on_path(path) > 0) == bit)?;
    Ok((bit, collapsed))
}

/// [`qnd_measure_path`] with a fresh ChaCha8 stream seeded from `seed`.
pub fn qnd_measure_path_seeded(state: &PureState, path: PathId, seed: u64) -> Result<(bool, PureState)> {
    qnd_measure_path(state, path, &mut ChaCha8Rng::seed_from_u64(seed))
}
