//! Composite circuits built from [`crate::elements`] primitives.
//!
//! Every block takes the state by reference, returns the new state and
//! records what it applied in a caller-owned [`Trace`].

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::elements::{assert_vacuum, Element, GateTally, VacuumCheck, VACUUM_TOL};
use crate::error::{Result, SimError};
use crate::fock::{BasisState, Mode, PathId, PureState, Qubit};

mod arithmetic;
mod combiner;
mod interferometer;
mod mux;
mod sorter;

pub use arithmetic::{
    adder_block, adder_pipeline, multiplier_pipeline, multiply_block, operand_bits, ArithmeticOutput,
};
pub use combiner::{
    combiner_pipeline, combiner_pipeline_state, combiner_pipeline_with_plan, combiner_split, converter, converter_inverse,
    merger, CombinerOutput,
};
pub use interferometer::{sorting_interferometer, sorting_interferometer_inverse};
pub use mux::{
    demux_block, demux_pipeline, demux_pipeline_state, demux_pipeline_with_plan, mux_block,
    mux_pipeline, mux_pipeline_state, mux_pipeline_with_plan, DemuxOutput, MuxOutput,
};
pub use sorter::{sorter_coherent, sorter_qnd, QndSorterOutput, SorterOutput};

/// Whether blocks validate their ordering preconditions.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderCheck {
    #[default]
    Strict,
    /// Skip ordering validation so that misordered circuits can be run and
    /// their corrupted output inspected.
    Permissive,
}

/// Per-run record of applied elements and detector checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub tally: GateTally,
    pub vacuum_checks: Vec<VacuumCheck>,
    pub order: OrderCheck,
}

impl Trace {
    pub fn new(order: OrderCheck) -> Self {
        Trace { order, ..Default::default() }
    }

    pub fn strict(&self) -> bool {
        self.order == OrderCheck::Strict
    }

    pub(crate) fn apply(&mut self, state: &PureState, element: Element) -> Result<PureState> {
        element.apply_tallied(state, &mut self.tally)
    }

    pub(crate) fn check_vacuum(&mut self, state: &PureState, path: PathId, label: impl Into<String>) {
        let mut check = assert_vacuum(state, path, VACUUM_TOL);
        check.label = Some(label.into());
        self.tally.vacuum_checks += 1;
        self.vacuum_checks.push(check);
    }

    pub fn vacuum_checks_pass(&self) -> bool {
        self.vacuum_checks.iter().all(|c| c.passed)
    }

    pub fn max_vacuum_probability(&self) -> f64 {
        self.vacuum_checks.iter().map(|c| c.probability).fold(0.0, f64::max)
    }
}

/// Hands out fresh path labels.
#[derive(Debug, Clone, Default)]
pub struct PathAllocator {
    next: u32,
}

impl PathAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self) -> PathId {
        let p = PathId(self.next);
        self.next += 1;
        p
    }

    pub fn fresh_pair(&mut self) -> (PathId, PathId) {
        (self.fresh(), self.fresh())
    }

    pub fn fresh_pairs(&mut self, n: usize) -> Vec<(PathId, PathId)> {
        (0..n).map(|_| self.fresh_pair()).collect()
    }
}

/// Path assignment and processing order for an n-channel MUX or DEMUX.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelPlan {
    pub carrier_up: PathId,
    pub carrier_down: PathId,
    /// `(logical 0 rail, logical 1 rail)` of channel `i`, at index `i`.
    pub qubit_paths: Vec<(PathId, PathId)>,
    /// Channel indices in the order the blocks are applied.
    pub order: Vec<usize>,
}

/// Carrier upper path of [`ChannelPlan::standard`] layouts.
pub const CARRIER_UP: PathId = PathId(0);
/// Carrier lower path of [`ChannelPlan::standard`] layouts.
pub const CARRIER_DOWN: PathId = PathId(1);

impl ChannelPlan {
    /// Carrier on paths 0 (upper) and 1 (lower); channel `i` on paths
    /// `2 + 2i` and `3 + 2i`. Processing order is MSB first.
    pub fn standard(n: usize) -> Self {
        let mut alloc = PathAllocator::new();
        Self::allocate(&mut alloc, n)
    }

    pub fn allocate(alloc: &mut PathAllocator, n: usize) -> Self {
        let (carrier_up, carrier_down) = alloc.fresh_pair();
        ChannelPlan {
            carrier_up,
            carrier_down,
            qubit_paths: alloc.fresh_pairs(n),
            order: (0..n).rev().collect(),
        }
    }

    pub fn with_carrier(carrier: (PathId, PathId), qubit_paths: Vec<(PathId, PathId)>) -> Self {
        let n = qubit_paths.len();
        ChannelPlan {
            carrier_up: carrier.0,
            carrier_down: carrier.1,
            qubit_paths,
            order: (0..n).rev().collect(),
        }
    }

    /// MSB-first order (multiplexing and merging).
    pub fn descending(mut self) -> Self {
        self.order = (0..self.n()).rev().collect();
        self
    }

    /// LSB-first order (demultiplexing).
    pub fn ascending(mut self) -> Self {
        self.order = (0..self.n()).collect();
        self
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Self {
        self.order = order;
        self
    }

    pub fn n(&self) -> usize {
        self.qubit_paths.len()
    }

    pub fn carrier(&self) -> (PathId, PathId) {
        (self.carrier_up, self.carrier_down)
    }

    pub fn channel(&self, i: usize) -> Result<(PathId, PathId)> {
        self.qubit_paths.get(i).copied().ok_or_else(|| {
            SimError::InvalidParameter(format!("channel {i} not in a {}-channel plan", self.n()))
        })
    }

    /// Distinct paths and an order that lists each known channel at most once.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let all = [self.carrier_up, self.carrier_down]
            .into_iter()
            .chain(self.qubit_paths.iter().flat_map(|&(a, b)| [a, b]));
        for p in all {
            if !seen.insert(p) {
                return Err(SimError::InvalidParameter(format!("path {p} used twice in plan")));
            }
        }
        let mut channels = BTreeSet::new();
        for &i in &self.order {
            if i >= self.n() || !channels.insert(i) {
                return Err(SimError::InvalidParameter(format!("bad channel {i} in plan order")));
            }
        }
        Ok(())
    }

    pub(crate) fn check_order(&self, descending: bool, what: &str) -> Result<()> {
        let ok = self
            .order
            .windows(2)
            .all(|w| if descending { w[0] > w[1] } else { w[0] < w[1] });
        if ok {
            Ok(())
        } else {
            let rule = if descending {
                "most significant channel first"
            } else {
                "least significant channel first"
            };
            Err(SimError::OrderViolation(format!(
                "{what} order {:?} breaks the {rule} rule",
                self.order
            )))
        }
    }
}

/// `sum_ell c_ell |ell>` as a single photon on [`CARRIER_UP`].
pub fn carrier_state(amplitudes: &[(i64, C64)]) -> Result<PureState> {
    let terms = amplitudes
        .iter()
        .map(|&(ell, a)| Ok((BasisState::single(Mode::new(CARRIER_UP, ell)?), a)))
        .collect::<Result<Vec<_>>>()?;
    PureState::from_terms(terms)
}

/// Product of dual-rail qubits: `qubits[k]` on `pairs[k]`, each at `ell = 0`.
pub fn qubit_product(qubits: &[Qubit], pairs: &[(PathId, PathId)]) -> Result<PureState> {
    if qubits.len() != pairs.len() {
        return Err(SimError::InvalidParameter(format!(
            "{} qubits for {} path pairs",
            qubits.len(),
            pairs.len()
        )));
    }
    qubits.iter().zip(pairs).try_fold(PureState::vacuum(), |acc, (q, &(p0, p1))| {
        Ok(acc.tensor(&PureState::qubit(&q.on_paths(p0, p1))?))
    })
}

/// Qubits listed most significant first, paired with channel `i`'s paths.
pub(crate) fn register_from_msb(qubits: &[Qubit], pairs_by_channel: &[(PathId, PathId)]) -> Result<PureState> {
    let lsb: Vec<Qubit> = qubits.iter().rev().copied().collect();
    qubit_product(&lsb, pairs_by_channel)
}

/// Probability of each integer value read from dual-rail registers.
/// `pairs[i]` holds bit `i`. Every term must put exactly one photon on each
/// pair.
pub fn register_distribution(state: &PureState, pairs: &[(PathId, PathId)]) -> Result<BTreeMap<u64, f64>> {
    let mut dist = BTreeMap::new();
    for (b, a) in state.terms() {
        let mut value = 0u64;
        for (i, &(p0, p1)) in pairs.iter().enumerate() {
            match (b.count_on_path(p0), b.count_on_path(p1)) {
                (1, 0) => {}
                (0, 1) => value |= 1 << i,
                (z, o) => {
                    return Err(SimError::InvalidParameter(format!(
                        "register bit {i} holds {z} + {o} photons on paths {p0}/{p1}"
                    )))
                }
            }
        }
        *dist.entry(value).or_insert(0.0) += a.norm_sqr();
    }
    Ok(dist)
}

/// Splits a product of dual-rail qubits back into its factors; `pairs[k]`
/// holds qubit `k`. Each qubit is fixed up to a global phase.
pub fn factor_qubits(state: &PureState, pairs: &[(PathId, PathId)]) -> Result<Vec<Qubit>> {
    let reference = state
        .terms()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(b, _)| b.clone())
        .ok_or(SimError::ZeroNorm)?;
    let mut qubits = Vec::with_capacity(pairs.len());
    for &(p0, p1) in pairs {
        let others: BTreeSet<PathId> =
            state.occupied_paths().into_iter().filter(|&p| p != p0 && p != p1).collect();
        let ref_others = reference.partition(&others).0;
        let (mut alpha, mut beta) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (b, a) in state.terms() {
            if b.partition(&others).0 != ref_others {
                continue;
            }
            match (b.count(Mode { path: p0, ell: 0 }), b.count(Mode { path: p1, ell: 0 })) {
                (1, 0) => alpha += a,
                (0, 1) => beta += a,
                _ => return Err(SimError::NotSeparable),
            }
        }
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        qubits.push(Qubit::new(alpha / norm, beta / norm)?);
    }
    let rebuilt = qubit_product(&qubits, pairs)?;
    if rebuilt.photon_number() != state.photon_number() || rebuilt.fidelity(state)? < 1.0 - 1e-9 {
        return Err(SimError::NotSeparable);
    }
    Ok(qubits)
}

/// Amplitudes of the single carrier photon on `path` at `ell = 0..len`.
/// Other photons must be in a definite configuration.
pub fn carrier_amplitudes(state: &PureState, path: PathId, len: usize) -> Result<Vec<C64>> {
    let others: Vec<PathId> = state.occupied_paths().into_iter().filter(|&p| p != path).collect();
    let carrier = state.trace_out_definite(&others)?;
    Ok((0..len as i64)
        .map(|ell| carrier.amplitude(&BasisState::single(Mode { path, ell })))
        .collect())
}

pub(crate) fn pow2(i: usize) -> Result<i64> {
    if i >= 62 {
        return Err(SimError::InvalidParameter(format!("channel index {i} too large")));
    }
    Ok(1i64 << i)
}

#[cfg(test)]
pub(crate) fn assert_close(a: &PureState, b: &PureState) {
    let dev = a.max_amplitude_deviation(b);
    assert!(dev < 1e-12, "states differ by {dev:e}:\n  {a}\n  {b}");
}
