//! Single-photon OAM multiplexer and demultiplexer.
//!
//! The MUX writes qubit `i` into bit `i` of the carrier photon's winding
//! number, most significant channel first; the DEMUX extracts the bits again,
//! least significant first, into fresh ancilla photons.

use num_complex::Complex64 as C64;

use crate::elements::{Element, VacuumCheck, VACUUM_TOL};
use crate::error::{Result, SimError};
use crate::fock::{BasisState, Mode, PathId, PureState, Qubit};

use super::{
    carrier_amplitudes, converter, converter_inverse, factor_qubits, pow2, register_from_msb,
    sorting_interferometer, ChannelPlan, OrderCheck, Trace,
};

fn check_carrier(state: &PureState, plan: &ChannelPlan, multiple_of: i64, what: &str) -> Result<()> {
    let limit = pow2(plan.n())?;
    for path in [plan.carrier_up, plan.carrier_down] {
        for m in state.modes_on_path(path) {
            if m.ell.rem_euclid(multiple_of) != 0 || m.ell < 0 || m.ell >= limit {
                return Err(SimError::OrderViolation(format!(
                    "{what}: carrier holds ell = {} (expected multiples of {multiple_of} in [0, {limit}))",
                    m.ell
                )));
            }
        }
    }
    Ok(())
}

/// Adds qubit `i` of `plan` to the carrier as `+2^i` on its `|1>` branch and
/// leaves the qubit photon on its `|0>` rail.
pub fn mux_block(state: &PureState, plan: &ChannelPlan, i: usize, trace: &mut Trace) -> Result<PureState> {
    let (u, d) = plan.carrier();
    let (q0, q1) = plan.channel(i)?;
    if trace.strict() {
        check_carrier(state, plan, pow2(i + 1)?, &format!("mux block {i}"))?;
    }
    let shift = pow2(i)?;
    let s = trace.apply(state, Element::DualRailCnot { control: q1, target_a: u, target_b: d })?;
    let s = trace.apply(&s, Element::Hologram { path: d, delta_ell: shift })?;
    // Erase the qubit while the two carrier branches are still on separate paths.
    let s = trace.apply(&s, Element::DualRailCnot { control: d, target_a: q0, target_b: q1 })?;
    let s = sorting_interferometer(&s, u, d, shift, trace)?;
    trace.check_vacuum(&s, q1, format!("mux qubit {i} rail 1"));
    trace.check_vacuum(&s, d, format!("mux block {i} carrier lower port"));
    Ok(s)
}

/// Runs the MUX blocks of `plan` in `plan.order`.
///
/// The carrier starts on the upper carrier path. With `recycle_first`, the
/// first channel's qubit is expected as a path dual-rail qubit on the
/// carrier paths themselves and is converted in place into the carrier,
/// saving that block's two CNOTs.
pub fn mux_pipeline_state(state: &PureState, plan: &ChannelPlan, recycle_first: bool, trace: &mut Trace) -> Result<PureState> {
    plan.validate()?;
    if trace.strict() {
        plan.check_order(true, "mux")?;
    }
    let mut order = plan.order.iter().copied();
    let mut s = state.clone();
    if recycle_first {
        let first = order.next().ok_or_else(|| SimError::InvalidParameter("empty plan".into()))?;
        let (u, d) = plan.carrier();
        s = converter(&s, u, d, pow2(first)?, false, trace)?;
    }
    for i in order {
        s = mux_block(&s, plan, i, trace)?;
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct MuxOutput {
    pub state: PureState,
    pub plan: ChannelPlan,
    pub trace: Trace,
    pub recycle_first: bool,
}

impl MuxOutput {
    /// The carrier photon alone, with the spent qubit photons removed.
    pub fn carrier(&self) -> Result<PureState> {
        let spent: Vec<PathId> = self.plan.qubit_paths.iter().flat_map(|&(a, b)| [a, b]).collect();
        self.state.trace_out_definite(&spent)
    }

    /// Carrier amplitudes for `ell = 0..2^n`.
    pub fn carrier_amplitudes(&self) -> Result<Vec<C64>> {
        carrier_amplitudes(&self.state, self.plan.carrier_up, 1 << self.plan.n())
    }
}

/// Multiplexes `qubits` (most significant channel first) into one photon
/// using [`ChannelPlan::standard`].
pub fn mux_pipeline(qubits: &[Qubit], recycle_first: bool, order: OrderCheck) -> Result<MuxOutput> {
    mux_pipeline_with_plan(qubits, ChannelPlan::standard(qubits.len()), recycle_first, order)
}

pub fn mux_pipeline_with_plan(
    qubits: &[Qubit],
    plan: ChannelPlan,
    recycle_first: bool,
    order: OrderCheck,
) -> Result<MuxOutput> {
    let n = qubits.len();
    if n == 0 || n != plan.n() {
        return Err(SimError::InvalidParameter(format!(
            "mux needs n >= 1 qubits matching the plan, got {n} for {}",
            plan.n()
        )));
    }
    let input = if recycle_first {
        // the channel processed first rides on the carrier paths
        let first = *plan.order.first().ok_or_else(|| SimError::InvalidParameter("empty plan".into()))?;
        let by_channel: Vec<Qubit> = qubits.iter().rev().copied().collect();
        let mut s = PureState::qubit(&by_channel[first].on_paths(plan.carrier_up, plan.carrier_down))?;
        for (i, q) in by_channel.iter().enumerate().filter(|&(i, _)| i != first) {
            let (p0, p1) = plan.qubit_paths[i];
            s = s.tensor(&PureState::qubit(&q.on_paths(p0, p1))?);
        }
        s
    } else {
        let carrier = PureState::single_photon(plan.carrier_up, 0)?;
        carrier.tensor(&register_from_msb(qubits, &plan.qubit_paths)?)
    };
    let mut trace = Trace::new(order);
    let state = mux_pipeline_state(&input, &plan, recycle_first, &mut trace)?;
    Ok(MuxOutput { state, plan, trace, recycle_first })
}

/// Moves bit `i` of the carrier into a fresh ancilla photon that must wait
/// at `ell = 0` on the `|0>` rail of channel `i`.
pub fn demux_block(state: &PureState, plan: &ChannelPlan, i: usize, trace: &mut Trace) -> Result<PureState> {
    let (u, d) = plan.carrier();
    let (q0, q1) = plan.channel(i)?;
    let ancilla = Mode { path: q0, ell: 0 };
    if state.terms().any(|(b, _)| b.count(ancilla) != 1 || b.count_on_path(q1) != 0) {
        return Err(SimError::InvalidParameter(format!(
            "demux block {i} needs a fresh ell = 0 photon on path {q0}"
        )));
    }
    let shift = pow2(i)?;
    if trace.strict() {
        check_carrier(state, plan, shift, &format!("demux block {i}"))?;
    }
    let s = sorting_interferometer(state, u, d, shift, trace)?;
    let s = trace.apply(&s, Element::DualRailCnot { control: d, target_a: q0, target_b: q1 })?;
    let s = trace.apply(&s, Element::Hologram { path: d, delta_ell: -shift })?;
    let s = trace.apply(&s, Element::DualRailCnot { control: q1, target_a: u, target_b: d })?;
    trace.check_vacuum(&s, d, format!("demux block {i} carrier lower port"));
    Ok(s)
}

/// Runs the DEMUX blocks of `plan` in `plan.order`, adding each ancilla
/// photon just before its block.
///
/// Without recycling, the carrier must end in `|0>` on the upper carrier
/// path, which is recorded as a check. With `recycle_last`, the final
/// channel is converted back to a path qubit on the carrier paths by the
/// inverse converter instead of a CNOT pair.
pub fn demux_pipeline_state(state: &PureState, plan: &ChannelPlan, recycle_last: bool, trace: &mut Trace) -> Result<PureState> {
    plan.validate()?;
    if trace.strict() {
        plan.check_order(false, "demux")?;
    }
    let (u, d) = plan.carrier();
    let mut order: Vec<usize> = plan.order.clone();
    let last = if recycle_last {
        Some(order.pop().ok_or_else(|| SimError::InvalidParameter("empty plan".into()))?)
    } else {
        None
    };
    let mut s = state.clone();
    for i in order {
        let ancilla = PureState::single_photon(plan.channel(i)?.0, 0)?;
        s = demux_block(&s.tensor(&ancilla), plan, i, trace)?;
    }
    match last {
        Some(i) => {
            if trace.strict() {
                check_carrier(&s, plan, pow2(i)?, &format!("demux final channel {i}"))?;
            }
            s = converter_inverse(&s, u, d, pow2(i)?, false, trace)?;
        }
        None => {
            let zero = BasisState::single(Mode { path: u, ell: 0 });
            let on_zero: f64 = s
                .terms()
                .filter(|(b, _)| b.on_path(u).eq(zero.occupations().iter().copied())
                    && b.count_on_path(d) == 0)
                .map(|(_, a)| a.norm_sqr())
                .sum();
            let probability = (1.0 - on_zero).max(0.0);
            trace.tally.vacuum_checks += 1;
            trace.vacuum_checks.push(VacuumCheck {
                path: u,
                label: Some("terminal carrier away from |0>".into()),
                probability,
                tol: VACUUM_TOL,
                passed: probability <= VACUUM_TOL,
            });
        }
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct DemuxOutput {
    pub state: PureState,
    pub plan: ChannelPlan,
    pub trace: Trace,
    pub recycle_last: bool,
}

impl DemuxOutput {
    /// Path pair holding each recovered qubit, least significant first.
    pub fn register_pairs(&self) -> Vec<(PathId, PathId)> {
        let mut pairs = self.plan.qubit_paths.clone();
        if self.recycle_last {
            if let Some(&last) = self.plan.order.last() {
                pairs[last] = self.plan.carrier();
            }
        }
        pairs
    }

    /// The recovered qubits with the spent carrier photon removed.
    pub fn register(&self) -> Result<PureState> {
        if self.recycle_last {
            Ok(self.state.clone())
        } else {
            self.state.trace_out_definite(&[self.plan.carrier_up, self.plan.carrier_down])
        }
    }

    /// Per-channel qubit amplitudes, least significant first; only defined
    /// when the register is a product state.
    pub fn qubits(&self) -> Result<Vec<Qubit>> {
        factor_qubits(&self.register()?, &self.register_pairs())
    }
}

/// Demultiplexes a single-photon carrier on the standard carrier path into
/// `n` qubits.
pub fn demux_pipeline(carrier: &PureState, n: usize, recycle_last: bool, order: OrderCheck) -> Result<DemuxOutput> {
    demux_pipeline_with_plan(carrier, ChannelPlan::standard(n).ascending(), recycle_last, order)
}

pub fn demux_pipeline_with_plan(
    carrier: &PureState,
    plan: ChannelPlan,
    recycle_last: bool,
    order: OrderCheck,
) -> Result<DemuxOutput> {
    if recycle_last && plan.n() == 0 {
        return Err(SimError::InvalidParameter("recycling needs n >= 1".into()));
    }
    let mut trace = Trace::new(order);
    let state = demux_pipeline_state(carrier, &plan, recycle_last, &mut trace)?;
    Ok(DemuxOutput { state, plan, trace, recycle_last })
}
