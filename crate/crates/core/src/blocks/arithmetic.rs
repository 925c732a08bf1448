//! Arithmetic in the OAM domain: the first operand is multiplexed into a
//! carrier photon, blocks controlled by the second operand's qubits act on
//! the carrier, and a DEMUX reads the result back into qubits.

use std::collections::BTreeMap;

use crate::elements::Element;
use crate::error::{Result, SimError};
use crate::fock::{PathId, PureState, Qubit};

use super::{
    demux_pipeline_state, mux_pipeline_state, pow2, register_distribution, register_from_msb,
    ChannelPlan, OrderCheck, PathAllocator, Trace,
};

fn conditional_on_carrier(
    state: &PureState,
    m_pair: (PathId, PathId),
    u: PathId,
    d: PathId,
    inner: Element,
    trace: &mut Trace,
) -> Result<PureState> {
    let route = Element::DualRailCnot { control: m_pair.1, target_a: u, target_b: d };
    let s = trace.apply(state, route.clone())?;
    let s = trace.apply(&s, inner)?;
    trace.apply(&s, route)
}

/// Adds `2^j` to the carrier winding number when qubit `j` of the second
/// operand is `|1>`. The operand qubit is left untouched.
pub fn adder_block(
    state: &PureState,
    m_pair: (PathId, PathId),
    u: PathId,
    d: PathId,
    j: usize,
    trace: &mut Trace,
) -> Result<PureState> {
    conditional_on_carrier(state, m_pair, u, d, Element::Hologram { path: d, delta_ell: pow2(j)? }, trace)
}

/// Multiplies the carrier winding number by `2^j` when qubit `j` of the
/// second operand is `|1>`.
pub fn multiply_block(
    state: &PureState,
    m_pair: (PathId, PathId),
    u: PathId,
    d: PathId,
    j: usize,
    trace: &mut Trace,
) -> Result<PureState> {
    conditional_on_carrier(state, m_pair, u, d, Element::OamScale { path: d, factor: pow2(j)? }, trace)
}

#[derive(Debug, Clone)]
pub struct ArithmeticOutput {
    pub n: usize,
    /// Final state: spent first-operand photons, the untouched second
    /// operand, the result register and (unless recycled) the spent carrier.
    pub state: PureState,
    /// State right after the arithmetic blocks, before decoding.
    pub encoded: PureState,
    pub carrier: (PathId, PathId),
    pub first_operand_pairs: Vec<(PathId, PathId)>,
    pub second_operand_pairs: Vec<(PathId, PathId)>,
    /// Result qubit paths, least significant first.
    pub result_pairs: Vec<(PathId, PathId)>,
    pub trace: Trace,
}

impl ArithmeticOutput {
    /// Probability of each integer result.
    pub fn result_distribution(&self) -> Result<BTreeMap<u64, f64>> {
        register_distribution(&self.state, &self.result_pairs)
    }

    /// Second operand and result registers, with the spent first-operand
    /// photons and carrier removed.
    pub fn registers(&self) -> Result<PureState> {
        let keep: Vec<PathId> = self
            .second_operand_pairs
            .iter()
            .chain(&self.result_pairs)
            .flat_map(|&(a, b)| [a, b])
            .collect();
        let drop: Vec<PathId> =
            self.state.occupied_paths().into_iter().filter(|p| !keep.contains(p)).collect();
        self.state.trace_out_definite(&drop)
    }
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Multiply,
}

fn run(first: &[Qubit], second: &[Qubit], recycle: bool, order: OrderCheck, op: Op) -> Result<ArithmeticOutput> {
    let n = first.len();
    if n == 0 || second.len() != n {
        return Err(SimError::InvalidParameter(format!(
            "operands must both have n >= 1 qubits, got {} and {}",
            first.len(),
            second.len()
        )));
    }
    let result_bits = match op {
        Op::Add => n + 1,
        // largest literal composition: (2^n - 1) * 2^(0 + 1 + ... + n-1)
        Op::Multiply => n + n * (n - 1) / 2,
    };
    let mut alloc = PathAllocator::new();
    let (u, d) = alloc.fresh_pair();
    let n_pairs = alloc.fresh_pairs(n);
    let m_pairs = alloc.fresh_pairs(n);
    let r_pairs = alloc.fresh_pairs(result_bits);
    let mux_plan = ChannelPlan::with_carrier((u, d), n_pairs.clone());
    let demux_plan = ChannelPlan::with_carrier((u, d), r_pairs.clone()).ascending();

    let first_register = if recycle {
        PureState::qubit(&first[0].on_paths(u, d))?.tensor(&register_from_msb(&first[1..], &n_pairs[..n - 1])?)
    } else {
        PureState::single_photon(u, 0)?.tensor(&register_from_msb(first, &n_pairs)?)
    };
    let input = first_register.tensor(&register_from_msb(second, &m_pairs)?);

    let mut trace = Trace::new(order);
    let mut s = mux_pipeline_state(&input, &mux_plan, recycle, &mut trace)?;
    for (j, &pair) in m_pairs.iter().enumerate() {
        s = match op {
            Op::Add => adder_block(&s, pair, u, d, j, &mut trace)?,
            Op::Multiply => multiply_block(&s, pair, u, d, j, &mut trace)?,
        };
    }
    let encoded = s.clone();
    let state = demux_pipeline_state(&s, &demux_plan, recycle, &mut trace)?;
    let mut result_pairs = r_pairs;
    if recycle {
        result_pairs[result_bits - 1] = (u, d);
    }
    Ok(ArithmeticOutput {
        n,
        state,
        encoded,
        carrier: (u, d),
        first_operand_pairs: n_pairs,
        second_operand_pairs: m_pairs,
        result_pairs,
        trace,
    })
}

/// `N + M` for two `n`-qubit operands given most significant qubit first.
///
/// MUX of `N`, `n` adder blocks controlled by `M`, then a DEMUX with `n + 1`
/// blocks. With `recycle`, `N`'s most significant photon becomes the
/// carrier and the carrier itself becomes the top result qubit.
pub fn adder_pipeline(first: &[Qubit], second: &[Qubit], recycle: bool) -> Result<ArithmeticOutput> {
    run(first, second, recycle, OrderCheck::Strict, Op::Add)
}

/// Chains a conditional `x 2^j` block per qubit `j` of `M` after the MUX of
/// `N`. The result equals `N * M` only when `M` has at most one set bit;
/// in general it is `N * 2^(sum of set-bit positions of M)`.
pub fn multiplier_pipeline(first: &[Qubit], second: &[Qubit]) -> Result<ArithmeticOutput> {
    run(first, second, false, OrderCheck::Strict, Op::Multiply)
}

/// Basis-state operand of `n` qubits, most significant first.
pub fn operand_bits(value: u64, n: usize) -> Vec<Qubit> {
    (0..n).rev().map(|k| Qubit::bit((value >> k) & 1 == 1)).collect()
}
