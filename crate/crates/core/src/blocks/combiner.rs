//! Qubit combiner: path dual-rail qubits are converted to OAM dual-rail
//! qubits in the bands `±2^i` and merged into one path.

use crate::elements::Element;
use crate::error::{Result, SimError};
use crate::fock::{PathId, PureState, Qubit, NORM_TOL};

use super::{
    pow2, register_from_msb, sorting_interferometer, sorting_interferometer_inverse, ChannelPlan,
    OrderCheck, Trace,
};

fn check_power_of_two(delta: i64, symmetric: bool) -> Result<()> {
    if delta < 1 || delta & (delta - 1) != 0 || (symmetric && delta < 2) {
        return Err(SimError::InvalidParameter(format!(
            "converter shift must be a power of two{}, got {delta}",
            if symmetric { " >= 2" } else { "" }
        )));
    }
    Ok(())
}

/// Probability that the pair `(q0, q1)` does not hold exactly one photon at `ell = 0`.
fn off_rail_probability(state: &PureState, q0: PathId, q1: PathId) -> f64 {
    state
        .terms()
        .filter(|(b, _)| {
            let on: Vec<_> = b.on_path(q0).chain(b.on_path(q1)).collect();
            !(on.len() == 1 && on[0].1 == 1 && on[0].0.ell == 0)
        })
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Path dual-rail to OAM conversion.
///
/// Shifts the `|1>` rail by `+delta` and recombines both rails in a sorting
/// interferometer with `K = delta`, leaving `alpha |0> + beta |delta>` on
/// `q0`. With `symmetric`, a final `-delta/2` hologram gives
/// `alpha |-delta/2> + beta |delta/2>`; channel `i` uses `delta = 2^(i+1)`.
pub fn converter(
    state: &PureState,
    q0: PathId,
    q1: PathId,
    delta: i64,
    symmetric: bool,
    trace: &mut Trace,
) -> Result<PureState> {
    check_power_of_two(delta, symmetric)?;
    let off_rail = off_rail_probability(state, q0, q1);
    if off_rail > NORM_TOL {
        return Err(SimError::InputNotDualRail { q0, q1, off_rail });
    }
    let s = trace.apply(state, Element::Hologram { path: q1, delta_ell: delta })?;
    let s = sorting_interferometer(&s, q0, q1, delta, trace)?;
    trace.check_vacuum(&s, q1, format!("converter {q1}"));
    if symmetric {
        trace.apply(&s, Element::Hologram { path: q0, delta_ell: -delta / 2 })
    } else {
        Ok(s)
    }
}

/// Inverse of [`converter`]: an OAM qubit on `q0` back to path dual-rail on `(q0, q1)`.
pub fn converter_inverse(
    state: &PureState,
    q0: PathId,
    q1: PathId,
    delta: i64,
    symmetric: bool,
    trace: &mut Trace,
) -> Result<PureState> {
    check_power_of_two(delta, symmetric)?;
    let s = if symmetric {
        trace.apply(state, Element::Hologram { path: q0, delta_ell: delta / 2 })?
    } else {
        state.clone()
    };
    let s = sorting_interferometer_inverse(&s, q0, q1, delta, trace)?;
    trace.apply(&s, Element::Hologram { path: q1, delta_ell: -delta })
}

fn is_signed_power_of_two(ell: i64) -> Option<u32> {
    let a = ell.unsigned_abs();
    (a != 0 && a & (a - 1) == 0).then(|| a.trailing_zeros())
}

/// Merges the OAM qubit of band `±2^j` arriving on `down` into `up`, which
/// may only carry qubits of higher bands.
pub fn merger(state: &PureState, up: PathId, down: PathId, j: usize, trace: &mut Trace) -> Result<PureState> {
    let band = pow2(j)?;
    if trace.strict() {
        for m in state.modes_on_path(down) {
            if m.ell.abs() != band {
                return Err(SimError::OrderViolation(format!(
                    "merger lower input holds ell = {} but expects ±{band}",
                    m.ell
                )));
            }
        }
        for m in state.modes_on_path(up) {
            match is_signed_power_of_two(m.ell) {
                Some(k) if k as usize > j => {}
                _ => {
                    return Err(SimError::OrderViolation(format!(
                        "merger upper input holds ell = {} but only bands above ±{band} may be merged first",
                        m.ell
                    )))
                }
            }
        }
    }
    let s = sorting_interferometer(state, up, down, band, trace)?;
    trace.check_vacuum(&s, down, format!("merger {down}"));
    Ok(s)
}

/// Converts every channel of `plan` and merges them into the `logical 0`
/// rail of the first channel in `plan.order`. Returns the combined state and
/// the path it lives on. Carrier paths of the plan are not used.
pub fn combiner_pipeline_state(state: &PureState, plan: &ChannelPlan, trace: &mut Trace) -> Result<(PureState, PathId)> {
    plan.validate()?;
    if trace.strict() {
        plan.check_order(true, "merger")?;
    }
    let Some(&base) = plan.order.first() else {
        return Err(SimError::InvalidParameter("combiner needs at least one channel".into()));
    };
    let mut s = state.clone();
    for &i in &plan.order {
        let (q0, q1) = plan.channel(i)?;
        s = converter(&s, q0, q1, pow2(i + 1)?, true, trace)?;
    }
    let out = plan.channel(base)?.0;
    for &i in &plan.order[1..] {
        s = merger(&s, out, plan.channel(i)?.0, i, trace)?;
    }
    Ok((s, out))
}

/// Reverses [`combiner_pipeline_state`], returning each qubit to its own pair of paths.
pub fn combiner_split(state: &PureState, plan: &ChannelPlan, trace: &mut Trace) -> Result<PureState> {
    plan.validate()?;
    let Some(&base) = plan.order.first() else {
        return Err(SimError::InvalidParameter("combiner needs at least one channel".into()));
    };
    let out = plan.channel(base)?.0;
    let mut s = state.clone();
    for &i in plan.order[1..].iter().rev() {
        let q0 = plan.channel(i)?.0;
        s = sorting_interferometer_inverse(&s, out, q0, pow2(i)?, trace)?;
    }
    for &i in plan.order.iter().rev() {
        let (q0, q1) = plan.channel(i)?;
        s = converter_inverse(&s, q0, q1, pow2(i + 1)?, true, trace)?;
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct CombinerOutput {
    pub state: PureState,
    pub path: PathId,
    pub plan: ChannelPlan,
    pub trace: Trace,
}

/// Combines `qubits` (most significant channel first) into one path.
pub fn combiner_pipeline(qubits: &[Qubit], order: OrderCheck) -> Result<CombinerOutput> {
    combiner_pipeline_with_plan(qubits, ChannelPlan::standard(qubits.len()), order)
}

/// [`combiner_pipeline`] on an explicit layout; `qubits[k]` goes to channel
/// `n - 1 - k`.
pub fn combiner_pipeline_with_plan(qubits: &[Qubit], plan: ChannelPlan, order: OrderCheck) -> Result<CombinerOutput> {
    if qubits.is_empty() || qubits.len() != plan.n() {
        return Err(SimError::InvalidParameter(format!(
            "combiner needs n >= 1 qubits matching the plan, got {} for {}",
            qubits.len(),
            plan.n()
        )));
    }
    let input = register_from_msb(qubits, &plan.qubit_paths)?;
    let mut trace = Trace::new(order);
    let (state, path) = combiner_pipeline_state(&input, &plan, &mut trace)?;
    Ok(CombinerOutput { state, path, plan, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{BasisState, Mode};
    use crate::oracle::oracle_combiner_state;
    use num_complex::Complex64 as C64;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    const Q0: PathId = PathId(2);
    const Q1: PathId = PathId(3);

    fn ket(p: PathId, ell: i64) -> BasisState {
        BasisState::single(Mode { path: p, ell })
    }

    fn qubit(q: Qubit) -> PureState {
        PureState::qubit(&q.on_paths(Q0, Q1)).unwrap()
    }

    #[test]
    fn converter_examples() {
        let mut t = Trace::default();
        let out = converter(&qubit(Qubit::zero()), Q0, Q1, 2, true, &mut t).unwrap();
        crate::blocks::assert_close(&out, &PureState::single_photon(Q0, -1).unwrap());

        let out = converter(&qubit(Qubit::one()), Q0, Q1, 4, true, &mut t).unwrap();
        crate::blocks::assert_close(&out, &PureState::single_photon(Q0, 2).unwrap());

        // Closed form: alpha|q0,-1> + beta|q0,+1>.
        let out = converter(&qubit(Qubit::plus()), Q0, Q1, 2, true, &mut t).unwrap();
        assert!((out.amplitude(&ket(Q0, -1)) - C64::new(H, 0.0)).norm() < 1e-15);
        assert!((out.amplitude(&ket(Q0, 1)) - C64::new(H, 0.0)).norm() < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-15);
        assert!(t.vacuum_checks_pass());
    }

    #[test]
    fn converter_rejects_non_dual_rail_input() {
        let s = PureState::single_photon(Q0, 3).unwrap();
        let err = converter(&s, Q0, Q1, 2, true, &mut Trace::default()).unwrap_err();
        assert!(matches!(err, SimError::InputNotDualRail { .. }));
        assert!(converter(&qubit(Qubit::zero()), Q0, Q1, 3, true, &mut Trace::default()).is_err());
    }

    #[test]
    fn converter_round_trip() {
        let q = Qubit::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let mut t = Trace::default();
        let oam = converter(&qubit(q), Q0, Q1, 8, true, &mut t).unwrap();
        let back = converter_inverse(&oam, Q0, Q1, 8, true, &mut t).unwrap();
        assert!(back.max_amplitude_deviation(&qubit(q)) < 1e-14);
    }

    #[test]
    fn merger_examples() {
        let (up, down) = (PathId(0), PathId(1));
        let q1 = Qubit::real(0.6, 0.8).unwrap();
        let q0 = Qubit::new(C64::new(0.0, H), C64::new(H, 0.0)).unwrap();
        let band = |q: Qubit, p: PathId, mag: i64| {
            PureState::from_terms([(ket(p, -mag), q.alpha), (ket(p, mag), q.beta)]).unwrap()
        };
        let input = band(q1, up, 2).tensor(&band(q0, down, 1));
        let mut t = Trace::default();
        let out = merger(&input, up, down, 0, &mut t).unwrap();
        let expected = oracle_combiner_state(&[q1, q0], up).unwrap();
        assert!(out.fidelity(&expected).unwrap() > 1.0 - 1e-12);
        assert!(t.vacuum_checks_pass());

        let out = merger(&band(q0, down, 1), up, down, 0, &mut t).unwrap();
        assert!(out.fidelity(&band(q0, up, 1)).unwrap() > 1.0 - 1e-12);

        // lower-index qubit already on the upper input
        let wrong = band(q0, up, 1).tensor(&band(q1, down, 2));
        let err = merger(&wrong, up, down, 1, &mut Trace::default()).unwrap_err();
        assert!(matches!(err, SimError::OrderViolation(_)));
    }

    #[test]
    fn combiner_single_channel_is_converter() {
        let q = Qubit::real(0.6, 0.8).unwrap();
        let out = combiner_pipeline(&[q], OrderCheck::Strict).unwrap();
        let expected = oracle_combiner_state(&[q], out.path).unwrap();
        assert!(out.state.fidelity(&expected).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn combiner_three_zeros() {
        let out = combiner_pipeline(&[Qubit::zero(); 3], OrderCheck::Strict).unwrap();
        let expected = PureState::basis(BasisState::from_modes(
            [-4, -2, -1].map(|ell| Mode { path: out.path, ell }),
        ));
        assert_eq!(out.state.len(), 1);
        assert!(out.state.fidelity(&expected).unwrap() > 1.0 - 1e-12);
        assert_eq!(out.trace.tally.cnots, 0);
        assert_eq!(out.trace.tally.interferometers, 5);
    }

    #[test]
    fn combiner_split_restores_register() {
        let qs = [Qubit::real(0.6, 0.8).unwrap(), Qubit::plus(), Qubit::one()];
        let out = combiner_pipeline(&qs, OrderCheck::Strict).unwrap();
        let mut t = Trace::default();
        let back = combiner_split(&out.state, &out.plan, &mut t).unwrap();
        let input = register_from_msb(&qs, &out.plan.qubit_paths).unwrap();
        assert!(back.fidelity(&input).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn misordered_combiner() {
        let qs = [Qubit::plus(), Qubit::plus()];
        let plan = ChannelPlan::standard(2).ascending();
        let input = register_from_msb(&qs, &plan.qubit_paths).unwrap();
        let err = combiner_pipeline_state(&input, &plan, &mut Trace::default()).unwrap_err();
        assert!(matches!(err, SimError::OrderViolation(_)));
        let mut t = Trace::new(OrderCheck::Permissive);
        let (s, _) = combiner_pipeline_state(&input, &plan, &mut t).unwrap();
        assert!(!t.vacuum_checks_pass());
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}
