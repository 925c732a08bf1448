use crate::elements::{Angle, Element};
use crate::error::{Result, SimError};
use crate::fock::{PathId, PureState};

use super::Trace;

fn run(state: &PureState, up: PathId, down: PathId, k: i64, alpha: Angle, trace: &mut Trace) -> Result<PureState> {
    if k < 1 {
        return Err(SimError::InvalidParameter(format!("interferometer K must be >= 1, got {k}")));
    }
    let bs = Element::Beamsplitter { path_up: up, path_down: down };
    let s = trace.apply(state, bs.clone())?;
    let s = trace.apply(&s, Element::ArmPhase { path: down, alpha })?;
    let s = trace.apply(&s, bs)?;
    trace.tally.interferometers += 1;
    Ok(s)
}

/// Beamsplitter, lower-arm phase `e^{i ell pi / K}`, beamsplitter.
///
/// Photons with `ell = mK` keep their port when `m` is even and swap ports
/// when `m` is odd. Other winding numbers are split between the ports.
pub fn sorting_interferometer(state: &PureState, up: PathId, down: PathId, k: i64, trace: &mut Trace) -> Result<PureState> {
    run(state, up, down, k, Angle::pi_over(k), trace)
}

/// Inverse of [`sorting_interferometer`] (lower-arm phase `e^{-i ell pi / K}`).
/// Coincides with the forward map on multiples of `K`.
pub fn sorting_interferometer_inverse(
    state: &PureState,
    up: PathId,
    down: PathId,
    k: i64,
    trace: &mut Trace,
) -> Result<PureState> {
    run(state, up, down, k, Angle::pi_over(k).neg(), trace)
}
