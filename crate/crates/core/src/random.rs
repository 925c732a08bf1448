//! Random qubits and states for property checks and demos.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::fock::{BasisState, Mode, PathId, PureState, Qubit};

/// Haar-random single-qubit amplitudes.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> Qubit {
    let theta = 2.0 * rng.gen::<f64>().sqrt().asin();
    let (phi_a, phi_b) = (rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU);
    Qubit {
        alpha: C64::from_polar((theta / 2.0).cos(), phi_a),
        beta: C64::from_polar((theta / 2.0).sin(), phi_b),
    }
}

pub fn random_qubits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Qubit> {
    (0..n).map(|_| random_qubit(rng)).collect()
}

/// A random normalized state of `photons` photons spread over `paths`, with
/// winding numbers in `-ell_max..=ell_max` and at most `max_terms` terms.
pub fn random_state<R: Rng + ?Sized>(
    rng: &mut R,
    paths: &[PathId],
    photons: u32,
    ell_max: i64,
    max_terms: usize,
) -> PureState {
    assert!(!paths.is_empty() && max_terms >= 1);
    let n_terms = rng.gen_range(1..=max_terms);
    let terms: Vec<(BasisState, C64)> = (0..n_terms)
        .map(|_| {
            let modes = (0..photons).map(|_| Mode {
                path: paths[rng.gen_range(0..paths.len())],
                ell: rng.gen_range(-ell_max..=ell_max),
            });
            let basis = BasisState::from_modes(modes.collect::<Vec<_>>());
            let amp = C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) + 1e-3;
            (basis, amp)
        })
        .collect();
    PureState::normalized_from_terms(terms).expect("nonzero random amplitudes").0
}
