//! Closed-form reference results.
//!
//! Nothing here touches the element engine: states are assembled directly
//! from their defining formulas so that agreement with a simulated circuit is
//! independent evidence.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{BasisState, Mode, PathId, PureState, Qubit};

fn check_len(specs: &[Qubit], n: usize) -> Result<()> {
    if specs.len() != n {
        return Err(SimError::InvalidParameter(format!(
            "expected {n} qubit specs, got {}",
            specs.len()
        )));
    }
    for q in specs {
        Qubit::new(q.alpha, q.beta)?;
    }
    Ok(())
}

/// Amplitude vector of the multiplexed carrier, indexed by `ell` in
/// `0..2^n`. `specs` lists channels most significant first, so `specs[0]`
/// is channel `n - 1`.
///
/// Entry `ell` is the product over channels `k` of `beta_k` when bit `k` of
/// `ell` is set and `alpha_k` otherwise.
pub fn oracle_mux_amplitudes(specs: &[Qubit], n: usize) -> Result<Vec<C64>> {
    check_len(specs, n)?;
    let by_channel: Vec<&Qubit> = specs.iter().rev().collect();
    Ok((0..1usize << n)
        .map(|ell| {
            by_channel
                .iter()
                .enumerate()
                .map(|(k, q)| if (ell >> k) & 1 == 1 { q.beta } else { q.alpha })
                .product()
        })
        .collect())
}

/// `⊗_i (alpha_i |-2^i> + beta_i |2^i>)` with all photons on `path`.
/// `specs` lists channels most significant first.
pub fn oracle_combiner_state(specs: &[Qubit], path: PathId) -> Result<PureState> {
    let n = specs.len();
    check_len(specs, n)?;
    let by_channel: Vec<&Qubit> = specs.iter().rev().collect();
    let terms = (0..1u64 << n).map(|pattern| {
        let mut amp = C64::new(1.0, 0.0);
        let mut modes = Vec::with_capacity(n);
        for (i, q) in by_channel.iter().enumerate() {
            let mag = 1i64 << i;
            if (pattern >> i) & 1 == 1 {
                amp *= q.beta;
                modes.push(Mode { path, ell: mag });
            } else {
                amp *= q.alpha;
                modes.push(Mode { path, ell: -mag });
            }
        }
        (BasisState::from_modes(modes), amp)
    });
    PureState::from_terms(terms)
}

/// Single-photon transfer matrix of the sorting interferometer at winding
/// number `ell` and Dove parameter `k` (`alpha = pi / k`). Columns are the
/// (upper, lower) input ports, rows the output ports.
pub fn oracle_interferometer_matrix(ell: i64, k: i64) -> [[C64; 2]; 2] {
    assert!(k >= 1, "K must be positive");
    // theta = ell * pi / k; reduce ell modulo 2k, the period of e^{i theta}.
    let r = ell.rem_euclid(2 * k);
    let e = if (4 * r) % (2 * k) == 0 {
        // theta is a multiple of pi/2
        [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)]
            [((2 * r) / k) as usize]
    } else {
        let theta = std::f64::consts::PI * r as f64 / k as f64;
        C64::new(theta.cos(), theta.sin())
    };
    let one = C64::new(1.0, 0.0);
    let same = (one + e) / 2.0;
    let cross = (one - e) / 2.0;
    [[same, cross], [cross, same]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithmeticOp {
    Add,
    /// `N * 2^(sum of set-bit positions of M)`: what chaining conditional
    /// `x 2^j` blocks over the set bits of `M` literally produces.
    ScaleShiftComposition,
}

pub fn oracle_arithmetic(n_value: u64, m_value: u64, op: ArithmeticOp) -> u64 {
    match op {
        ArithmeticOp::Add => n_value + m_value,
        ArithmeticOp::ScaleShiftComposition => {
            let exponent: u32 = (0..64).filter(|j| (m_value >> j) & 1 == 1).sum();
            n_value << exponent
        }
    }
}

/// `ceil(log2(m))`, with `ceil(log2(1)) = 0`.
pub fn ceil_log2(m: u64) -> u32 {
    assert!(m >= 1, "log2 of zero");
    let mut bits = 0;
    while (1u64 << bits) < m {
        bits += 1;
    }
    bits
}

/// `sum_v c_v |v>` written into dual-rail qubits: bit `i` of `v` selects the
/// rail of `pairs[i]` (`.0` for 0, `.1` for 1), each photon at `ell = 0`.
pub fn oracle_register_state(values: &[(u64, C64)], pairs: &[(PathId, PathId)]) -> Result<PureState> {
    let terms = values.iter().map(|&(v, amp)| {
        let modes = pairs.iter().enumerate().map(|(i, &(p0, p1))| Mode {
            path: if (v >> i) & 1 == 1 { p1 } else { p0 },
            ell: 0,
        });
        (BasisState::from_modes(modes), amp)
    });
    PureState::from_terms(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn mux_amplitudes() {
        let q = Qubit::new(c(0.6), C64::new(0.0, 0.8)).unwrap();
        assert_eq!(oracle_mux_amplitudes(&[q], 1).unwrap(), vec![q.alpha, q.beta]);

        let v = oracle_mux_amplitudes(&[Qubit::plus(), Qubit::plus()], 2).unwrap();
        for a in v {
            assert!((a - c(0.5)).norm() < 1e-15);
        }

        let v = oracle_mux_amplitudes(&[Qubit::zero(), Qubit::one()], 2).unwrap();
        assert_eq!(v, vec![c(0.0), c(1.0), c(0.0), c(0.0)]);

        assert!(oracle_mux_amplitudes(&[Qubit::zero()], 2).is_err());
        let bad = Qubit { alpha: c(1.0), beta: c(1.0) };
        assert!(matches!(
            oracle_mux_amplitudes(&[bad], 1),
            Err(SimError::NotNormalized { .. })
        ));
    }

    #[test]
    fn combiner_state() {
        let p = PathId(0);
        let q = Qubit::new(c(0.6), C64::new(0.0, 0.8)).unwrap();
        let s = oracle_combiner_state(&[q], p).unwrap();
        assert_eq!(s.amplitude(&BasisState::single(Mode { path: p, ell: -1 })), q.alpha);
        assert_eq!(s.amplitude(&BasisState::single(Mode { path: p, ell: 1 })), q.beta);

        let (qi, qj) = (Qubit::real(0.6, 0.8).unwrap(), Qubit::plus());
        let s = oracle_combiner_state(&[qi, qj], p).unwrap();
        let pair = |a, b| BasisState::from_modes([Mode { path: p, ell: a }, Mode { path: p, ell: b }]);
        assert!((s.amplitude(&pair(-2, -1)) - c(0.6 * H)).norm() < 1e-15);
        assert!((s.amplitude(&pair(-2, 1)) - c(0.6 * H)).norm() < 1e-15);
        assert!((s.amplitude(&pair(2, -1)) - c(0.8 * H)).norm() < 1e-15);
        assert!((s.amplitude(&pair(2, 1)) - c(0.8 * H)).norm() < 1e-15);

        let s = oracle_combiner_state(&[Qubit::one(), Qubit::zero(), Qubit::one()], p).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.photon_number(), 3);
    }

    #[test]
    fn interferometer_matrix() {
        let m = oracle_interferometer_matrix(8, 4);
        assert_eq!(m, [[c(1.0), c(0.0)], [c(0.0), c(1.0)]]);
        let m = oracle_interferometer_matrix(4, 4);
        assert_eq!(m, [[c(0.0), c(1.0)], [c(1.0), c(0.0)]]);
        let m = oracle_interferometer_matrix(2, 4);
        for row in m {
            for x in row {
                assert!((x.norm() - H).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn interferometer_matrix_is_unitary() {
        for k in 1..=9 {
            for ell in -40..=40 {
                let m = oracle_interferometer_matrix(ell, k);
                for i in 0..2 {
                    for j in 0..2 {
                        let dot: C64 = (0..2).map(|r| m[i][r] * m[j][r].conj()).sum();
                        let expect = if i == j { 1.0 } else { 0.0 };
                        assert!((dot - c(expect)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn arithmetic() {
        assert_eq!(oracle_arithmetic(3, 5, ArithmeticOp::Add), 8);
        assert_eq!(oracle_arithmetic(6, 0, ArithmeticOp::Add), 6);
        assert_eq!(oracle_arithmetic(3, 3, ArithmeticOp::ScaleShiftComposition), 6);
        assert_eq!(oracle_arithmetic(3, 4, ArithmeticOp::ScaleShiftComposition), 12);
    }

    #[test]
    fn ceil_log2_values() {
        let expected = [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (7, 3), (8, 3), (9, 4), (15, 4), (16, 4), (64, 6)];
        for (m, b) in expected {
            assert_eq!(ceil_log2(m), b, "M = {m}");
        }
    }
}
