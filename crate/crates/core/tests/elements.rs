use num_complex::Complex64 as C64;
use oamsim::blocks::{sorting_interferometer, sorting_interferometer_inverse, Trace};
use oamsim::elements::*;
use oamsim::oracle::oracle_interferometer_matrix;
use oamsim::random::random_state;
use oamsim::{BasisState, Mode, PathId, PureState, Qubit};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_1_SQRT_2 as H;

const PATHS: [PathId; 3] = [PathId(0), PathId(1), PathId(2)];

fn state(seed: u64, photons: u32) -> PureState {
    random_state(&mut ChaCha8Rng::seed_from_u64(seed), &PATHS, photons, 6, 6)
}

fn elements() -> Vec<Element> {
    let (a, b, c) = (PATHS[0], PATHS[1], PATHS[2]);
    vec![
        Element::Hologram { path: a, delta_ell: 3 },
        Element::DovePrism { path: b, alpha: Angle::pi_over(4) },
        Element::DovePrism { path: a, alpha: Angle::Radians(0.37) },
        Element::OamFlip { path: c },
        Element::Beamsplitter { path_up: a, path_down: b },
        Element::ArmPhase { path: b, alpha: Angle::pi_over(3) },
        Element::DualRailCnot { control: c, target_a: a, target_b: b },
        Element::OamScale { path: a, factor: 3 },
    ]
}

fn inverse(e: &Element) -> Element {
    match *e {
        Element::Hologram { path, delta_ell } => Element::Hologram { path, delta_ell: -delta_ell },
        Element::ArmPhase { path, alpha } => Element::ArmPhase { path, alpha: alpha.neg() },
        // the Dove prism, flip, beamsplitter and CNOT are their own inverses
        ref other => other.clone(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn elements_preserve_norm(seed in any::<u64>(), photons in 1u32..4) {
        let psi = state(seed, photons);
        for e in elements() {
            let out = e.apply(&psi).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-12, "{e:?}");
            prop_assert_eq!(out.photon_number(), photons);
        }
    }

    #[test]
    fn elements_are_linear(s1 in any::<u64>(), s2 in any::<u64>(), re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let (psi, phi) = (state(s1, 2), state(s2, 2));
        let w = C64::new(re, im);
        let combo = |x: &PureState, y: &PureState| {
            PureState::normalized_from_terms(
                x.terms().map(|(b, a)| (b.clone(), *a)).chain(y.terms().map(|(b, a)| (b.clone(), a * w))),
            )
        };
        let Ok((mixed, _)) = combo(&psi, &phi) else { return Ok(()) };
        for e in elements() {
            let direct = e.apply(&mixed).unwrap();
            let (split, _) = combo(&e.apply(&psi).unwrap(), &e.apply(&phi).unwrap()).unwrap();
            prop_assert!(direct.max_amplitude_deviation(&split) < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn involutions(seed in any::<u64>(), photons in 1u32..4) {
        let psi = state(seed, photons);
        for e in elements().iter().filter(|e| !matches!(e, Element::OamScale { .. })) {
            let back = inverse(e).apply(&e.apply(&psi).unwrap()).unwrap();
            prop_assert!(back.max_amplitude_deviation(&psi) < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn cnot_permutes_amplitudes_exactly(seed in any::<u64>()) {
        let psi = state(seed, 3);
        let out = apply_dual_rail_cnot(&psi, PATHS[2], PATHS[0], PATHS[1]).unwrap();
        let key = |s: &PureState| {
            let mut v: Vec<(u64, u64)> = s.terms().map(|(_, a)| (a.re.to_bits(), a.im.to_bits())).collect();
            v.sort();
            v
        };
        prop_assert_eq!(key(&psi), key(&out));
    }

    #[test]
    fn interferometer_inverse(seed in any::<u64>(), k in prop::sample::select(vec![1i64, 2, 4, 8])) {
        let psi = state(seed, 2);
        let mut t = Trace::default();
        let there = sorting_interferometer(&psi, PATHS[0], PATHS[1], k, &mut t).unwrap();
        let back = sorting_interferometer_inverse(&there, PATHS[0], PATHS[1], k, &mut t).unwrap();
        prop_assert!(back.max_amplitude_deviation(&psi) < 1e-12);
    }
}

#[test]
fn hong_ou_mandel() {
    let (a, b) = (PATHS[0], PATHS[1]);
    let input = PureState::basis(BasisState::from_modes([Mode { path: a, ell: 0 }, Mode { path: b, ell: 0 }]));
    let out = apply_beamsplitter(&input, a, b).unwrap();
    let two = |p| BasisState::from_occupations([(Mode { path: p, ell: 0 }, 2)]);
    let expected = PureState::from_terms([(two(a), C64::new(H, 0.0)), (two(b), C64::new(-H, 0.0))]).unwrap();
    assert!(out.max_amplitude_deviation(&expected) < 1e-15);
}

#[test]
fn interferometer_matches_transfer_matrix() {
    let (up, down) = (PATHS[0], PATHS[1]);
    for k in [1, 2, 4, 8] {
        for ell in -32..=32 {
            let m = oracle_interferometer_matrix(ell, k);
            for (col, port) in [up, down].into_iter().enumerate() {
                let input = PureState::single_photon(port, ell).unwrap();
                let out = sorting_interferometer(&input, up, down, k, &mut Trace::default()).unwrap();
                for (row, out_port) in [up, down].into_iter().enumerate() {
                    let amp = out.amplitude(&BasisState::single(Mode { path: out_port, ell }));
                    assert!((amp - m[row][col]).norm() < 1e-12, "ell {ell} K {k}");
                }
                if ell % k == 0 {
                    // integer multiples of K leave exactly one output port lit
                    assert_eq!(out.len(), 1, "ell {ell} K {k}");
                    let stays = (ell / k) % 2 == 0;
                    let lit = if stays { port } else if port == up { down } else { up };
                    assert_eq!(out.marginal_path_probability(lit), 1.0);
                }
            }
        }
    }
}

#[test]
fn qnd_statistics() {
    let psi = PureState::qubit(&Qubit::real(0.6, 0.8).unwrap().on_paths(PATHS[0], PATHS[1])).unwrap();
    let trials = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut ones = 0;
    for _ in 0..trials {
        let (bit, post) = qnd_measure_path(&psi, PATHS[1], &mut rng).unwrap();
        ones += bit as u32;
        assert_eq!(post.len(), 1);
    }
    let p = 0.64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    let freq = ones as f64 / trials as f64;
    assert!((freq - p).abs() < 4.0 * sigma, "frequency {freq}");
}

#[test]
fn qnd_keeps_oam_superposition() {
    let psi = PureState::from_terms([
        (BasisState::single(Mode { path: PATHS[1], ell: 1 }), C64::new(0.6, 0.0)),
        (BasisState::single(Mode { path: PATHS[1], ell: 3 }), C64::new(0.0, 0.8)),
    ])
    .unwrap();
    let (bit, post) = qnd_measure_path_seeded(&psi, PATHS[1], 1).unwrap();
    assert!(bit);
    assert_eq!(post, psi);
}
