use std::path::PathBuf;
use std::process::{Command, Output};

use num_complex::Complex64 as C64;
use oamsim::blocks::OrderCheck;
use oamsim::circuit::*;
use oamsim::elements::Angle;
use oamsim::random::random_state;
use oamsim::PathId;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn circuit(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("circuits").join(name)
}

fn oamsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oamsim")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, prop_oneof![Just(0.0), -2.0f64..2.0]).prop_map(|(re, im)| C64::new(re, im))
}

fn path() -> impl Strategy<Value = PathId> {
    (0u32..4).prop_map(PathId)
}

fn angle() -> impl Strategy<Value = Angle> {
    prop_oneof![
        (-12i64..12).prop_filter("non-zero", |k| *k != 0).prop_map(Angle::pi_over),
        (-9i64..9, 1i64..9).prop_map(|(num, den)| Angle::PiRational { num, den }),
        (-7.0f64..7.0).prop_map(Angle::Radians),
    ]
}

fn element() -> impl Strategy<Value = ElementSpec> {
    let op = prop_oneof![
        (path(), -50i64..50).prop_map(|(path, delta_ell)| ElementOp::Hologram { path, delta_ell }),
        (path(), angle()).prop_map(|(path, alpha)| ElementOp::Dove { path, alpha }),
        path().prop_map(|path| ElementOp::Flip { path }),
        Just(ElementOp::Beamsplitter { path_up: PathId(0), path_down: PathId(1) }),
        (path(), angle()).prop_map(|(path, alpha)| ElementOp::ArmPhase { path, alpha }),
        Just(ElementOp::Cnot { control: PathId(3), target_a: PathId(0), target_b: PathId(1) }),
        (path(), 1i64..5).prop_map(|(path, factor)| ElementOp::Scale { path, factor }),
        (path(), prop::option::of(1e-12f64..1e-3)).prop_map(|(path, tol)| ElementOp::AssertVacuum { path, tol }),
        path().prop_map(|path| ElementOp::Qnd { path }),
    ];
    (op, prop::option::of("[a-z]{1,6}")).prop_map(|(op, label)| ElementSpec { op, label })
}

fn initial() -> impl Strategy<Value = InitialSpec> {
    prop_oneof![
        (path(), -20i64..20).prop_map(|(path, ell)| InitialSpec::Photon { path, ell }),
        (complex(), complex()).prop_map(|(alpha, beta)| InitialSpec::Qubit {
            alpha,
            beta,
            path_zero: PathId(0),
            path_one: PathId(1)
        }),
        any::<u64>().prop_map(|seed| {
            let s = random_state(&mut ChaCha8Rng::seed_from_u64(seed), &[PathId(2), PathId(3)], 2, 4, 3);
            InitialSpec::State { terms: s.entries() }
        }),
    ]
}

fn qubit_amps(n: usize) -> impl Strategy<Value = Vec<QubitAmps>> {
    prop::collection::vec((complex(), complex()).prop_map(|(alpha, beta)| QubitAmps { alpha, beta }), n)
}

fn carrier() -> impl Strategy<Value = Vec<CarrierTerm>> {
    prop::collection::vec((0i64..16, complex()).prop_map(|(ell, amp)| CarrierTerm { ell, amp }), 1..4)
}

fn operand(n: usize) -> impl Strategy<Value = Operand> {
    prop_oneof![(0u64..1 << n).prop_map(Operand::Value), qubit_amps(n).prop_map(Operand::Qubits)]
}

fn order_check() -> impl Strategy<Value = OrderCheck> {
    prop_oneof![Just(OrderCheck::Strict), Just(OrderCheck::Permissive)]
}

fn pipeline() -> impl Strategy<Value = PipelineSpec> {
    let channel_order = prop::option::of(prop::collection::vec(0usize..4, 1..4));
    prop_oneof![
        (1usize..5).prop_flat_map(|n| qubit_amps(n)).prop_flat_map(move |qubits| {
            (Just(qubits), order_check(), prop::option::of(Just(vec![0usize])))
                .prop_map(|(qubits, order_check, channel_order)| PipelineSpec::Combiner { qubits, order_check, channel_order })
        }),
        ((1usize..5).prop_flat_map(qubit_amps), any::<bool>(), order_check(), channel_order.clone()).prop_map(
            |(qubits, recycle_first, order_check, channel_order)| PipelineSpec::Mux {
                qubits,
                recycle_first,
                order_check,
                channel_order
            }
        ),
        (1usize..=12, carrier(), any::<bool>(), order_check(), channel_order).prop_map(
            |(n, carrier, recycle_last, order_check, channel_order)| PipelineSpec::Demux {
                n,
                carrier,
                recycle_last,
                order_check,
                channel_order
            }
        ),
        (1u64..=4096, carrier()).prop_map(|(max_ell, carrier)| PipelineSpec::SorterCoherent { max_ell, carrier }),
        (1u64..=4096, carrier()).prop_map(|(max_ell, carrier)| PipelineSpec::SorterQnd { max_ell, carrier }),
        (1usize..5).prop_flat_map(|n| (Just(n), operand(n), operand(n), any::<bool>())).prop_map(
            |(n, first, second, recycle)| PipelineSpec::Adder { n, first, second, recycle }
        ),
        (1usize..5)
            .prop_flat_map(|n| (Just(n), operand(n), operand(n)))
            .prop_map(|(n, first, second)| PipelineSpec::Multiplier { n, first, second }),
    ]
}

fn spec() -> impl Strategy<Value = CircuitSpec> {
    let elements = (
        prop::collection::vec(initial(), 0..3),
        prop::collection::vec(element(), 0..6),
        prop::option::of(any::<u64>()),
    )
        .prop_map(|(initial, elements, seed)| CircuitSpec {
            version: SCHEMA_VERSION.into(),
            paths: (0..4).map(PathId).collect(),
            initial,
            elements,
            pipeline: None,
            seed,
        });
    let pipelined = (pipeline(), prop::option::of(any::<u64>())).prop_map(|(p, seed)| CircuitSpec {
        seed,
        ..CircuitSpec::for_pipeline(p)
    });
    prop_oneof![elements, pipelined]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_serialize_round_trip(spec in spec()) {
        let text = serialize_circuit(&spec);
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(back, spec);
    }
}

#[test]
fn run_prints_report() {
    let out = oamsim(&["run", circuit("hologram.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: RunReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.state[0].basis, "0:2:1");
    assert_eq!(report.tally.holograms, 1);
    assert_eq!(report.norm, 1.0);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let file = circuit("sorter_qnd.json");
    let a = oamsim(&["run", file.to_str().unwrap(), "--seed", "17"]);
    let b = oamsim(&["run", file.to_str().unwrap(), "--seed", "17"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let report: RunReport = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report.seed, 17);
    assert_eq!(report.qnd.len(), 2);
}

#[test]
fn run_writes_out_file() {
    let dir = std::env::temp_dir().join(format!("oamsim-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("report.json");
    let out = oamsim(&["run", circuit("mux3.json").to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let report: RunReport = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(report.pipeline.unwrap().kind, "mux");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn verify_exit_codes() {
    let verify = |name: &str, extra: &[&str]| {
        let file = circuit(name);
        let mut args = vec!["verify", file.to_str().unwrap()];
        args.extend_from_slice(extra);
        oamsim(&args)
    };
    let out = verify("adder.json", &["--exhaustive"]);
    assert_eq!(code(&out), 0);
    let report: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.exhaustive.unwrap().passed, 64);

    let out = verify("multiplier_3x3.json", &[]);
    assert_eq!(code(&out), 0);
    let report: VerifyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.status, VerifyStatus::DocumentedDivergence);

    assert_eq!(code(&verify("combiner_misordered.json", &[])), 2);
    assert_eq!(code(&verify("hologram.json", &[])), 1);
    assert_eq!(code(&verify("does-not-exist.json", &[])), 1);
}

#[test]
fn tally_subcommand() {
    let out = oamsim(&["tally", circuit("adder_recycled.json").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report: TallyReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.tally.cnots, 16);
}

#[test]
fn lmax_override() {
    let file = circuit("hologram.json");
    let out = Command::new(env!("CARGO_BIN_EXE_oamsim"))
        .args(["run", file.to_str().unwrap()])
        .env("OAMSIM_LMAX", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds the configured bound 1"));
}

#[test]
fn malformed_files_are_errors() {
    let dir = std::env::temp_dir().join(format!("oamsim-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"version\": \"oamsim/1\",\n  \"paths\": [0,]}").unwrap();
    let out = oamsim(&["run", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&oamsim(&["frobnicate"])), 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn sample_circuits_parse_and_run() {
    for entry in std::fs::read_dir(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("circuits")).unwrap() {
        let path = entry.unwrap().path();
        let spec = parse_circuit(&std::fs::read_to_string(&path).unwrap()).unwrap();
        run_circuit(&spec, RunOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
