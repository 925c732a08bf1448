use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    adder_pipeline, demux_pipeline, multiplier_pipeline, operand_bits, qubit_product, ArithmeticOutput,
    DemuxOutput, MuxOutput, Trace, CARRIER_UP,
};
use crate::elements::{GateTally, VACUUM_TOL};
use crate::error::SimError;
use crate::fock::{PathId, PureState, Qubit};
use crate::oracle::{
    ceil_log2, oracle_arithmetic, oracle_combiner_state, oracle_mux_amplitudes, oracle_register_state,
    ArithmeticOp,
};

use super::run::{carrier_of, execute_pipeline, qubits_of, PipelineRun};
use super::{CircuitError, CircuitSpec, Operand, PipelineSpec};

/// Pass threshold on amplitude deviations and infidelities.
pub const VERIFY_TOL: f64 = 1e-9;
/// Largest operand width for `--exhaustive`.
pub const MAX_EXHAUSTIVE_BITS: usize = 5;

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Also run every basis operand pair (adder and multiplier).
    pub exhaustive: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckOutcome {
    Pass,
    Fail,
    /// Known mismatch with the claimed behaviour, reproduced as documented.
    DocumentedDivergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub outcome: CheckOutcome,
}

impl Check {
    fn new(name: impl Into<String>, expected: impl ToString, observed: impl ToString, ok: bool) -> Self {
        Check {
            name: name.into(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            outcome: if ok { CheckOutcome::Pass } else { CheckOutcome::Fail },
        }
    }

    fn deviation(name: impl Into<String>, dev: f64) -> Self {
        Check::new(name, format!("< {VERIFY_TOL:e}"), format!("{dev:e}"), dev < VERIFY_TOL)
    }

    fn count(name: impl Into<String>, formula: &str, expected: u64, observed: u64) -> Self {
        Check::new(name, format!("{formula} = {expected}"), observed, expected == observed)
    }

    fn failed(name: impl Into<String>, expected: impl ToString, err: SimError) -> Self {
        Check::new(name, expected, format!("error: {err}"), false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyStatus {
    Pass,
    Fail,
    DocumentedDivergence,
}

impl VerifyStatus {
    /// Process exit code: a documented divergence is an expected result.
    pub fn exit_code(self) -> i32 {
        match self {
            VerifyStatus::Pass | VerifyStatus::DocumentedDivergence => 0,
            VerifyStatus::Fail => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExhaustiveSummary {
    pub passed: u64,
    pub total: u64,
    /// Pairs where the output also equals the plain product (multiplier).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product_matches: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pipeline: String,
    pub status: VerifyStatus,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<f64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<ExhaustiveSummary>,
}

impl VerifyReport {
    fn new(pipeline: &str, checks: Vec<Check>, max_deviation: Option<f64>, exhaustive: Option<ExhaustiveSummary>) -> Self {
        let status = if checks.iter().any(|c| c.outcome == CheckOutcome::Fail) {
            VerifyStatus::Fail
        } else if checks.iter().any(|c| c.outcome == CheckOutcome::DocumentedDivergence) {
            VerifyStatus::DocumentedDivergence
        } else {
            VerifyStatus::Pass
        };
        VerifyReport { pipeline: pipeline.into(), status, tolerance: VERIFY_TOL, max_deviation, checks, exhaustive }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn vacuum_check(trace: &Trace) -> Check {
    let worst = trace.max_vacuum_probability();
    Check::new(
        format!("{} vacuum ports", trace.vacuum_checks.len()),
        format!("<= {VACUUM_TOL:e}"),
        format!("{worst:e}"),
        trace.vacuum_checks_pass(),
    )
}

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(value, amplitude)` pairs of an operand, most significant qubit first.
fn operand_values(op: &Operand, n: usize) -> Result<Vec<(u64, C64)>, SimError> {
    Ok(match op {
        Operand::Value(v) => vec![(*v, C64::new(1.0, 0.0))],
        Operand::Qubits(q) => oracle_mux_amplitudes(&qubits_of(q)?, n)?
            .into_iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(v, a)| (v as u64, a))
            .collect(),
    })
}

/// Joint state of the untouched second operand (low bits) and the result
/// register (high bits) that an arithmetic pipeline should produce.
fn arithmetic_oracle(
    out: &ArithmeticOutput,
    first: &[(u64, C64)],
    second: &[(u64, C64)],
    op: ArithmeticOp,
) -> Result<PureState, SimError> {
    let n = out.n;
    let values: Vec<(u64, C64)> = first
        .iter()
        .flat_map(|&(a, ca)| second.iter().map(move |&(b, cb)| (b | (oracle_arithmetic(a, b, op) << n), ca * cb)))
        .collect();
    let pairs: Vec<(PathId, PathId)> = out.second_operand_pairs.iter().chain(&out.result_pairs).copied().collect();
    oracle_register_state(&values, &pairs)
}

fn state_check(name: &str, observed: Result<PureState, SimError>, expected: Result<PureState, SimError>) -> (Check, f64) {
    match (observed, expected) {
        (Ok(o), Ok(e)) => {
            let dev = o.max_amplitude_deviation(&e);
            (Check::deviation(name, dev), dev)
        }
        (Err(err), _) | (_, Err(err)) => (Check::failed(name, "separable output", err), f64::INFINITY),
    }
}

/// Runs the DEMUX matching a MUX run on its carrier.
fn demux_after(out: &MuxOutput) -> Result<DemuxOutput, SimError> {
    demux_pipeline(&out.carrier()?, out.plan.n(), out.recycle_first, out.trace.order)
}

/// Gate-count formulas for one pipeline run.
fn tally_checks(p: &PipelineSpec, run: &PipelineRun) -> Vec<Check> {
    let tally = run.tally();
    match (p, run) {
        (PipelineSpec::Combiner { qubits, .. }, _) => {
            let n = qubits.len() as u64;
            vec![
                Check::count("combiner cnots", "0", 0, tally.cnots),
                Check::count("combiner interferometers", "2n - 1", 2 * n - 1, tally.interferometers),
            ]
        }
        (PipelineSpec::Mux { qubits, recycle_first, .. }, PipelineRun::Mux(out)) => {
            let n = qubits.len() as u64;
            let (formula, expected) = if *recycle_first { ("4n - 4", 4 * n - 4) } else { ("4n", 4 * n) };
            let mut checks = vec![Check::count(
                "mux cnots",
                if *recycle_first { "2n - 2" } else { "2n" },
                expected / 2,
                tally.cnots,
            )];
            match demux_after(out) {
                Ok(d) => checks.push(Check::count(
                    "mux + demux cnots",
                    formula,
                    expected,
                    tally.cnots + d.trace.tally.cnots,
                )),
                Err(err) => checks.push(Check::failed("mux + demux cnots", formula, err)),
            }
            checks
        }
        (PipelineSpec::Demux { n, recycle_last, .. }, _) => {
            let n = *n as u64;
            let (formula, expected) = if *recycle_last { ("2n - 2", 2 * n - 2) } else { ("2n", 2 * n) };
            vec![Check::count("demux cnots", formula, expected, tally.cnots)]
        }
        (PipelineSpec::SorterCoherent { max_ell, .. }, PipelineRun::SorterCoherent(out)) => vec![
            Check::count("sorter stages", "ceil(log2 M)", ceil_log2(*max_ell) as u64, out.stages as u64),
            Check::count("sorter interferometers", "ceil(log2 M)", ceil_log2(*max_ell) as u64, tally.interferometers),
        ],
        (PipelineSpec::SorterQnd { max_ell, .. }, PipelineRun::SorterQnd(out)) => vec![
            Check::count("sorter stages", "ceil(log2 M)", ceil_log2(*max_ell) as u64, out.stages as u64),
            Check::count("qnd measurements", "ceil(log2 M)", ceil_log2(*max_ell) as u64, tally.qnd_measurements),
        ],
        (PipelineSpec::Adder { n, recycle, .. }, _) => {
            let n = *n as u64;
            let (formula, expected) = if *recycle { ("6n - 2", 6 * n - 2) } else { ("6n + 2", 6 * n + 2) };
            vec![Check::count("adder cnots", formula, expected, tally.cnots)]
        }
        (PipelineSpec::Multiplier { n, .. }, _) => {
            let n = *n as u64;
            let result_bits = n + n * (n - 1) / 2;
            vec![Check::count(
                "multiplier cnots",
                "2n + 2n + 2(n + n(n-1)/2)",
                4 * n + 2 * result_bits,
                tally.cnots,
            )]
        }
        _ => unreachable!("pipeline spec and run disagree"),
    }
}

/// Gate counts of a run next to the closed-form expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<String>,
    pub tally: GateTally,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub formulas: Vec<Check>,
}

impl TallyReport {
    pub fn formulas_hold(&self) -> bool {
        self.formulas.iter().all(|c| c.outcome != CheckOutcome::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

pub fn tally(spec: &CircuitSpec, seed: Option<u64>) -> Result<TallyReport, CircuitError> {
    spec.validate()?;
    let seed = seed.or(spec.seed).unwrap_or(0);
    match &spec.pipeline {
        Some(p) => {
            let run = execute_pipeline(p, seed)?;
            Ok(TallyReport {
                pipeline: Some(p.name().into()),
                tally: run.tally().clone(),
                formulas: tally_checks(p, &run),
            })
        }
        None => {
            let report = super::run_circuit(spec, super::RunOptions { seed: Some(seed), timing: false })?;
            Ok(TallyReport { pipeline: None, tally: report.tally, formulas: Vec::new() })
        }
    }
}

/// Runs a pipeline circuit and compares it with the closed-form oracles and
/// gate-count formulas.
pub fn verify(spec: &CircuitSpec, options: VerifyOptions) -> Result<VerifyReport, CircuitError> {
    spec.validate()?;
    let Some(p) = &spec.pipeline else {
        return Err(CircuitError::NoOracleForCircuit("element-level circuits have no closed form".into()));
    };
    let seed = options.seed.or(spec.seed).unwrap_or(0);
    let run = execute_pipeline(p, seed)?;
    let mut checks = Vec::new();
    let mut deviation = None;
    let mut exhaustive = None;

    match (p, &run) {
        (PipelineSpec::Combiner { qubits, .. }, PipelineRun::Combiner(out)) => {
            let expected = oracle_combiner_state(&qubits_of(qubits)?, out.path);
            let (c, dev) = state_check("combined state vs tensor-product form", Ok(out.state.clone()), expected);
            checks.push(c);
            deviation = Some(dev);
        }
        (PipelineSpec::Mux { qubits, .. }, PipelineRun::Mux(out)) => {
            let qubits = qubits_of(qubits)?;
            let expected = oracle_mux_amplitudes(&qubits, qubits.len())?;
            match out.carrier_amplitudes() {
                Ok(observed) => {
                    let dev = max_dev(&observed, &expected);
                    checks.push(Check::deviation("carrier amplitudes vs product formula", dev));
                    deviation = Some(dev);
                }
                Err(err) => checks.push(Check::failed("carrier amplitudes vs product formula", "separable output", err)),
            }
            match demux_after(out).and_then(|d| Ok((d.register()?, d.register_pairs()))) {
                Ok((register, pairs)) => {
                    let by_channel: Vec<Qubit> = qubits.iter().rev().copied().collect();
                    let fidelity = qubit_product(&by_channel, &pairs)?.fidelity(&register).unwrap_or(0.0);
                    checks.push(Check::new(
                        "demux round-trip fidelity",
                        format!(">= 1 - {VERIFY_TOL:e}"),
                        fidelity,
                        fidelity >= 1.0 - VERIFY_TOL,
                    ));
                }
                Err(err) => checks.push(Check::failed("demux round-trip fidelity", "recovered qubits", err)),
            }
        }
        (PipelineSpec::Demux { carrier, .. }, PipelineRun::Demux(out)) => {
            let values = carrier.iter().map(|t| (t.ell as u64, t.amp)).collect::<Vec<_>>();
            let expected = oracle_register_state(&values, &out.register_pairs());
            let (c, dev) = state_check("register vs binary expansion", out.register(), expected);
            checks.push(c);
            deviation = Some(dev);
        }
        (PipelineSpec::SorterCoherent { carrier, .. }, PipelineRun::SorterCoherent(out)) => {
            let values = carrier.iter().map(|t| (t.ell as u64, t.amp)).collect::<Vec<_>>();
            let expected = oracle_register_state(&values, &out.demux.register_pairs());
            let (c, dev) = state_check("register vs binary expansion", out.demux.register(), expected);
            checks.push(c);
            deviation = Some(dev);
        }
        (PipelineSpec::SorterQnd { carrier, .. }, PipelineRun::SorterQnd(out)) => {
            let input = carrier_of(carrier)?;
            let support: Vec<u64> = input.modes_on_path(CARRIER_UP).into_iter().map(|m| m.ell as u64).collect();
            checks.push(Check::new(
                "measured value in input support",
                format!("{support:?}"),
                out.value,
                support.contains(&out.value) || out.degenerate,
            ));
            if !out.degenerate {
                let home = PureState::single_photon(CARRIER_UP, 0)?;
                let dev = out.carrier.max_amplitude_deviation(&home);
                checks.push(Check::deviation("carrier returned to |0> on the upper path", dev));
                deviation = Some(dev);
            }
        }
        (PipelineSpec::Adder { n, first, second, .. }, PipelineRun::Arithmetic(out)) => {
            let expected = arithmetic_oracle(out, &operand_values(first, *n)?, &operand_values(second, *n)?, ArithmeticOp::Add);
            let (c, dev) = state_check("operand and sum registers vs N + M", out.registers(), expected);
            checks.push(c);
            deviation = Some(dev);
            if options.exhaustive {
                let summary = exhaustive_sweep(*n, ArithmeticOp::Add)?;
                checks.push(Check::new("exhaustive basis pairs", summary.total, summary.passed, summary.passed == summary.total));
                exhaustive = Some(summary);
            }
        }
        (PipelineSpec::Multiplier { n, first, second }, PipelineRun::Arithmetic(out)) => {
            let fv = operand_values(first, *n)?;
            let sv = operand_values(second, *n)?;
            let expected = arithmetic_oracle(out, &fv, &sv, ArithmeticOp::ScaleShiftComposition);
            let (c, dev) = state_check("registers vs literal block composition", out.registers(), expected);
            checks.push(c);
            deviation = Some(dev);
            let mismatches: Vec<String> = fv
                .iter()
                .flat_map(|&(a, _)| sv.iter().map(move |&(b, _)| (a, b)))
                .filter(|&(a, b)| oracle_arithmetic(a, b, ArithmeticOp::ScaleShiftComposition) != a * b)
                .map(|(a, b)| {
                    format!("{a} x {b} -> {}", oracle_arithmetic(a, b, ArithmeticOp::ScaleShiftComposition))
                })
                .collect();
            let mut product = Check::new("output equals N x M", "N x M", "N x M", true);
            if !mismatches.is_empty() {
                product.observed = mismatches.join(", ");
                product.outcome = CheckOutcome::DocumentedDivergence;
            }
            checks.push(product);
            if options.exhaustive {
                let summary = exhaustive_sweep(*n, ArithmeticOp::ScaleShiftComposition)?;
                checks.push(Check::new("exhaustive basis pairs", summary.total, summary.passed, summary.passed == summary.total));
                exhaustive = Some(summary);
            }
        }
        _ => unreachable!("pipeline spec and run disagree"),
    }

    if let Some(trace) = run.trace() {
        checks.push(vacuum_check(trace));
    }
    checks.extend(tally_checks(p, &run));
    Ok(VerifyReport::new(p.name(), checks, deviation, exhaustive))
}

/// Every basis operand pair of width `n`, checked against `op`.
fn exhaustive_sweep(n: usize, op: ArithmeticOp) -> Result<ExhaustiveSummary, SimError> {
    if n > MAX_EXHAUSTIVE_BITS {
        return Err(SimError::InvalidParameter(format!(
            "exhaustive sweep limited to n <= {MAX_EXHAUSTIVE_BITS}, got {n}"
        )));
    }
    let mut summary = ExhaustiveSummary { passed: 0, total: 0, product_matches: None };
    let mut product_matches = 0;
    for a in 0..1u64 << n {
        for b in 0..1u64 << n {
            let (first, second) = (operand_bits(a, n), operand_bits(b, n));
            let out = match op {
                ArithmeticOp::Add => adder_pipeline(&first, &second, false)?,
                ArithmeticOp::ScaleShiftComposition => multiplier_pipeline(&first, &second)?,
            };
            let expected = oracle_arithmetic(a, b, op);
            let p = out.result_distribution()?.get(&expected).copied().unwrap_or(0.0);
            summary.total += 1;
            if p > 1.0 - VERIFY_TOL && out.trace.vacuum_checks_pass() {
                summary.passed += 1;
            }
            if expected == a * b {
                product_matches += 1;
            }
        }
    }
    if op == ArithmeticOp::ScaleShiftComposition {
        summary.product_matches = Some(product_matches);
    }
    Ok(summary)
}
