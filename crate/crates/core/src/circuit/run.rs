use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blocks::{
    adder_pipeline, carrier_state, combiner_pipeline_with_plan, demux_pipeline_with_plan,
    multiplier_pipeline, mux_pipeline_with_plan, operand_bits, register_distribution,
    sorter_coherent, sorter_qnd, ArithmeticOutput, ChannelPlan, CombinerOutput, DemuxOutput,
    MuxOutput, QndSorterOutput, SorterOutput, Trace, CARRIER_DOWN,
};
use crate::elements::{assert_vacuum, qnd_measure_path, ElementKind, GateTally, VacuumCheck, VACUUM_TOL};
use crate::error::SimError;
use crate::fock::{PathId, PureState, Qubit, QubitSpec, StateEntry};

use super::{CarrierTerm, CircuitError, CircuitSpec, ElementOp, InitialSpec, Operand, PipelineSpec, QubitAmps};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overrides the seed stored in the circuit file.
    pub seed: Option<u64>,
    /// Record wall-clock duration. Off by default so that reports for equal
    /// inputs are byte-identical.
    pub timing: bool,
}

/// Outcome of one QND measurement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QndRecord {
    /// Index into the element list, for element circuits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<usize>,
    /// Stage number, for the QND sorter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<u32>,
    pub path: PathId,
    pub bit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub kind: String,
    /// Channels, operand bits or sorter stages.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<u32>,
    /// Where the combined photons end up (combiner).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathId>,
    /// Output qubit rails `(|0>, |1>)`, least significant first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub register: Vec<(PathId, PathId)>,
    /// Probability of each integer read from `register`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<BTreeMap<u64, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub seed: u64,
    pub photons: u32,
    pub norm: f64,
    /// Final state in canonical basis order.
    pub state: Vec<StateEntry>,
    pub vacuum_checks: Vec<VacuumCheck>,
    pub qnd: Vec<QndRecord>,
    pub tally: GateTally,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<f64>,
}

impl RunReport {
    pub fn vacuum_checks_pass(&self) -> bool {
        self.vacuum_checks.iter().all(|c| c.passed)
    }

    pub fn final_state(&self) -> Result<PureState, SimError> {
        PureState::from_entries(&self.state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Result of a named pipeline, kept whole for verification.
#[derive(Debug, Clone)]
pub(crate) enum PipelineRun {
    Combiner(CombinerOutput),
    Mux(MuxOutput),
    Demux(DemuxOutput),
    SorterCoherent(SorterOutput),
    SorterQnd(QndSorterOutput),
    Arithmetic(ArithmeticOutput),
}

pub(crate) fn qubits_of(amps: &[QubitAmps]) -> Result<Vec<Qubit>, SimError> {
    amps.iter().map(QubitAmps::qubit).collect()
}

pub(crate) fn carrier_of(terms: &[CarrierTerm]) -> Result<PureState, SimError> {
    let pairs: Vec<_> = terms.iter().map(|t| (t.ell, t.amp)).collect();
    carrier_state(&pairs)
}

fn operand_qubits(op: &Operand, n: usize) -> Result<Vec<Qubit>, SimError> {
    match op {
        Operand::Value(v) => Ok(operand_bits(*v, n)),
        Operand::Qubits(q) => qubits_of(q),
    }
}

fn plan(n: usize, ascending: bool, order: &Option<Vec<usize>>) -> ChannelPlan {
    let plan = ChannelPlan::standard(n);
    let plan = if ascending { plan.ascending() } else { plan };
    match order {
        Some(o) => plan.with_order(o.clone()),
        None => plan,
    }
}

pub(crate) fn execute_pipeline(p: &PipelineSpec, seed: u64) -> Result<PipelineRun, SimError> {
    Ok(match p {
        PipelineSpec::Combiner { qubits, order_check, channel_order } => PipelineRun::Combiner(
            combiner_pipeline_with_plan(&qubits_of(qubits)?, plan(qubits.len(), false, channel_order), *order_check)?,
        ),
        PipelineSpec::Mux { qubits, recycle_first, order_check, channel_order } => {
            PipelineRun::Mux(mux_pipeline_with_plan(
                &qubits_of(qubits)?,
                plan(qubits.len(), false, channel_order),
                *recycle_first,
                *order_check,
            )?)
        }
        PipelineSpec::Demux { n, carrier, recycle_last, order_check, channel_order } => {
            PipelineRun::Demux(demux_pipeline_with_plan(
                &carrier_of(carrier)?,
                plan(*n, true, channel_order),
                *recycle_last,
                *order_check,
            )?)
        }
        PipelineSpec::SorterCoherent { max_ell, carrier } => {
            PipelineRun::SorterCoherent(sorter_coherent(&carrier_of(carrier)?, *max_ell)?)
        }
        PipelineSpec::SorterQnd { max_ell, carrier } => {
            PipelineRun::SorterQnd(sorter_qnd(&carrier_of(carrier)?, *max_ell, seed)?)
        }
        PipelineSpec::Adder { n, first, second, recycle } => PipelineRun::Arithmetic(adder_pipeline(
            &operand_qubits(first, *n)?,
            &operand_qubits(second, *n)?,
            *recycle,
        )?),
        PipelineSpec::Multiplier { n, first, second } => PipelineRun::Arithmetic(multiplier_pipeline(
            &operand_qubits(first, *n)?,
            &operand_qubits(second, *n)?,
        )?),
    })
}

impl PipelineRun {
    pub(crate) fn state(&self) -> &PureState {
        match self {
            PipelineRun::Combiner(o) => &o.state,
            PipelineRun::Mux(o) => &o.state,
            PipelineRun::Demux(o) => &o.state,
            PipelineRun::SorterCoherent(o) => &o.demux.state,
            PipelineRun::SorterQnd(o) => &o.carrier,
            PipelineRun::Arithmetic(o) => &o.state,
        }
    }

    pub(crate) fn tally(&self) -> &GateTally {
        match self {
            PipelineRun::SorterQnd(o) => &o.tally,
            _ => &self.trace().expect("every other pipeline keeps a trace").tally,
        }
    }

    pub(crate) fn trace(&self) -> Option<&Trace> {
        match self {
            PipelineRun::Combiner(o) => Some(&o.trace),
            PipelineRun::Mux(o) => Some(&o.trace),
            PipelineRun::Demux(o) => Some(&o.trace),
            PipelineRun::SorterCoherent(o) => Some(&o.demux.trace),
            PipelineRun::SorterQnd(_) => None,
            PipelineRun::Arithmetic(o) => Some(&o.trace),
        }
    }

    fn summary(&self, kind: &str) -> PipelineSummary {
        let mut s = PipelineSummary {
            kind: kind.into(),
            n: 0,
            stages: None,
            output_path: None,
            register: Vec::new(),
            distribution: None,
            value: None,
        };
        match self {
            PipelineRun::Combiner(o) => {
                s.n = o.plan.n();
                s.output_path = Some(o.path);
            }
            PipelineRun::Mux(o) => s.n = o.plan.n(),
            PipelineRun::Demux(o) => {
                s.n = o.plan.n();
                s.register = o.register_pairs();
                s.distribution = register_distribution(&o.state, &s.register).ok();
            }
            PipelineRun::SorterCoherent(o) => {
                s.n = o.stages as usize;
                s.stages = Some(o.stages);
                s.register = o.demux.register_pairs();
                s.distribution = register_distribution(&o.demux.state, &s.register).ok();
            }
            PipelineRun::SorterQnd(o) => {
                s.n = o.stages as usize;
                s.stages = Some(o.stages);
                s.value = Some(o.value);
            }
            PipelineRun::Arithmetic(o) => {
                s.n = o.n;
                s.register = o.result_pairs.clone();
                s.distribution = o.result_distribution().ok();
            }
        }
        s
    }
}

struct ElementRun {
    state: PureState,
    tally: GateTally,
    vacuum_checks: Vec<VacuumCheck>,
    qnd: Vec<QndRecord>,
}

fn initial_state(spec: &CircuitSpec) -> Result<PureState, SimError> {
    spec.initial.iter().try_fold(PureState::vacuum(), |acc, init| {
        let factor = match init {
            InitialSpec::Photon { path, ell } => PureState::single_photon(*path, *ell)?,
            InitialSpec::Qubit { alpha, beta, path_zero, path_one } => {
                PureState::qubit(&QubitSpec::new(*alpha, *beta, *path_zero, *path_one)?)?
            }
            InitialSpec::State { terms } => PureState::from_entries(terms)?,
        };
        Ok(acc.tensor(&factor))
    })
}

fn run_elements(spec: &CircuitSpec, seed: u64) -> Result<ElementRun, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut run = ElementRun {
        state: initial_state(spec)?,
        tally: GateTally::default(),
        vacuum_checks: Vec::new(),
        qnd: Vec::new(),
    };
    for (index, e) in spec.elements.iter().enumerate() {
        match e.op {
            ElementOp::AssertVacuum { path, tol } => {
                let mut check = assert_vacuum(&run.state, path, tol.unwrap_or(VACUUM_TOL));
                check.label = e.label.clone();
                run.tally.record(ElementKind::AssertVacuum);
                run.vacuum_checks.push(check);
            }
            ElementOp::Qnd { path } => {
                let (bit, s) = qnd_measure_path(&run.state, path, &mut rng).map_err(|err| err.at_element(index))?;
                run.state = s;
                run.tally.record(ElementKind::Qnd);
                run.qnd.push(QndRecord { element: Some(index), stage: None, path, bit });
            }
            ref op => {
                let element = op.element().expect("unitary element");
                run.state = element.apply_tallied(&run.state, &mut run.tally).map_err(|err| err.at_element(index))?;
            }
        }
        if let Some(label) = &e.label {
            run.tally.record_label(label);
        }
    }
    Ok(run)
}

/// Runs a parsed circuit. Equal `(spec, seed)` pairs give equal reports.
pub fn run_circuit(spec: &CircuitSpec, options: RunOptions) -> Result<RunReport, CircuitError> {
    spec.validate()?;
    let seed = options.seed.or(spec.seed).unwrap_or(0);
    let start = Instant::now();
    let mut report = match &spec.pipeline {
        Some(p) => {
            let run = execute_pipeline(p, seed)?;
            let state = run.state();
            let qnd = match &run {
                PipelineRun::SorterQnd(o) => o
                    .bits
                    .iter()
                    .enumerate()
                    .map(|(i, &bit)| QndRecord { element: None, stage: Some(i as u32), path: CARRIER_DOWN, bit })
                    .collect(),
                _ => Vec::new(),
            };
            RunReport {
                version: spec.version.clone(),
                seed,
                photons: state.photon_number(),
                norm: state.norm(),
                state: state.entries(),
                vacuum_checks: run.trace().map(|t| t.vacuum_checks.clone()).unwrap_or_default(),
                qnd,
                tally: run.tally().clone(),
                pipeline: Some(run.summary(p.name())),
                duration_ms: None,
            }
        }
        None => {
            let run = run_elements(spec, seed)?;
            RunReport {
                version: spec.version.clone(),
                seed,
                photons: run.state.photon_number(),
                norm: run.state.norm(),
                state: run.state.entries(),
                vacuum_checks: run.vacuum_checks,
                qnd: run.qnd,
                tally: run.tally,
                pipeline: None,
                duration_ms: None,
            }
        }
    };
    if options.timing {
        report.duration_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}
