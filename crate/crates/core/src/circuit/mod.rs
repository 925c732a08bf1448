//! JSON circuit files, the runner behind `oamsim run`, and oracle-backed
//! verification.
//!
//! A circuit file either lists initial photons and an element sequence over
//! declared paths, or names one pipeline with its parameters:
//!
//! ```json
//! {
//!   "version": "oamsim/1",
//!   "paths": [0, 1],
//!   "initial": [{ "kind": "photon", "path": 0, "ell": 3 }],
//!   "elements": [
//!     { "kind": "bs", "path_up": 0, "path_down": 1 },
//!     { "kind": "arm_phase", "path": 1, "alpha": { "pi_over": 4 } },
//!     { "kind": "bs", "path_up": 0, "path_down": 1, "label": "out" },
//!     { "kind": "assert_vacuum", "path": 1 }
//!   ],
//!   "seed": 7
//! }
//! ```

use std::collections::BTreeSet;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::blocks::OrderCheck;
use crate::elements::{Angle, Element};
use crate::error::SimError;
use crate::fock::{PathId, Qubit, StateEntry};

mod run;
mod verify;

pub use run::{run_circuit, PipelineSummary, QndRecord, RunOptions, RunReport};
pub use verify::{
    tally, verify, Check, CheckOutcome, ExhaustiveSummary, TallyReport, VerifyOptions, VerifyReport, VerifyStatus,
};

pub const SCHEMA_VERSION: &str = "oamsim/1";
/// Largest channel count accepted from a file; a MUX of `n` channels spans
/// `2^n` carrier amplitudes.
pub const MAX_CHANNELS: usize = 12;
/// Largest sorter range accepted from a file.
pub const MAX_SORTER_RANGE: u64 = 1 << MAX_CHANNELS;

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("unknown element kind {kind:?} at elements[{index}]")]
    UnknownElement { index: usize, kind: String },

    #[error("path {path} referenced by {context} is not declared")]
    UndeclaredPath { path: PathId, context: String },

    #[error("unsupported circuit version {found:?} (expected {SCHEMA_VERSION:?})")]
    VersionMismatch { found: String },

    #[error("no oracle for this circuit: {0}")]
    NoOracleForCircuit(String),

    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CircuitError {
    fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        CircuitError::Schema { location: location.into(), message: message.into() }
    }
}

/// A complex number written as a bare real or as `[re, im]`.
mod complex {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        Repr::Pair([c.re, c.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(re) => C64::new(re, 0.0),
            Repr::Pair([re, im]) => C64::new(re, im),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSpec {
    pub version: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<PathId>,
    /// Factors of the initial product state.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<InitialSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub elements: Vec<ElementSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Photon {
        path: PathId,
        #[serde(default)]
        ell: i64,
    },
    Qubit {
        #[serde(with = "complex")]
        alpha: C64,
        #[serde(with = "complex")]
        beta: C64,
        path_zero: PathId,
        path_one: PathId,
    },
    /// Arbitrary normalized state in canonical text form.
    State { terms: Vec<StateEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    #[serde(flatten)]
    pub op: ElementOp,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

pub const ELEMENT_KINDS: [&str; 9] =
    ["hologram", "dove", "flip", "bs", "arm_phase", "cnot", "scale", "assert_vacuum", "qnd"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementOp {
    Hologram {
        path: PathId,
        delta_ell: i64,
    },
    Dove {
        path: PathId,
        alpha: Angle,
    },
    Flip {
        path: PathId,
    },
    #[serde(rename = "bs")]
    Beamsplitter {
        path_up: PathId,
        path_down: PathId,
    },
    ArmPhase {
        path: PathId,
        alpha: Angle,
    },
    Cnot {
        control: PathId,
        target_a: PathId,
        target_b: PathId,
    },
    Scale {
        path: PathId,
        factor: i64,
    },
    AssertVacuum {
        path: PathId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    Qnd {
        path: PathId,
    },
}

impl ElementOp {
    pub fn paths(&self) -> Vec<PathId> {
        match *self {
            ElementOp::Hologram { path, .. }
            | ElementOp::Dove { path, .. }
            | ElementOp::Flip { path }
            | ElementOp::ArmPhase { path, .. }
            | ElementOp::Scale { path, .. }
            | ElementOp::AssertVacuum { path, .. }
            | ElementOp::Qnd { path } => vec![path],
            ElementOp::Beamsplitter { path_up, path_down } => vec![path_up, path_down],
            ElementOp::Cnot { control, target_a, target_b } => vec![control, target_a, target_b],
        }
    }

    /// The unitary element, or `None` for detector directives.
    pub fn element(&self) -> Option<Element> {
        Some(match *self {
            ElementOp::Hologram { path, delta_ell } => Element::Hologram { path, delta_ell },
            ElementOp::Dove { path, alpha } => Element::DovePrism { path, alpha },
            ElementOp::Flip { path } => Element::OamFlip { path },
            ElementOp::Beamsplitter { path_up, path_down } => Element::Beamsplitter { path_up, path_down },
            ElementOp::ArmPhase { path, alpha } => Element::ArmPhase { path, alpha },
            ElementOp::Cnot { control, target_a, target_b } => {
                Element::DualRailCnot { control, target_a, target_b }
            }
            ElementOp::Scale { path, factor } => Element::OamScale { path, factor },
            ElementOp::AssertVacuum { .. } | ElementOp::Qnd { .. } => return None,
        })
    }
}

/// Qubit amplitudes without paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitAmps {
    #[serde(with = "complex")]
    pub alpha: C64,
    #[serde(with = "complex")]
    pub beta: C64,
}

impl QubitAmps {
    pub fn qubit(&self) -> Result<Qubit, SimError> {
        Qubit::new(self.alpha, self.beta)
    }
}

impl From<Qubit> for QubitAmps {
    fn from(q: Qubit) -> Self {
        QubitAmps { alpha: q.alpha, beta: q.beta }
    }
}

/// One term `amp |ell>` of a carrier photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierTerm {
    pub ell: i64,
    #[serde(with = "complex")]
    pub amp: C64,
}

/// An arithmetic operand: an integer in the computational basis, or one
/// qubit per bit, most significant first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Operand {
    Value(u64),
    Qubits(Vec<QubitAmps>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PipelineSpec {
    Combiner {
        /// Most significant channel first.
        qubits: Vec<QubitAmps>,
        #[serde(default, skip_serializing_if = "is_default")]
        order_check: OrderCheck,
        /// Channel processing order; defaults to most significant first.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        channel_order: Option<Vec<usize>>,
    },
    Mux {
        qubits: Vec<QubitAmps>,
        #[serde(default, skip_serializing_if = "is_default")]
        recycle_first: bool,
        #[serde(default, skip_serializing_if = "is_default")]
        order_check: OrderCheck,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        channel_order: Option<Vec<usize>>,
    },
    Demux {
        n: usize,
        carrier: Vec<CarrierTerm>,
        #[serde(default, skip_serializing_if = "is_default")]
        recycle_last: bool,
        #[serde(default, skip_serializing_if = "is_default")]
        order_check: OrderCheck,
        /// Defaults to least significant first.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        channel_order: Option<Vec<usize>>,
    },
    SorterCoherent {
        max_ell: u64,
        carrier: Vec<CarrierTerm>,
    },
    SorterQnd {
        max_ell: u64,
        carrier: Vec<CarrierTerm>,
    },
    Adder {
        n: usize,
        first: Operand,
        second: Operand,
        #[serde(default, skip_serializing_if = "is_default")]
        recycle: bool,
    },
    Multiplier {
        n: usize,
        first: Operand,
        second: Operand,
    },
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

impl PipelineSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PipelineSpec::Combiner { .. } => "combiner",
            PipelineSpec::Mux { .. } => "mux",
            PipelineSpec::Demux { .. } => "demux",
            PipelineSpec::SorterCoherent { .. } => "sorter_coherent",
            PipelineSpec::SorterQnd { .. } => "sorter_qnd",
            PipelineSpec::Adder { .. } => "adder",
            PipelineSpec::Multiplier { .. } => "multiplier",
        }
    }

    fn validate(&self) -> Result<(), CircuitError> {
        let channels = |n: usize, field: &str| {
            if n == 0 || n > MAX_CHANNELS {
                Err(CircuitError::schema(
                    format!("pipeline.{field}"),
                    format!("channel count {n} outside 1..={MAX_CHANNELS}"),
                ))
            } else {
                Ok(())
            }
        };
        let operand = |op: &Operand, n: usize, field: &str| match op {
            Operand::Value(v) if n < 64 && *v >> n != 0 => Err(CircuitError::schema(
                format!("pipeline.{field}"),
                format!("{v} does not fit in {n} bits"),
            )),
            Operand::Qubits(q) if q.len() != n => Err(CircuitError::schema(
                format!("pipeline.{field}"),
                format!("{} qubits given for n = {n}", q.len()),
            )),
            _ => Ok(()),
        };
        match self {
            PipelineSpec::Combiner { qubits, .. } | PipelineSpec::Mux { qubits, .. } => {
                channels(qubits.len(), "qubits")
            }
            PipelineSpec::Demux { n, .. } => channels(*n, "n"),
            PipelineSpec::SorterCoherent { max_ell, .. } | PipelineSpec::SorterQnd { max_ell, .. } => {
                if *max_ell == 0 || *max_ell > MAX_SORTER_RANGE {
                    Err(CircuitError::schema(
                        "pipeline.max_ell",
                        format!("sorter range {max_ell} outside 1..={MAX_SORTER_RANGE}"),
                    ))
                } else {
                    Ok(())
                }
            }
            PipelineSpec::Adder { n, first, second, .. } | PipelineSpec::Multiplier { n, first, second } => {
                channels(*n, "n")?;
                operand(first, *n, "first")?;
                operand(second, *n, "second")
            }
        }
    }
}

/// Parses and validates a circuit file.
pub fn parse_circuit(text: &str) -> Result<CircuitSpec, CircuitError> {
    let value: Value = serde_json::from_str(text).map_err(json_error)?;
    prescan(&value)?;
    let spec: CircuitSpec = serde_json::from_str(text).map_err(json_error)?;
    spec.validate()?;
    Ok(spec)
}

/// Pretty JSON that [`parse_circuit`] reads back to an equal spec.
pub fn serialize_circuit(spec: &CircuitSpec) -> String {
    serde_json::to_string_pretty(spec).expect("circuit specs always serialize")
}

fn json_error(e: serde_json::Error) -> CircuitError {
    CircuitError::schema(format!("line {}, column {}", e.line(), e.column()), e.to_string())
}

/// Checks that need the raw document: the version tag and element kinds.
fn prescan(value: &Value) -> Result<(), CircuitError> {
    let Some(obj) = value.as_object() else {
        return Err(CircuitError::schema("document", "expected a JSON object"));
    };
    match obj.get("version") {
        Some(Value::String(v)) if v == SCHEMA_VERSION => {}
        Some(Value::String(v)) => return Err(CircuitError::VersionMismatch { found: v.clone() }),
        Some(other) => return Err(CircuitError::VersionMismatch { found: other.to_string() }),
        None => return Err(CircuitError::schema("version", "missing version tag")),
    }
    if let Some(Value::Array(elements)) = obj.get("elements") {
        for (index, e) in elements.iter().enumerate() {
            match e.get("kind") {
                Some(Value::String(k)) if ELEMENT_KINDS.contains(&k.as_str()) => {}
                Some(Value::String(k)) => {
                    return Err(CircuitError::UnknownElement { index, kind: k.clone() })
                }
                _ => {
                    return Err(CircuitError::schema(
                        format!("elements[{index}].kind"),
                        "missing or non-string element kind",
                    ))
                }
            }
        }
    }
    Ok(())
}

impl CircuitSpec {
    /// A spec for `pipeline` with nothing else set.
    pub fn for_pipeline(pipeline: PipelineSpec) -> Self {
        CircuitSpec {
            version: SCHEMA_VERSION.into(),
            paths: Vec::new(),
            initial: Vec::new(),
            elements: Vec::new(),
            pipeline: Some(pipeline),
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.version != SCHEMA_VERSION {
            return Err(CircuitError::VersionMismatch { found: self.version.clone() });
        }
        let mut declared = BTreeSet::new();
        for &p in &self.paths {
            if !declared.insert(p) {
                return Err(CircuitError::schema("paths", format!("path {p} declared twice")));
            }
        }
        if let Some(pipeline) = &self.pipeline {
            if !self.initial.is_empty() || !self.elements.is_empty() {
                return Err(CircuitError::schema(
                    "pipeline",
                    "a pipeline lays out its own paths; drop initial and elements",
                ));
            }
            return pipeline.validate();
        }
        let check = |p: PathId, context: String| {
            if declared.contains(&p) {
                Ok(())
            } else {
                Err(CircuitError::UndeclaredPath { path: p, context })
            }
        };
        for (i, init) in self.initial.iter().enumerate() {
            match init {
                InitialSpec::Photon { path, .. } => check(*path, format!("initial[{i}]"))?,
                InitialSpec::Qubit { path_zero, path_one, .. } => {
                    check(*path_zero, format!("initial[{i}]"))?;
                    check(*path_one, format!("initial[{i}]"))?;
                }
                InitialSpec::State { terms } => {
                    for t in terms {
                        let basis: crate::fock::BasisState = t.basis.parse()?;
                        for (m, _) in basis.occupations() {
                            check(m.path, format!("initial[{i}]"))?;
                        }
                    }
                }
            }
        }
        for (i, e) in self.elements.iter().enumerate() {
            for p in e.op.paths() {
                check(p, format!("elements[{i}]"))?;
            }
            if let Some(el) = e.op.element() {
                el.validate().map_err(|err| CircuitError::schema(format!("elements[{i}]"), err.to_string()))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"version": "oamsim/1", "paths": [0], "initial": [{"kind": "photon", "path": 0}]}"#;

    #[test]
    fn minimal_spec() {
        let spec = parse_circuit(MINIMAL).unwrap();
        assert_eq!(spec.paths, vec![PathId(0)]);
        assert_eq!(spec.initial, vec![InitialSpec::Photon { path: PathId(0), ell: 0 }]);
        assert!(spec.elements.is_empty());
    }

    #[test]
    fn undeclared_path_is_named() {
        let text = r#"{"version": "oamsim/1", "paths": [0],
            "initial": [{"kind": "photon", "path": 0}],
            "elements": [{"kind": "hologram", "path": 5, "delta_ell": 1}]}"#;
        match parse_circuit(text) {
            Err(CircuitError::UndeclaredPath { path, context }) => {
                assert_eq!(path, PathId(5));
                assert_eq!(context, "elements[0]");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_element_and_version() {
        let text = r#"{"version": "oamsim/1", "paths": [0], "elements": [{"kind": "lens", "path": 0}]}"#;
        assert!(matches!(parse_circuit(text), Err(CircuitError::UnknownElement { index: 0, .. })));
        let text = r#"{"version": "oamsim/9"}"#;
        assert!(matches!(parse_circuit(text), Err(CircuitError::VersionMismatch { .. })));
    }

    #[test]
    fn schema_errors_carry_position() {
        let text = "{\"version\": \"oamsim/1\",\n \"paths\": [0],\n \"seed\": \"x\"}";
        match parse_circuit(text) {
            Err(CircuitError::Schema { location, .. }) => assert!(location.starts_with("line 3"), "{location}"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_circuit("[1, 2"), Err(CircuitError::Schema { .. })));
    }

    #[test]
    fn mux_pipeline_spec() {
        let text = r#"{"version": "oamsim/1", "pipeline": {"kind": "mux",
            "qubits": [{"alpha": 1, "beta": 0}, {"alpha": 0, "beta": [1, 0]}, {"alpha": 0.6, "beta": [0, 0.8]}]}}"#;
        let spec = parse_circuit(text).unwrap();
        let Some(PipelineSpec::Mux { qubits, recycle_first, .. }) = &spec.pipeline else {
            panic!("not a mux");
        };
        assert_eq!(qubits.len(), 3);
        assert!(!recycle_first);
        assert_eq!(qubits[2].beta, C64::new(0.0, 0.8));
        assert_eq!(parse_circuit(&serialize_circuit(&spec)).unwrap(), spec);
    }

    #[test]
    fn channel_guard() {
        let qubits = vec![r#"{"alpha": 1, "beta": 0}"#; 13].join(",");
        let text = format!(r#"{{"version": "oamsim/1", "pipeline": {{"kind": "mux", "qubits": [{qubits}]}}}}"#);
        assert!(matches!(parse_circuit(&text), Err(CircuitError::Schema { .. })));
    }

    #[test]
    fn angle_forms() {
        let text = r#"{"version": "oamsim/1", "paths": [0], "elements": [
            {"kind": "dove", "path": 0, "alpha": {"pi_over": 4}},
            {"kind": "dove", "path": 0, "alpha": {"pi": [3, 8]}},
            {"kind": "arm_phase", "path": 0, "alpha": 0.25, "label": "tweak"}]}"#;
        let spec = parse_circuit(text).unwrap();
        assert_eq!(spec.elements[0].op, ElementOp::Dove { path: PathId(0), alpha: Angle::pi_over(4) });
        assert_eq!(
            spec.elements[1].op,
            ElementOp::Dove { path: PathId(0), alpha: Angle::PiRational { num: 3, den: 8 } }
        );
        assert_eq!(spec.elements[2].label.as_deref(), Some("tweak"));
        assert_eq!(parse_circuit(&serialize_circuit(&spec)).unwrap(), spec);
        let bad = r#"{"version": "oamsim/1", "paths": [0], "elements": [{"kind": "dove", "path": 0, "alpha": {"pi_over": 0}}]}"#;
        assert!(parse_circuit(bad).is_err());
    }
}
