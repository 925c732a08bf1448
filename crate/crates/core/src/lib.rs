//! Simulation of orbital-angular-momentum (OAM) photonic multiplexing circuits.
//!
//! States are sparse superpositions of Fock basis elements over
//! `(path, ell)` modes ([`fock`]). Primitive optical elements ([`elements`])
//! compose into the circuit blocks of [`blocks`]: the sorting
//! interferometer, the qubit combiner, the single-photon MUX/DEMUX, OAM
//! sorters and OAM-domain arithmetic. [`oracle`] holds closed-form reference
//! results and [`circuit`] the JSON circuit format and runner behind the
//! `oamsim` binary.

pub mod blocks;
pub mod circuit;
pub mod elements;
pub mod error;
pub mod fock;
pub mod oracle;
pub mod random;

pub use error::{Result, SimError};
pub use fock::{BasisState, Mode, PathId, PureState, Qubit, QubitSpec};
