use thiserror::Error;

use crate::fock::PathId;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("winding number {ell} exceeds the configured bound {l_max}")]
    EllOutOfRange { ell: i64, l_max: i64 },

    #[error("qubit amplitudes are not normalized (|alpha|^2 + |beta|^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("photon number mismatch: {left} vs {right}")]
    PhotonNumberMismatch { left: u32, right: u32 },

    #[error("state terms do not share one photon number")]
    MixedPhotonNumber,

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("input on paths {q0}/{q1} is not a dual-rail qubit (off-rail probability {off_rail})")]
    InputNotDualRail { q0: PathId, q1: PathId, off_rail: f64 },

    #[error("order violation: {0}")]
    OrderViolation(String),

    #[error("winding number {ell} outside the declared sorter range (M = {max}, {stages} stages)")]
    EllOutOfDeclaredRange { ell: i64, max: u64, stages: u32 },

    #[error("photons on the given paths are entangled with the rest of the state")]
    NotSeparable,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed basis state text {0:?}")]
    ParseBasis(String),

    #[error("element {index}: {source}")]
    AtElement {
        index: usize,
        #[source]
        source: Box<SimError>,
    },
}

impl SimError {
    pub fn at_element(self, index: usize) -> Self {
        SimError::AtElement { index, source: Box::new(self) }
    }
}
