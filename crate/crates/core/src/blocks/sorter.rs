//! OAM sorters with a logarithmic number of stages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elements::{apply_path_swap, qnd_measure_path, Element, ElementKind, GateTally};
use crate::error::{Result, SimError};
use crate::fock::PureState;
use crate::oracle::ceil_log2;

use super::{demux_pipeline, pow2, sorting_interferometer, DemuxOutput, OrderCheck, Trace, CARRIER_DOWN, CARRIER_UP};

/// Stage count for winding numbers `0..=max_ell`, after checking that every
/// occupied `ell` of `carrier` fits.
fn stages_for(carrier: &PureState, max_ell: u64) -> Result<u32> {
    if max_ell == 0 {
        return Err(SimError::InvalidParameter("sorter needs M >= 1".into()));
    }
    let stages = ceil_log2(max_ell);
    for path in carrier.occupied_paths() {
        if path != CARRIER_UP {
            return Err(SimError::InvalidParameter(format!(
                "sorter input must be a single photon on path {CARRIER_UP}, found path {path}"
            )));
        }
    }
    if carrier.photon_number() > 1 {
        return Err(SimError::InvalidParameter("sorter input must be a single photon".into()));
    }
    for m in carrier.modes_on_path(CARRIER_UP) {
        let fits = m.ell >= 0 && (m.ell as u64) <= max_ell && (m.ell as u64) < (1u64 << stages);
        if !fits {
            return Err(SimError::EllOutOfDeclaredRange { ell: m.ell, max: max_ell, stages });
        }
    }
    Ok(stages)
}

#[derive(Debug, Clone)]
pub struct SorterOutput {
    pub stages: u32,
    pub demux: DemuxOutput,
}

/// Coherent sorter: a DEMUX with `ceil(log2 M)` blocks writes the winding
/// number of the input photon into qubits, keeping superpositions.
///
/// `0 <= ell <= M` is required, and `ell` must also fit in the stage count,
/// which excludes `ell = M` when `M` is a power of two.
pub fn sorter_coherent(carrier: &PureState, max_ell: u64) -> Result<SorterOutput> {
    let stages = stages_for(carrier, max_ell)?;
    let demux = demux_pipeline(carrier, stages as usize, false, OrderCheck::Strict)?;
    Ok(SorterOutput { stages, demux })
}

#[derive(Debug, Clone, Serialize)]
pub struct QndSorterOutput {
    /// Measured parity bits, least significant first.
    pub bits: Vec<bool>,
    pub value: u64,
    pub carrier: PureState,
    pub tally: GateTally,
    pub stages: u32,
    /// The input held no photon, so every bit reads 0 without information.
    pub degenerate: bool,
    pub seed: u64,
}

/// Projective sorter: each stage's parity is read by a QND measurement of the
/// interferometer's lower port, and a classical switch steers the photon back.
pub fn sorter_qnd(carrier: &PureState, max_ell: u64, seed: u64) -> Result<QndSorterOutput> {
    let stages = stages_for(carrier, max_ell)?;
    let (u, d) = (CARRIER_UP, CARRIER_DOWN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::default();
    let mut s = carrier.clone();
    let mut bits = Vec::with_capacity(stages as usize);
    for i in 0..stages as usize {
        let shift = pow2(i)?;
        s = sorting_interferometer(&s, u, d, shift, &mut trace)?;
        let (bit, collapsed) = qnd_measure_path(&s, d, &mut rng)?;
        trace.tally.record(ElementKind::Qnd);
        s = collapsed;
        if bit {
            s = trace.apply(&s, Element::Hologram { path: d, delta_ell: -shift })?;
            s = apply_path_swap(&s, u, d);
            trace.tally.record(ElementKind::ClassicalSwitch);
        }
        bits.push(bit);
    }
    let value = bits.iter().enumerate().map(|(i, &b)| (b as u64) << i).sum();
    Ok(QndSorterOutput {
        bits,
        value,
        carrier: s,
        tally: trace.tally,
        stages,
        degenerate: carrier.photon_number() == 0,
        seed,
    })
}
