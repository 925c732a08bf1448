//! Merge three dual-rail qubits into one multi-photon path and compare with
//! the closed-form tensor state.

use oamsim::blocks::{combiner_pipeline, OrderCheck};
use oamsim::oracle::oracle_combiner_state;
use oamsim::Qubit;

fn main() -> oamsim::Result<()> {
    let qubits = [Qubit::real(0.6, 0.8)?, Qubit::plus(), Qubit::one()];
    let out = combiner_pipeline(&qubits, OrderCheck::Strict)?;
    println!("output path {}", out.path);
    println!("{}", out.state);
    let expected = oracle_combiner_state(&qubits, out.path)?;
    println!("fidelity with tensor form: {:.12}", out.state.fidelity(&expected)?);
    println!("interferometers: {}, CNOTs: {}", out.trace.tally.interferometers, out.trace.tally.cnots);
    Ok(())
}
