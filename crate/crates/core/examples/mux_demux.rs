//! Encode three qubits into the winding number of one photon, then decode
//! them again, with and without photon recycling.

use oamsim::blocks::{demux_pipeline, mux_pipeline, qubit_product, OrderCheck};
use oamsim::Qubit;

fn main() -> oamsim::Result<()> {
    let qubits = [Qubit::real(0.6, 0.8)?, Qubit::plus(), Qubit::real(0.2f64.sqrt(), 0.8f64.sqrt())?];
    let n = qubits.len();
    for recycle in [false, true] {
        let muxed = mux_pipeline(&qubits, recycle, OrderCheck::Strict)?;
        println!("recycle = {recycle}");
        for (ell, amp) in muxed.carrier_amplitudes()?.iter().enumerate() {
            println!("  |{ell}>  {amp:.4}");
        }
        let out = demux_pipeline(&muxed.carrier()?, n, recycle, OrderCheck::Strict)?;
        let by_channel: Vec<Qubit> = qubits.iter().rev().copied().collect();
        let expected = qubit_product(&by_channel, &out.register_pairs())?;
        println!("  round-trip fidelity {:.12}", out.register()?.fidelity(&expected)?);
        println!("  CNOTs {}", muxed.trace.tally.cnots + out.trace.tally.cnots);
    }
    Ok(())
}
