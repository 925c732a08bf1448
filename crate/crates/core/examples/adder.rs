//! Add two 3-bit numbers, one of them in uniform superposition.

use oamsim::blocks::{adder_pipeline, operand_bits};
use oamsim::Qubit;

fn main() -> oamsim::Result<()> {
    let out = adder_pipeline(&operand_bits(6, 3), &operand_bits(7, 3), true)?;
    println!("6 + 7 -> {:?}  ({} CNOTs recycled)", out.result_distribution()?, out.trace.tally.cnots);

    let out = adder_pipeline(&operand_bits(3, 3), &[Qubit::plus(); 3], false)?;
    println!("3 + uniform(0..8):");
    for (sum, p) in out.result_distribution()? {
        println!("  {sum:>2}  {p:.4}");
    }
    println!("joint register terms: {}", out.registers()?.len());
    Ok(())
}
