//! Multiply by composing OAM scaling with shifted additions.
//!
//! For a single set bit of the second operand this gives the product. For
//! several set bits the scalings compose, so 3 x 3 yields 3 * 2^(0+1) = 6.

use oamsim::blocks::{multiplier_pipeline, operand_bits};
use oamsim::oracle::{oracle_arithmetic, ArithmeticOp};

fn main() -> oamsim::Result<()> {
    for (a, b) in [(5, 1), (5, 2), (3, 4), (3, 3), (2, 3)] {
        let out = multiplier_pipeline(&operand_bits(a, 3), &operand_bits(b, 3))?;
        let literal = oracle_arithmetic(a, b, ArithmeticOp::ScaleShiftComposition);
        println!(
            "{a} x {b}: circuit {:?}, composition {literal}, product {}",
            out.result_distribution()?.keys().collect::<Vec<_>>(),
            a * b
        );
    }
    Ok(())
}
