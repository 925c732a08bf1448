//! Sort a superposition of winding numbers coherently and by repeated QND
//! parity measurements.

use num_complex::Complex64 as C64;
use oamsim::blocks::{carrier_state, register_distribution, sorter_coherent, sorter_qnd};

fn main() -> oamsim::Result<()> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let carrier = carrier_state(&[(5, C64::new(h, 0.0)), (10, C64::new(0.0, h))])?;

    let out = sorter_coherent(&carrier, 15)?;
    let dist = register_distribution(&out.demux.register()?, &out.demux.register_pairs())?;
    println!("coherent sorter, {} stages: {dist:?}", out.stages);

    for seed in 0..4 {
        let q = sorter_qnd(&carrier, 15, seed)?;
        println!("qnd seed {seed}: bits {:?} -> {}", q.bits, q.value);
    }
    Ok(())
}
