//! Parse a circuit file, run it and verify it against its oracle.
//!
//! cargo run --example circuit_file -- crates/core/circuits/adder.json

use oamsim::circuit::{parse_circuit, run_circuit, verify, RunOptions, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/circuits/mux3.json").to_string());
    let spec = parse_circuit(&std::fs::read_to_string(&path)?)?;
    let report = run_circuit(&spec, RunOptions::default())?;
    println!("{}", report.to_json());
    if spec.pipeline.is_some() {
        let v = verify(&spec, VerifyOptions::default())?;
        println!("verify: {:?}, max deviation {:?}", v.status, v.max_deviation);
    }
    Ok(())
}
