//! Split a planted metric and gravitino deformation into Weyl,
//! diffeomorphism, supersymmetry, super Weyl and true parts.
//!
//! Run with `cargo run --example deformation_decomposition [fixture.json]`.

use supergeom::cli_reports::{run_decompose, DecomposeFixture};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fixtures/decompose.json").to_string());
    let fx: DecomposeFixture = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let out = run_decompose(&fx, -1.0)?;
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}
