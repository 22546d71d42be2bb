//! Running a JSON configuration through the library, as the `mcf-qkd` binary
//! does, and reading back the primary CSV.
//!
//! `cargo run --example run_config [config.json]`

use mcf_qkd::config::{validate, RunConfig};
use mcf_qkd::run::{run, RunOptions};

const DEFAULT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/psr-sweep.json");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| DEFAULT.into());
    let config = RunConfig::from_json(&std::fs::read_to_string(&path)?)?;
    for d in validate(&config) {
        println!("{d}");
    }
    let out_dir = std::env::temp_dir().join("mcf-qkd-run-config-example");
    let summary = run(&config.clone().with_output_dir(&out_dir), &RunOptions { plot: true })?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    let csv = std::fs::read_to_string(out_dir.join(format!("{}.csv", config.command())))?;
    for line in csv.lines().take(6) {
        println!("  {line}");
    }
    Ok(())
}
