//! Crosstalk from core 0 of the 4-core fiber into its neighbors, with the
//! index map and output intensity written as PGM images.
//!
//! `cargo run --release --example bpm_crosstalk [out-dir]`

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use mcf_qkd::bpm::analysis::measure_crosstalk_field;
use mcf_qkd::bpm::export::{normalized_intensity, write_index_pgm, write_pgm, GrayScale};
use mcf_qkd::bpm::{build_index_map, BpmGrid, FiberCrossSection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "bpm-example".into()));
    std::fs::create_dir_all(&dir)?;
    let xs = FiberCrossSection::default();
    let grid = BpmGrid::default();
    let (report, field) = measure_crosstalk_field(&xs, &grid, 0, 10_000.0)?;
    println!("{} at {} mm, n_eff = {:.6}", report.label, report.distance * 1e-3, report.effective_index);
    for (k, db) in report.crosstalk_db.iter().enumerate() {
        if let Some(db) = db {
            println!("  core 0 -> core {k}: {db:.2} dB (disk fraction {:.3e})", report.core_fractions[k]);
        }
    }
    println!("  absorbed fraction {:.2e}", report.absorbed_fraction);

    let map = build_index_map(&xs, &grid)?;
    write_index_pgm(BufWriter::new(File::create(dir.join("index.pgm"))?), &map)?;
    let intensity = normalized_intensity(&field, 1.0);
    let scale = GrayScale::Decibel { floor_db: -120.0 };
    write_pgm(BufWriter::new(File::create(dir.join("intensity.pgm"))?), grid.nx, grid.ny, &intensity, scale)?;
    println!("images written to {}", dir.display());
    Ok(())
}
