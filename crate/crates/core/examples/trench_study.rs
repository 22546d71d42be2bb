//! Trench-assisted crosstalk suppression: no trench against trenches of
//! 1, 3 and 6 µm at two depressions, all 4 µm outside the core.
//!
//! `cargo run --release --example trench_study` (about 40 s)

use mcf_qkd::bpm::analysis::{crosstalk_study, trench_variants, STUDY_TRENCH_GAP};
use mcf_qkd::bpm::{BpmGrid, FiberCrossSection};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let variants = trench_variants(&FiberCrossSection::default(), &[1.0, 3.0, 6.0], &[0.005, 0.01], STUDY_TRENCH_GAP);
    let reports = crosstalk_study(&variants, 10_000.0, &BpmGrid::default())?;
    let reference = reports[0].worst_crosstalk_db();
    println!("{:<30} {:>12} {:>12}", "variant", "XT (dB)", "vs none (dB)");
    for r in &reports {
        let xt = r.worst_crosstalk_db();
        println!("{:<30} {xt:>12.2} {:>12.2}", r.label, xt - reference);
    }
    Ok(())
}
