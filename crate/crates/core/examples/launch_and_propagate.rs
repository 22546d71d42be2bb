//! Launching the fundamental mode of one core and following the power as it
//! propagates, plus a free-space Gaussian beam as a sanity check.
//!
//! `cargo run --release --example launch_and_propagate`

use mcf_qkd::bpm::{build_index_map, core_powers, launch_mode, propagate, BpmGrid, ComplexField, FiberCrossSection, IndexMap};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // free space: the 1/e² radius grows by sqrt(2) over one Rayleigh range
    let grid = BpmGrid::square(256, 0.5).with_absorber(0.0).with_dz(2.0);
    let (w0, n) = (6.0, grid.reference_index);
    let zr = std::f64::consts::PI * w0 * w0 * n / grid.wavelength;
    let mut beam = ComplexField::from_fn(&grid, |x, y| Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0));
    beam.normalize()?;
    let out = propagate(&beam, &IndexMap::uniform(&grid, n), zr)?;
    println!("Gaussian w0 = {w0} um, z_R = {zr:.1} um: w(z_R) = {:.4} um (sqrt2 w0 = {:.4})", out.field.second_moment_radius().0, w0 * 2f64.sqrt());

    // the 4-core fiber: Marcuse-Gaussian launch into core 0
    let xs = FiberCrossSection::default();
    let grid = BpmGrid::default();
    let launch = launch_mode(0, &xs, &grid)?;
    println!("\nV = {:.4}, Marcuse mode radius {:.3} um, multimode: {}", launch.v_number, launch.mode_radius, launch.multimode);
    let map = build_index_map(&xs, &grid)?;
    for z in [0.0, 500.0, 2000.0] {
        let p = propagate(&launch.field, &map, z)?;
        let fr = core_powers(&p.field, &xs, 1.0);
        println!(
            "z = {z:>6} um  core fractions {:?}  absorbed {:.2e}",
            fr.iter().map(|f| format!("{f:.3e}")).collect::<Vec<_>>(),
            p.absorbed_power
        );
    }
    Ok(())
}
