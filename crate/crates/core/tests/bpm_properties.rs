//! Physical invariants of the beam-propagation solver on the 4-core fiber.

use mcf_qkd::bpm::analysis::{measure_crosstalk, trench_variants};
use mcf_qkd::bpm::modes::core_mode;
use mcf_qkd::bpm::{build_index_map, BpmGrid, FiberCrossSection, Lattice, Propagator};

#[test]
fn halving_all_steps_moves_crosstalk_by_less_than_one_db() {
    let xs = FiberCrossSection::default();
    let coarse = BpmGrid::default();
    let fine = coarse.refined();
    let a = measure_crosstalk(&xs, &coarse, 0, 10_000.0).unwrap();
    let b = measure_crosstalk(&xs, &fine, 0, 10_000.0).unwrap();
    let (xa, xb) = (a.worst_crosstalk_db(), b.worst_crosstalk_db());
    eprintln!("dx {} -> {}: {xa:.3} dB -> {xb:.3} dB", coarse.dx, fine.dx);
    assert!((xa - xb).abs() < 1.0, "{xa} vs {xb}");
}

#[test]
fn denser_cores_couple_more() {
    let grid = BpmGrid::default();
    let xt = |pitch: f64| {
        let xs = FiberCrossSection::default().with_lattice(Lattice::Square4 { pitch });
        measure_crosstalk(&xs, &grid, 0, 10_000.0).unwrap().worst_crosstalk_db()
    };
    let (x40, x50) = (xt(40.0), xt(50.0));
    eprintln!("pitch 40: {x40:.2} dB, pitch 50: {x50:.2} dB");
    assert!(x40 > x50 + 10.0, "{x40} vs {x50}");
}

#[test]
fn crosstalk_is_reciprocal() {
    let grid = BpmGrid::default();
    for xs in trench_variants(&FiberCrossSection::default(), &[3.0], &[0.01], 4.0) {
        let ab = measure_crosstalk(&xs, &grid, 0, 5_000.0).unwrap().modal_fractions[1];
        let ba = measure_crosstalk(&xs, &grid, 1, 5_000.0).unwrap().modal_fractions[0];
        let rel = (ab - ba).abs() / ab;
        eprintln!("{}: 0->1 {ab:.6e}, 1->0 {ba:.6e}, rel {rel:.1e}", mcf_qkd::bpm::analysis::variant_label(&xs));
        assert!(rel < 1e-6, "{ab} vs {ba}");
    }
}

#[test]
fn power_is_conserved_over_ten_thousand_steps() {
    let xs = FiberCrossSection::default().with_lattice(Lattice::Single);
    let grid = BpmGrid::square(128, 0.5).with_absorber(0.0);
    let map = build_index_map(&xs, &grid).unwrap();
    let mut field = core_mode(&xs, &grid, 0).unwrap().field;
    let p0 = field.power();
    let mut prop = Propagator::new(&grid, &map).unwrap();
    prop.advance(&mut field, 10_000.0 * grid.dz).unwrap();
    assert_eq!(prop.steps(), 10_000);
    let drift = (field.power() / p0 - 1.0).abs();
    assert!(drift < 1e-3, "drift {drift:e}");
    assert_eq!(prop.absorbed_power(), 0.0);
}

#[test]
fn zero_width_trench_is_no_trench() {
    let grid = BpmGrid::square(160, 1.0);
    let plain = FiberCrossSection::default();
    let degenerate = plain.clone().with_trench(0.0, 0.01);
    let a = build_index_map(&plain, &grid).unwrap();
    let b = build_index_map(&degenerate, &grid).unwrap();
    assert_eq!(a.values, b.values);
}
