//! Crosstalk measurement: launch a core's mode, propagate, and decompose the
//! output onto the isolated-core modes.

use num_complex::Complex64;
use serde::Serialize;

use super::coupled_mode::coupling_coefficient;
use super::field::{core_powers, ComplexField};
use super::geometry::{build_index_map, FiberCrossSection, Lattice};
use super::grid::BpmGrid;
use super::modes::{core_mode, core_modes, solve_mode, MirrorSymmetry, ModeSolverSettings};
use super::propagate::Propagator;
use crate::error::BpmError;

/// Least-squares modal amplitudes of `field` on the (nearly orthogonal) mode
/// set, to first order in the mode overlaps: `c = b − (G − I)·b` with
/// `b_j = ⟨ψ_j, E⟩` and `G_jk = ⟨ψ_j, ψ_k⟩`. The correction removes the static
/// tail overlap of the launched mode with its neighbors.
pub fn modal_amplitudes(field: &ComplexField, modes: &[ComplexField]) -> Vec<Complex64> {
    let b: Vec<Complex64> = modes.iter().map(|m| m.overlap(field)).collect();
    (0..modes.len())
        .map(|j| {
            let correction: Complex64 = (0..modes.len())
                .filter(|&k| k != j)
                .map(|k| modes[j].overlap(&modes[k]) * b[k])
                .sum();
            b[j] - correction
        })
        .collect()
}

/// Crosstalk of one fiber variant with the signal launched into one core.
#[derive(Debug, Clone, Serialize)]
pub struct CrosstalkReport {
    pub label: String,
    pub trench_width_um: f64,
    pub trench_dn: f64,
    pub core_dn: f64,
    pub launch_core: usize,
    /// µm
    pub distance: f64,
    /// Power within each core's collection disk, fraction of launched power.
    pub core_fractions: Vec<f64>,
    /// Power in each isolated-core mode, fraction of launched power.
    pub modal_fractions: Vec<f64>,
    /// `10·log10(P_k/P_launch)` from the modal powers; `None` for the launch
    /// core.
    pub crosstalk_db: Vec<Option<f64>>,
    pub absorbed_fraction: f64,
    /// Effective index of the launched isolated-core mode.
    pub effective_index: f64,
    /// Every isolated-core mode lies above the cladding index. When false the
    /// launched field is a leaky/box state and the crosstalk is meaningless.
    pub guided: bool,
}

impl CrosstalkReport {
    /// Largest crosstalk into any other core.
    pub fn worst_crosstalk_db(&self) -> f64 {
        self.crosstalk_db.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn to_db(p: f64) -> f64 {
    10.0 * p.max(1e-300).log10()
}

/// Launches the isolated-core mode of `launch_core`, propagates it through the
/// full cross-section and reports the crosstalk into every other core.
pub fn measure_crosstalk(
    xs: &FiberCrossSection,
    grid: &BpmGrid,
    launch_core: usize,
    distance: f64,
) -> Result<CrosstalkReport, BpmError> {
    measure_crosstalk_field(xs, grid, launch_core, distance).map(|(report, _)| report)
}

/// [`measure_crosstalk`] that also returns the output field.
pub fn measure_crosstalk_field(
    xs: &FiberCrossSection,
    grid: &BpmGrid,
    launch_core: usize,
    distance: f64,
) -> Result<(CrosstalkReport, ComplexField), BpmError> {
    let count = xs.core_count();
    if launch_core >= count {
        return Err(BpmError::CoreIndex {
            index: launch_core,
            count,
        });
    }
    let map = build_index_map(xs, grid)?;
    let solutions = core_modes(xs, grid)?;
    let guided = solutions.iter().all(|m| m.eigenvalue > 0.0);
    let effective_index = solutions[launch_core].effective_index;
    let modes: Vec<ComplexField> = solutions.into_iter().map(|m| m.field).collect();
    let mut field = modes[launch_core].clone();
    let launched = field.power();
    let mut prop = Propagator::new(grid, &map)?;
    prop.advance(&mut field, distance)?;
    let amps = modal_amplitudes(&field, &modes);
    let modal_fractions: Vec<f64> = amps.iter().map(|c| c.norm_sqr() / launched).collect();
    let crosstalk_db = modal_fractions
        .iter()
        .enumerate()
        .map(|(k, &p)| (k != launch_core).then(|| to_db(p)))
        .collect();
    let report = CrosstalkReport {
        label: variant_label(xs),
        trench_width_um: xs.trench_width(),
        trench_dn: xs.trench.map_or(0.0, |t| t.dn_below_cladding),
        core_dn: xs.core_dn,
        launch_core,
        distance: prop.distance(),
        core_fractions: core_powers(&field, xs, launched),
        modal_fractions,
        crosstalk_db,
        absorbed_fraction: prop.absorbed_power() / launched,
        effective_index,
        guided,
    };
    Ok((report, field))
}

/// Short description such as `trench 3um dn 0.005`.
pub fn variant_label(xs: &FiberCrossSection) -> String {
    match xs.trench {
        Some(t) if t.width > 0.0 && t.gap > 0.0 => {
            format!("trench {}um dn {} gap {}um", t.width, t.dn_below_cladding, t.gap)
        }
        Some(t) if t.width > 0.0 => format!("trench {}um dn {}", t.width, t.dn_below_cladding),
        _ => "no trench".to_string(),
    }
}

/// One report per variant, in input order, all launched into core 0. The
/// variants must share a lattice.
pub fn crosstalk_study(
    variants: &[FiberCrossSection],
    distance: f64,
    grid: &BpmGrid,
) -> Result<Vec<CrosstalkReport>, BpmError> {
    if let Some(first) = variants.first() {
        if variants.iter().any(|v| v.lattice != first.lattice || v.core_radius != first.core_radius) {
            return Err(BpmError::Geometry(
                "study variants may differ only in trench parameters and core_dn".into(),
            ));
        }
    }
    variants.iter().map(|xs| measure_crosstalk(xs, grid, 0, distance)).collect()
}

/// Cladding ring between core and trench used by the trench study, µm. A
/// trench touching this weakly guiding core (V ≈ 1.7) lowers the mode index
/// toward the cladding and lengthens the outer tail, raising crosstalk; from
/// about 3 µm out the trench only blocks the tail.
pub const STUDY_TRENCH_GAP: f64 = 4.0;

/// The Table-1 style variant set: no trench, then every nonzero width in
/// `widths` at each trench depression in `dns`, all with the trench `gap` µm
/// outside the core.
pub fn trench_variants(base: &FiberCrossSection, widths: &[f64], dns: &[f64], gap: f64) -> Vec<FiberCrossSection> {
    let mut out = vec![FiberCrossSection {
        trench: None,
        ..base.clone()
    }];
    for &dn in dns {
        for &w in widths.iter().filter(|&&w| w > 0.0) {
            out.push(base.clone().with_trench(w, dn).with_trench_gap(gap));
        }
    }
    out
}

/// Two-core coupling measured three ways.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingMeasurement {
    pub pitch: f64,
    /// Coupled-mode theory, /µm.
    pub kappa_analytic: f64,
    /// From the even/odd supermode splitting `(β_e − β_o)/2`, /µm.
    pub kappa_supermode: f64,
    /// From the power coupled into the second core after `distance`,
    /// `asin(|c_B|)/z`, /µm.
    pub kappa_propagated: f64,
    /// µm
    pub distance: f64,
}

impl CouplingMeasurement {
    pub fn transfer_length_analytic(&self) -> f64 {
        super::coupled_mode::transfer_length(self.kappa_analytic)
    }

    pub fn transfer_length_propagated(&self) -> f64 {
        super::coupled_mode::transfer_length(self.kappa_propagated)
    }
}

/// A window that holds a two-core pair on the x axis with `margin` µm of
/// cladding around the cores (absorber included).
///
/// The FFT window is periodic, so each core also sees the images of its
/// partner one window width away. A margin of 30 µm at 50 µm pitch inflates
/// the supermode splitting by about 8 %; 60 µm brings it within 2 %.
pub fn pair_grid(pitch: f64, dx: f64, margin: f64) -> BpmGrid {
    let even = |len: f64| (((len / dx).ceil() as usize) + 1) / 2 * 2;
    let nx = even(pitch + 2.0 * margin);
    let ny = even(2.0 * margin);
    BpmGrid {
        nx,
        ny,
        dx,
        dy: dx,
        ..BpmGrid::square(nx, dx)
    }
}

fn beta(grid: &BpmGrid, eigenvalue: f64) -> f64 {
    let k0 = grid.k0();
    let nref = grid.reference_index;
    (k0 * k0 * nref * nref + 2.0 * k0 * nref * eigenvalue).sqrt()
}

/// Measures the coupling of a symmetric pair (`xs.lattice` must be
/// [`Lattice::Pair`]) by supermode splitting and by propagation over
/// `distance`, which should be short against the transfer length.
pub fn measure_pair_coupling(xs: &FiberCrossSection, grid: &BpmGrid, distance: f64) -> Result<CouplingMeasurement, BpmError> {
    let Lattice::Pair { pitch } = xs.lattice else {
        return Err(BpmError::Geometry("pair coupling needs a two-core pair lattice".into()));
    };
    let map = build_index_map(xs, grid)?;
    let a = core_mode(xs, grid, 0)?.field;
    let b = core_modes(xs, grid)?.swap_remove(1).field;

    let mut trial_even = a.clone();
    let mut trial_odd = a.clone();
    for ((e, o), bv) in trial_even.amplitudes.iter_mut().zip(trial_odd.amplitudes.iter_mut()).zip(&b.amplitudes) {
        *e += bv;
        *o -= bv;
    }
    let settings = |symmetry| ModeSolverSettings {
        symmetry,
        ..ModeSolverSettings::default()
    };
    let even = solve_mode(&map, &trial_even, &settings(MirrorSymmetry::EvenX))?;
    let odd = solve_mode(&map, &trial_odd, &settings(MirrorSymmetry::OddX))?;
    let kappa_supermode = 0.5 * (beta(grid, even.eigenvalue) - beta(grid, odd.eigenvalue));

    let mut field = a.clone();
    let mut prop = Propagator::new(grid, &map)?;
    prop.advance(&mut field, distance)?;
    let modes = [a, b];
    let amps = modal_amplitudes(&field, &modes);
    let kappa_propagated = amps[1].norm().min(1.0).asin() / prop.distance();

    Ok(CouplingMeasurement {
        pitch,
        kappa_analytic: coupling_coefficient(xs.core_radius, xs.core_index(), xs.cladding_index, grid.wavelength, pitch)?,
        kappa_supermode,
        kappa_propagated,
        distance: prop.distance(),
    })
}

/// Power in the second core of a pair along z, launched from the first.
#[derive(Debug, Clone, Serialize)]
pub struct TransferScan {
    pub z: Vec<f64>,
    pub power_b: Vec<f64>,
}

impl TransferScan {
    /// Position and height of the first maximum of the transferred power,
    /// refined by a parabola through the three samples around it.
    pub fn first_peak(&self) -> Option<(f64, f64)> {
        let p = &self.power_b;
        let i = (1..p.len().saturating_sub(1)).find(|&i| p[i] >= p[i - 1] && p[i] > p[i + 1])?;
        let (y0, y1, y2) = (p[i - 1], p[i], p[i + 1]);
        let h = self.z[i] - self.z[i - 1];
        let denom = y0 - 2.0 * y1 + y2;
        let off = if denom != 0.0 { 0.5 * (y0 - y2) / denom } else { 0.0 };
        let peak = y1 - 0.25 * (y0 - y2) * off;
        Some((self.z[i] + off * h, peak))
    }
}

/// Propagates the first core's mode of a pair over `distance`, sampling the
/// modal power of the second core every step.
pub fn pair_transfer_scan(xs: &FiberCrossSection, grid: &BpmGrid, distance: f64) -> Result<TransferScan, BpmError> {
    if xs.core_count() != 2 {
        return Err(BpmError::Geometry("transfer scan needs exactly two cores".into()));
    }
    let map = build_index_map(xs, grid)?;
    let modes: Vec<ComplexField> = core_modes(xs, grid)?.into_iter().map(|m| m.field).collect();
    let mut field = modes[0].clone();
    let mut prop = Propagator::new(grid, &map)?;
    let mut scan = TransferScan {
        z: vec![0.0],
        power_b: vec![0.0],
    };
    prop.advance_observed(&mut field, distance, |z, f| {
        let c = modal_amplitudes(f, &modes);
        scan.z.push(z);
        scan.power_b.push(c[1].norm_sqr());
    })?;
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modal_amplitudes_recover_a_superposition() {
        let xs = FiberCrossSection::default();
        let grid = BpmGrid::default();
        let modes: Vec<ComplexField> = core_modes(&xs, &grid).unwrap().into_iter().map(|m| m.field).collect();
        let mut f = ComplexField::zeros(&grid);
        let want = [Complex64::new(0.9, 0.1), Complex64::new(0.0, 0.3), Complex64::new(0.01, 0.0), Complex64::new(0.0, 0.0)];
        for (m, c) in modes.iter().zip(&want) {
            for (a, b) in f.amplitudes.iter_mut().zip(&m.amplitudes) {
                *a += b * c;
            }
        }
        let got = modal_amplitudes(&f, &modes);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-9, "{g} vs {w}");
        }
    }

    #[test]
    fn trench_variant_set_has_seven_rows() {
        let v = trench_variants(&FiberCrossSection::default(), &[0.0, 1.0, 3.0, 6.0], &[0.005, 0.01], 4.0);
        assert_eq!(v.len(), 7);
        assert!(v[0].trench.is_none());
        assert_eq!(v[3].trench.unwrap().gap, 4.0);
        assert_eq!(v[3].outer_radius(), 13.5);
        assert_eq!(variant_label(&v[6]), "trench 6um dn 0.01 gap 4um");
    }

    #[test]
    fn study_rejects_mixed_lattices() {
        let a = FiberCrossSection::default();
        let b = a.clone().with_lattice(Lattice::Square4 { pitch: 40.0 });
        assert!(crosstalk_study(&[a, b], 10.0, &BpmGrid::default()).is_err());
    }

    #[test]
    fn peak_refinement_is_exact_for_a_parabola() {
        let z: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let power_b = z.iter().map(|z| 1.0 - (z - 7.3f64).powi(2) / 100.0).collect();
        let (zp, pp) = TransferScan { z, power_b }.first_peak().unwrap();
        assert!((zp - 7.3).abs() < 1e-12 && (pp - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_distance_leaves_launch_fractions() {
        let xs = FiberCrossSection::default();
        let grid = BpmGrid::default();
        let r = measure_crosstalk(&xs, &grid, 0, 0.0).unwrap();
        assert!(r.core_fractions[0] > 0.97);
        assert!((r.modal_fractions[0] - 1.0).abs() < 1e-9);
        assert!(r.modal_fractions[1] < 1e-20);
        assert_eq!(r.absorbed_fraction, 0.0);
    }
}
