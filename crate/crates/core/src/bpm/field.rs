//! Sampled transverse fields and the Gaussian launch.

use num_complex::Complex64;

use super::geometry::FiberCrossSection;
use super::grid::BpmGrid;
use crate::error::BpmError;

/// Cutoff of the second LP mode of a step-index core.
pub const SINGLE_MODE_CUTOFF: f64 = 2.404_825_557_695_773;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: BpmGrid,
    /// Row-major, x fastest.
    pub amplitudes: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &BpmGrid) -> Self {
        ComplexField {
            grid: grid.clone(),
            amplitudes: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: &BpmGrid, f: F) -> Self {
        let mut amplitudes = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            let y = grid.y(iy);
            for ix in 0..grid.nx {
                amplitudes.push(f(grid.x(ix), y));
            }
        }
        ComplexField {
            grid: grid.clone(),
            amplitudes,
        }
    }

    /// `Σ|a|²·dx·dy`
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Scales the field to unit power.
    pub fn normalize(&mut self) -> Result<(), BpmError> {
        let p = self.power();
        if !(p > 0.0 && p.is_finite()) {
            return Err(BpmError::DegenerateField);
        }
        let s = 1.0 / p.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(())
    }

    /// `∫ conj(self)·other dA`
    pub fn overlap(&self, other: &ComplexField) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.cell_area()
    }

    /// Field shifted by whole samples; vacated samples are zero.
    pub fn shifted(&self, sx: isize, sy: isize) -> ComplexField {
        let (nx, ny) = (self.grid.nx as isize, self.grid.ny as isize);
        let mut out = ComplexField::zeros(&self.grid);
        for iy in 0..ny {
            let src_y = iy - sy;
            if !(0..ny).contains(&src_y) {
                continue;
            }
            for ix in 0..nx {
                let src_x = ix - sx;
                if (0..nx).contains(&src_x) {
                    out.amplitudes[(iy * nx + ix) as usize] = self.amplitudes[(src_y * nx + src_x) as usize];
                }
            }
        }
        out
    }

    /// RMS beam radius `2·sqrt(<r²>/2)` along x and y, µm (equals the
    /// 1/e² intensity radius for a Gaussian).
    pub fn second_moment_radius(&self) -> (f64, f64) {
        let g = &self.grid;
        let (mut p, mut mx, mut my, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                let i = self.amplitudes[iy * g.nx + ix].norm_sqr();
                let (x, y) = (g.x(ix), g.y(iy));
                p += i;
                mx += i * x;
                my += i * y;
                sxx += i * x * x;
                syy += i * y * y;
            }
        }
        let (mx, my) = (mx / p, my / p);
        (2.0 * (sxx / p - mx * mx).sqrt(), 2.0 * (syy / p - my * my).sqrt())
    }
}

/// Normalized frequency `(2πa/λ)·sqrt(n_core² − n_clad²)`.
pub fn v_number(core_radius: f64, n_core: f64, n_clad: f64, wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * core_radius / wavelength * (n_core * n_core - n_clad * n_clad).sqrt()
}

/// Marcuse fit of the fundamental-mode Gaussian radius,
/// `w/a = 0.65 + 1.619·V^(−3/2) + 2.879·V^(−6)`.
pub fn marcuse_mode_radius(core_radius: f64, v: f64) -> f64 {
    core_radius * (0.65 + 1.619 * v.powf(-1.5) + 2.879 * v.powi(-6))
}

/// Gaussian launch for one core.
#[derive(Debug, Clone)]
pub struct ModeLaunch {
    pub field: ComplexField,
    pub v_number: f64,
    pub mode_radius: f64,
    /// `V` above the single-mode cutoff; the launch is still produced.
    pub multimode: bool,
}

/// Unit-power Gaussian `exp(−r²/w²)` centered on core `core`, with `w` from
/// the Marcuse fit.
pub fn launch_mode(core: usize, xs: &FiberCrossSection, grid: &BpmGrid) -> Result<ModeLaunch, BpmError> {
    xs.validate()?;
    grid.validate()?;
    let centers = xs.core_centers();
    let &(cx, cy) = centers.get(core).ok_or(BpmError::CoreIndex {
        index: core,
        count: centers.len(),
    })?;
    let v = v_number(xs.core_radius, xs.core_index(), xs.cladding_index, grid.wavelength);
    let multimode = !(v > 0.0 && v <= SINGLE_MODE_CUTOFF);
    if multimode {
        log::warn!("core V-number {v:.4} is outside (0, {SINGLE_MODE_CUTOFF:.3}]; launching a Gaussian anyway");
    }
    let w = marcuse_mode_radius(xs.core_radius, v);
    let mut field = ComplexField::from_fn(grid, |x, y| {
        let r2 = (x - cx).powi(2) + (y - cy).powi(2);
        Complex64::new((-r2 / (w * w)).exp(), 0.0)
    });
    field.normalize()?;
    Ok(ModeLaunch {
        field,
        v_number: v,
        mode_radius: w,
        multimode,
    })
}

/// Power fraction of `field` inside each core's collection disk of radius
/// `2.5·a` (the core dilated by `1.5·a`), relative to `reference_power`.
pub fn core_powers(field: &ComplexField, xs: &FiberCrossSection, reference_power: f64) -> Vec<f64> {
    let g = &field.grid;
    let r = 2.5 * xs.core_radius;
    xs.core_centers()
        .iter()
        .map(|&(cx, cy)| {
            let mut p = 0.0;
            for iy in 0..g.ny {
                let dy = g.y(iy) - cy;
                if dy.abs() > r {
                    continue;
                }
                for ix in 0..g.nx {
                    let dx = g.x(ix) - cx;
                    if dx * dx + dy * dy <= r * r {
                        p += field.amplitudes[iy * g.nx + ix].norm_sqr();
                    }
                }
            }
            p * g.cell_area() / reference_power
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn launch_is_unit_power() {
        let xs = FiberCrossSection::default();
        let g = BpmGrid::default();
        let l = launch_mode(0, &xs, &g).unwrap();
        assert!((l.field.power() - 1.0).abs() < 1e-9);
        assert!(!l.multimode);
        assert!(launch_mode(4, &xs, &g).is_err());
    }

    #[test]
    fn v_number_of_reference_core_is_single_mode() {
        // (2π·3.5/1.55)·sqrt(1.449² − 1.444²)
        let v = v_number(3.5, 1.449, 1.444, 1.55);
        let by_hand = 2.0 * std::f64::consts::PI * 3.5 / 1.55 * (1.449f64.powi(2) - 1.444f64.powi(2)).sqrt();
        assert!((v - by_hand).abs() < 1e-12);
        assert!((v - 1.7064).abs() < 1e-3, "{v}");
        assert!(v <= SINGLE_MODE_CUTOFF);
    }

    #[test]
    fn multimode_core_still_launches() {
        let mut xs = FiberCrossSection::default();
        xs.core_dn = 0.02;
        let l = launch_mode(0, &xs, &BpmGrid::default()).unwrap();
        assert!(l.multimode);
        assert!((l.field.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn launches_of_distinct_cores_are_orthogonal() {
        let xs = FiberCrossSection::default();
        let g = BpmGrid::default();
        let a = launch_mode(0, &xs, &g).unwrap().field;
        let b = launch_mode(1, &xs, &g).unwrap().field;
        assert!(a.overlap(&b).norm() < 1e-6);
    }

    #[test]
    fn launch_is_contained_in_its_core() {
        let xs = FiberCrossSection::default();
        let g = BpmGrid::default();
        for k in 0..4 {
            let f = launch_mode(k, &xs, &g).unwrap().field;
            let p = core_powers(&f, &xs, 1.0);
            // Gaussian containment within 2.5a: 1 − exp(−2(2.5a)²/w²)
            let w = marcuse_mode_radius(3.5, v_number(3.5, 1.449, 1.444, 1.55));
            let expected = 1.0 - (-2.0 * (8.75f64 / w).powi(2)).exp();
            assert!(p[k] >= 0.99);
            assert!((p[k] - expected).abs() < 1e-3, "{} vs {expected}", p[k]);
            for (j, pj) in p.iter().enumerate() {
                if j != k {
                    assert!(*pj < 1e-6);
                }
            }
        }
    }

    #[test]
    fn symmetric_superposition_has_equal_fractions() {
        let xs = FiberCrossSection::default();
        let g = BpmGrid::default();
        let mut sum = ComplexField::zeros(&g);
        for k in 0..4 {
            let f = launch_mode(k, &xs, &g).unwrap().field;
            for (s, a) in sum.amplitudes.iter_mut().zip(&f.amplitudes) {
                *s += a;
            }
        }
        sum.normalize().unwrap();
        let p = core_powers(&sum, &xs, 1.0);
        for pk in &p {
            assert!((pk - p[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_moves_a_launch_onto_the_next_core() {
        let xs = FiberCrossSection::default();
        let g = BpmGrid::default();
        let a = launch_mode(0, &xs, &g).unwrap().field;
        let b = launch_mode(1, &xs, &g).unwrap().field;
        let moved = a.shifted(100, 0);
        let err: f64 = moved
            .amplitudes
            .iter()
            .zip(&b.amplitudes)
            .map(|(p, q)| (p - q).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
