use serde::{Deserialize, Serialize};

use super::geometry::{FiberCrossSection, DEFAULT_CLADDING_INDEX};
use crate::error::BpmError;

/// Transverse sampling and propagation step. Lengths in µm.
///
/// Sample `i` sits at `x = (i − (nx − 1)/2)·dx`, so the grid is mirror
/// symmetric about both axes for any `nx`, `ny`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpmGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength: f64,
    #[serde(default = "default_reference_index")]
    pub reference_index: f64,
    #[serde(default = "default_absorber")]
    pub boundary_absorber_width: f64,
}

fn default_wavelength() -> f64 {
    1.55
}

fn default_reference_index() -> f64 {
    DEFAULT_CLADDING_INDEX
}

fn default_absorber() -> f64 {
    8.0
}

impl BpmGrid {
    /// `n × n` grid with spacing `d`, `dz = 5 µm`, 1550 nm.
    pub fn square(n: usize, d: f64) -> Self {
        BpmGrid {
            nx: n,
            ny: n,
            dx: d,
            dy: d,
            dz: 5.0,
            wavelength: default_wavelength(),
            reference_index: default_reference_index(),
            boundary_absorber_width: default_absorber(),
        }
    }

    pub fn with_dz(mut self, dz: f64) -> Self {
        self.dz = dz;
        self
    }

    pub fn with_absorber(mut self, width: f64) -> Self {
        self.boundary_absorber_width = width;
        self
    }

    pub fn with_reference_index(mut self, n: f64) -> Self {
        self.reference_index = n;
        self
    }

    /// The same window sampled twice as finely in x, y and z.
    pub fn refined(&self) -> Self {
        BpmGrid {
            nx: self.nx * 2,
            ny: self.ny * 2,
            dx: self.dx / 2.0,
            dy: self.dy / 2.0,
            dz: self.dz / 2.0,
            ..self.clone()
        }
    }

    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx as f64 - 1.0) / 2.0) * self.dx
    }

    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny as f64 - 1.0) / 2.0) * self.dy
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.dx
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.dy
    }

    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), BpmError> {
        let err = |m: String| Err(BpmError::Grid(m));
        if self.nx < 4 || self.ny < 4 {
            return err(format!("grid {}x{} is too small", self.nx, self.ny));
        }
        for (name, v) in [
            ("dx", self.dx),
            ("dy", self.dy),
            ("dz", self.dz),
            ("wavelength", self.wavelength),
            ("reference_index", self.reference_index),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return err(format!("{name} must be positive, got {v}"));
            }
        }
        let w = self.boundary_absorber_width;
        if !(w >= 0.0) || 2.0 * w >= self.width().min(self.height()) {
            return err(format!("absorber width {w} does not fit the window"));
        }
        Ok(())
    }

    /// Resolution and absorber checks against a fiber: at least 8 samples per
    /// core diameter, an absorber of at least 4 wavelengths, and a window that
    /// holds the cladding inside the absorber.
    pub fn check_fiber(&self, xs: &FiberCrossSection) -> Vec<String> {
        let mut issues = Vec::new();
        let d = 2.0 * xs.core_radius;
        if d / self.dx < 8.0 || d / self.dy < 8.0 {
            issues.push(format!(
                "core diameter {d} um is resolved by fewer than 8 samples (dx = {}, dy = {})",
                self.dx, self.dy
            ));
        }
        if self.boundary_absorber_width < 4.0 * self.wavelength {
            issues.push(format!(
                "absorber width {} um is below 4 wavelengths",
                self.boundary_absorber_width
            ));
        }
        let inner = 0.5 * self.width().min(self.height()) - self.boundary_absorber_width;
        let extent = xs
            .core_centers()
            .iter()
            .map(|&(x, y)| x.abs().max(y.abs()) + xs.outer_radius())
            .fold(0.0, f64::max);
        if extent > inner {
            issues.push(format!(
                "cores reach {extent:.1} um from the axis but the absorber starts at {inner:.1} um"
            ));
        }
        issues
    }
}

impl Default for BpmGrid {
    /// 160 µm window at 0.5 µm resolution.
    fn default() -> Self {
        BpmGrid::square(320, 0.5)
    }
}
