//! Fiber cross-sections and their sampled refractive-index maps.

use serde::{Deserialize, Serialize};

use super::grid::BpmGrid;
use crate::error::BpmError;

pub const DEFAULT_CLADDING_INDEX: f64 = 1.444;

/// Subsamples per pixel edge used to area-average the index at material
/// boundaries.
const SUBSAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Lattice {
    /// Four cores on the corners of a square with side `pitch`.
    Square4 { pitch: f64 },
    /// A central core surrounded by six cores on a hexagon of radius `pitch`.
    Hex7 { pitch: f64 },
    /// Two cores on the x axis, `pitch` apart.
    Pair { pitch: f64 },
    /// One core at the origin.
    Single,
    /// Arbitrary core centers, µm.
    Custom { centers: Vec<(f64, f64)> },
}

impl Lattice {
    pub fn centers(&self) -> Vec<(f64, f64)> {
        match self {
            Lattice::Square4 { pitch } => {
                let h = pitch / 2.0;
                vec![(-h, -h), (h, -h), (h, h), (-h, h)]
            }
            Lattice::Hex7 { pitch } => {
                let mut c = vec![(0.0, 0.0)];
                c.extend((0..6).map(|k| {
                    let a = std::f64::consts::PI / 3.0 * k as f64;
                    (pitch * a.cos(), pitch * a.sin())
                }));
                c
            }
            Lattice::Pair { pitch } => vec![(-pitch / 2.0, 0.0), (pitch / 2.0, 0.0)],
            Lattice::Single => vec![(0.0, 0.0)],
            Lattice::Custom { centers } => centers.clone(),
        }
    }
}

/// Low-index annulus around every core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trench {
    /// Radial width, µm, starting at the core boundary.
    pub width: f64,
    /// Index depression below the cladding.
    pub dn_below_cladding: f64,
    /// Cladding ring between the core boundary and the trench, µm.
    #[serde(default)]
    pub gap: f64,
}

/// Missing keys take the [`Default`] values when deserialized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FiberCrossSection {
    /// µm
    pub cladding_diameter: f64,
    pub lattice: Lattice,
    /// µm
    pub core_radius: f64,
    /// Core index step above the cladding.
    pub core_dn: f64,
    #[serde(default)]
    pub trench: Option<Trench>,
    pub cladding_index: f64,
}

impl Default for FiberCrossSection {
    /// 125 µm cladding, 4 cores on a 50 µm square, 7 µm core diameter,
    /// index step 0.005, no trench.
    fn default() -> Self {
        FiberCrossSection {
            cladding_diameter: 125.0,
            lattice: Lattice::Square4 { pitch: 50.0 },
            core_radius: 3.5,
            core_dn: 0.005,
            trench: None,
            cladding_index: DEFAULT_CLADDING_INDEX,
        }
    }
}

impl FiberCrossSection {
    pub fn with_trench(mut self, width: f64, dn_below_cladding: f64) -> Self {
        self.trench = Some(Trench {
            width,
            dn_below_cladding,
            gap: 0.0,
        });
        self
    }

    /// Moves the trench `gap` µm out from the core boundary.
    pub fn with_trench_gap(mut self, gap: f64) -> Self {
        if let Some(t) = self.trench.as_mut() {
            t.gap = gap;
        }
        self
    }

    /// Inner radius of the trench annulus.
    pub fn trench_inner_radius(&self) -> f64 {
        self.core_radius + self.trench.map_or(0.0, |t| t.gap)
    }

    pub fn with_lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = lattice;
        self
    }

    pub fn core_centers(&self) -> Vec<(f64, f64)> {
        self.lattice.centers()
    }

    pub fn core_count(&self) -> usize {
        self.core_centers().len()
    }

    pub fn core_index(&self) -> f64 {
        self.cladding_index + self.core_dn
    }

    pub fn trench_width(&self) -> f64 {
        self.trench.map_or(0.0, |t| t.width)
    }

    /// Outer radius of a core including its trench.
    pub fn outer_radius(&self) -> f64 {
        if self.trench_width() > 0.0 {
            self.trench_inner_radius() + self.trench_width()
        } else {
            self.core_radius
        }
    }

    /// Largest index contrast against the cladding.
    pub fn max_contrast(&self) -> f64 {
        let trench = self.trench.map_or(0.0, |t| t.dn_below_cladding);
        self.core_dn.abs().max(trench.abs())
    }

    pub fn validate(&self) -> Result<(), BpmError> {
        let err = |m: String| Err(BpmError::Geometry(m));
        if !(self.core_radius > 0.0) {
            return err(format!("core radius must be positive, got {}", self.core_radius));
        }
        if !(self.cladding_index > 1.0) {
            return err(format!("cladding index must exceed 1, got {}", self.cladding_index));
        }
        if let Some(t) = self.trench {
            if !(t.width >= 0.0) {
                return err(format!("trench width must be >= 0, got {}", t.width));
            }
            if !(t.gap >= 0.0) {
                return err(format!("trench gap must be >= 0, got {}", t.gap));
            }
            if !(t.dn_below_cladding >= 0.0) {
                return err(format!("trench depression must be >= 0, got {}", t.dn_below_cladding));
            }
        }
        let r_clad = self.cladding_diameter / 2.0;
        let outer = self.outer_radius();
        let centers = self.core_centers();
        if centers.is_empty() {
            return err("fiber has no cores".into());
        }
        for (k, &(x, y)) in centers.iter().enumerate() {
            if x.hypot(y) + outer > r_clad + 1e-9 {
                return err(format!("core {k} with its trench extends beyond the cladding"));
            }
        }
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                let d = (centers[i].0 - centers[j].0).hypot(centers[i].1 - centers[j].1);
                if d < 2.0 * outer {
                    return err(format!(
                        "cores {i} and {j} are {d:.3} um apart; their core/trench regions overlap"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Index at a point, considering only the listed cores.
    fn index_at(&self, x: f64, y: f64, cores: &[(f64, f64)]) -> f64 {
        let a = self.core_radius;
        let inner = self.trench_inner_radius();
        let outer = self.outer_radius();
        for &(cx, cy) in cores {
            let r2 = (x - cx).powi(2) + (y - cy).powi(2);
            if r2 <= a * a {
                return self.core_index();
            }
            if r2 > inner * inner && r2 <= outer * outer && outer > inner {
                let dn = self.trench.map_or(0.0, |t| t.dn_below_cladding);
                return self.cladding_index - dn;
            }
        }
        self.cladding_index
    }
}

/// Sampled refractive index, row-major with `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl IndexMap {
    pub fn uniform(grid: &BpmGrid, n: f64) -> Self {
        IndexMap {
            nx: grid.nx,
            ny: grid.ny,
            values: vec![n; grid.nx * grid.ny],
        }
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }
}

/// Index map of the full cross-section.
pub fn build_index_map(xs: &FiberCrossSection, grid: &BpmGrid) -> Result<IndexMap, BpmError> {
    let cores = xs.core_centers();
    build_index_map_with_cores(xs, grid, &cores)
}

/// Index map containing only the core `core` (and its trench); used to solve
/// for the isolated-core mode.
pub fn isolated_core_map(xs: &FiberCrossSection, grid: &BpmGrid, core: usize) -> Result<IndexMap, BpmError> {
    let centers = xs.core_centers();
    let c = *centers.get(core).ok_or(BpmError::CoreIndex {
        index: core,
        count: centers.len(),
    })?;
    build_index_map_with_cores(xs, grid, &[c])
}

/// Pixels straddling a boundary hold the area average of `n²`.
fn build_index_map_with_cores(
    xs: &FiberCrossSection,
    grid: &BpmGrid,
    cores: &[(f64, f64)],
) -> Result<IndexMap, BpmError> {
    xs.validate()?;
    grid.validate()?;
    let outer = xs.outer_radius();
    let half_diag = 0.5 * grid.dx.hypot(grid.dy);
    let radii: Vec<f64> = if xs.trench_width() > 0.0 {
        vec![xs.core_radius, xs.trench_inner_radius(), outer]
    } else {
        vec![xs.core_radius]
    };
    let mut values = Vec::with_capacity(grid.nx * grid.ny);
    for iy in 0..grid.ny {
        let y = grid.y(iy);
        for ix in 0..grid.nx {
            let x = grid.x(ix);
            let near_edge = cores.iter().any(|&(cx, cy)| {
                let r = (x - cx).hypot(y - cy);
                radii.iter().any(|&rb| (r - rb).abs() <= half_diag)
            });
            let n = if near_edge {
                let mut eps = 0.0;
                for sy in 0..SUBSAMPLES {
                    let py = y + grid.dy * ((sy as f64 + 0.5) / SUBSAMPLES as f64 - 0.5);
                    for sx in 0..SUBSAMPLES {
                        let px = x + grid.dx * ((sx as f64 + 0.5) / SUBSAMPLES as f64 - 0.5);
                        eps += xs.index_at(px, py, cores).powi(2);
                    }
                }
                (eps / (SUBSAMPLES * SUBSAMPLES) as f64).sqrt()
            } else {
                xs.index_at(x, y, cores)
            };
            values.push(n);
        }
    }
    Ok(IndexMap {
        nx: grid.nx,
        ny: grid.ny,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> BpmGrid {
        BpmGrid::square(320, 0.5)
    }

    /// Connected components of pixels above the cladding index.
    fn core_components(map: &IndexMap, n_clad: f64) -> Vec<Vec<(usize, usize)>> {
        let mut seen = vec![false; map.values.len()];
        let mut comps = Vec::new();
        for start in 0..map.values.len() {
            if seen[start] || map.values[start] <= n_clad + 1e-12 {
                continue;
            }
            let mut stack = vec![start];
            seen[start] = true;
            let mut comp = Vec::new();
            while let Some(p) = stack.pop() {
                let (ix, iy) = (p % map.nx, p / map.nx);
                comp.push((ix, iy));
                let mut push = |q: usize| {
                    if !seen[q] && map.values[q] > n_clad + 1e-12 {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if ix > 0 {
                    push(p - 1);
                }
                if ix + 1 < map.nx {
                    push(p + 1);
                }
                if iy > 0 {
                    push(p - map.nx);
                }
                if iy + 1 < map.ny {
                    push(p + map.nx);
                }
            }
            comps.push(comp);
        }
        comps
    }

    #[test]
    fn square4_has_four_cores_on_a_50um_square() {
        let xs = FiberCrossSection::default();
        let g = grid();
        let map = build_index_map(&xs, &g).unwrap();
        let comps = core_components(&map, xs.cladding_index);
        assert_eq!(comps.len(), 4);
        let mut centroids: Vec<(f64, f64)> = comps
            .iter()
            .map(|c| {
                let n = c.len() as f64;
                let sx: f64 = c.iter().map(|&(ix, _)| g.x(ix)).sum();
                let sy: f64 = c.iter().map(|&(_, iy)| g.y(iy)).sum();
                (sx / n, sy / n)
            })
            .collect();
        centroids.sort_by(|a, b| (a.1, a.0).partial_cmp(&(b.1, b.0)).unwrap());
        let expected = [(-25.0, -25.0), (25.0, -25.0), (-25.0, 25.0), (25.0, 25.0)];
        for (c, e) in centroids.iter().zip(expected) {
            assert!((c.0 - e.0).abs() < 1e-9 && (c.1 - e.1).abs() < 1e-9, "{c:?}");
        }
    }

    #[test]
    fn hex7_has_center_and_six_vertices() {
        let xs = FiberCrossSection::default().with_lattice(Lattice::Hex7 { pitch: 40.0 });
        let map = build_index_map(&xs, &grid()).unwrap();
        assert_eq!(core_components(&map, xs.cladding_index).len(), 7);
        let centers = xs.core_centers();
        assert_eq!(centers[0], (0.0, 0.0));
        for c in &centers[1..] {
            assert!((c.0.hypot(c.1) - 40.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_width_trench_changes_nothing() {
        let g = grid();
        let plain = build_index_map(&FiberCrossSection::default(), &g).unwrap();
        let zero = build_index_map(&FiberCrossSection::default().with_trench(0.0, 0.01), &g).unwrap();
        assert_eq!(plain, zero);
    }

    #[test]
    fn trench_lowers_index_around_core() {
        let g = grid();
        let xs = FiberCrossSection::default().with_trench(3.0, 0.01);
        let map = build_index_map(&xs, &g).unwrap();
        let min = map.values.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((min - (xs.cladding_index - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn boundary_averaging_preserves_core_area() {
        let g = grid();
        let xs = FiberCrossSection::default();
        let map = build_index_map(&xs, &g).unwrap();
        let area: f64 = map
            .values
            .iter()
            .map(|n| (n * n - xs.cladding_index.powi(2)).max(0.0))
            .sum::<f64>()
            * g.dx
            * g.dy
            / (xs.core_index().powi(2) - xs.cladding_index.powi(2));
        let exact = 4.0 * std::f64::consts::PI * 3.5f64.powi(2);
        assert!((area / exact - 1.0).abs() < 2e-3, "{area} vs {exact}");
    }

    #[test]
    fn overlapping_regions_rejected() {
        let xs = FiberCrossSection::default()
            .with_lattice(Lattice::Pair { pitch: 10.0 })
            .with_trench(2.0, 0.005);
        assert!(matches!(xs.validate(), Err(BpmError::Geometry(_))));
        let outside = FiberCrossSection::default().with_lattice(Lattice::Square4 { pitch: 85.0 });
        assert!(outside.validate().is_err());
    }
}
