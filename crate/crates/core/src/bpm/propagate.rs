//! Split-step Fourier propagation of the scalar paraxial equation
//!
//! `∂E/∂z = i/(2k0·n_ref)·∇⊥²E + i·k0·(n² − n_ref²)/(2n_ref)·E`
//!
//! with the symmetric splitting screen(dz/2) · diffraction(dz) · screen(dz/2)
//! and a raised-cosine amplitude absorber applied after every step.
//!
//! Diffraction uses the Cayley form `(1 − iθ/2)/(1 + iθ/2)` of `exp(−iθ)`,
//! `θ = k⊥²·dz/(2k0·n_ref)`. It is unitary and its phase never wraps past π,
//! so high spatial frequencies cannot alias into phase match with a guided
//! mode (the exact exponential does once `θ_max > 2π`, which fakes strong
//! coupling between distant cores). For the low `k⊥` that carry the modes the
//! two agree to `θ³/12`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::field::ComplexField;
use super::geometry::IndexMap;
use super::grid::BpmGrid;
use crate::error::BpmError;

/// Largest tolerated relative power growth over a single step.
pub const MAX_STEP_GROWTH: f64 = 1e-3;

/// 2-D FFT built from 1-D row transforms and two transposes. The spectrum is
/// kept in transposed layout (`kx` slowest), which is all the propagator needs.
struct Fft2 {
    nx: usize,
    ny: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Fft2 {
    fn new(nx: usize, ny: usize) -> Self {
        let mut planner = FftPlanner::new();
        let row_fwd = planner.plan_fft_forward(nx);
        let row_inv = planner.plan_fft_inverse(nx);
        let col_fwd = planner.plan_fft_forward(ny);
        let col_inv = planner.plan_fft_inverse(ny);
        let scratch_len = [&row_fwd, &row_inv, &col_fwd, &col_inv]
            .iter()
            .map(|f| f.get_inplace_scratch_len())
            .max()
            .unwrap_or(0);
        Fft2 {
            nx,
            ny,
            row_fwd,
            row_inv,
            col_fwd,
            col_inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    /// `data` (ny rows of nx) → `spec` (nx rows of ny), unnormalized.
    fn forward(&mut self, data: &mut [Complex64], spec: &mut [Complex64]) {
        self.row_fwd.process_with_scratch(data, &mut self.scratch);
        transpose(data, spec, self.nx, self.ny);
        self.col_fwd.process_with_scratch(spec, &mut self.scratch);
    }

    /// Inverse of [`Fft2::forward`], unnormalized.
    fn inverse(&mut self, spec: &mut [Complex64], data: &mut [Complex64]) {
        self.col_inv.process_with_scratch(spec, &mut self.scratch);
        transpose(spec, data, self.ny, self.nx);
        self.row_inv.process_with_scratch(data, &mut self.scratch);
    }
}

/// `src` has `rows` rows of `cols`; `dst` gets `cols` rows of `rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], cols: usize, rows: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

/// Angular spatial frequencies of an `n`-point FFT with spacing `d`.
fn wavenumbers(n: usize, d: f64) -> Vec<f64> {
    let span = n as f64 * d;
    (0..n)
        .map(|j| {
            let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * std::f64::consts::PI * m / span
        })
        .collect()
}

/// Per-step amplitude mask: 1 in the interior, falling as a raised cosine to
/// 0 at the window edge over `grid.boundary_absorber_width`.
pub fn absorber_mask(grid: &BpmGrid) -> Option<Vec<f64>> {
    let w = grid.boundary_absorber_width;
    if w <= 0.0 {
        return None;
    }
    let profile = |n: usize, d: f64, coord: &dyn Fn(usize) -> f64| -> Vec<f64> {
        let edge = 0.5 * n as f64 * d;
        (0..n)
            .map(|i| {
                let depth = coord(i).abs() - (edge - w);
                if depth <= 0.0 {
                    1.0
                } else {
                    let s = (depth / w).min(1.0);
                    0.5 * (1.0 + (std::f64::consts::PI * s).cos())
                }
            })
            .collect()
    };
    let px = profile(grid.nx, grid.dx, &|i| grid.x(i));
    let py = profile(grid.ny, grid.dy, &|i| grid.y(i));
    let mut mask = Vec::with_capacity(grid.len());
    for y in &py {
        for x in &px {
            mask.push(x * y);
        }
    }
    Some(mask)
}

/// Phase factors for one step of length `dz`.
struct StepFactors {
    dz: f64,
    /// Diffraction in transposed spectral layout, FFT normalization folded in.
    diffraction: Vec<Complex64>,
    screen_half: Vec<Complex64>,
}

/// Stateful propagator for a fixed grid and index map.
pub struct Propagator {
    grid: BpmGrid,
    fft: Fft2,
    /// `k⊥²` in transposed layout.
    k_perp2: Vec<f64>,
    /// `k0·(n² − n_ref²)/(2n_ref)`, /µm.
    potential: Vec<f64>,
    mask: Option<Vec<f64>>,
    factors: StepFactors,
    spec: Vec<Complex64>,
    absorbed: f64,
    z: f64,
    steps: usize,
}

impl Propagator {
    pub fn new(grid: &BpmGrid, index: &IndexMap) -> Result<Self, BpmError> {
        grid.validate()?;
        if index.nx != grid.nx || index.ny != grid.ny {
            return Err(BpmError::Grid(format!(
                "index map is {}x{} but the grid is {}x{}",
                index.nx, index.ny, grid.nx, grid.ny
            )));
        }
        let k0 = grid.k0();
        let nref = grid.reference_index;
        let potential: Vec<f64> = index
            .values
            .iter()
            .map(|&n| k0 * (n * n - nref * nref) / (2.0 * nref))
            .collect();
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(BpmError::Grid("index map contains non-finite values".into()));
        }
        let kx = wavenumbers(grid.nx, grid.dx);
        let ky = wavenumbers(grid.ny, grid.dy);
        let mut k_perp2 = Vec::with_capacity(grid.len());
        for kxi in &kx {
            for kyj in &ky {
                k_perp2.push(kxi * kxi + kyj * kyj);
            }
        }
        let mut p = Propagator {
            grid: grid.clone(),
            fft: Fft2::new(grid.nx, grid.ny),
            k_perp2,
            potential,
            mask: absorber_mask(grid),
            factors: StepFactors {
                dz: 0.0,
                diffraction: Vec::new(),
                screen_half: Vec::new(),
            },
            spec: vec![Complex64::new(0.0, 0.0); grid.len()],
            absorbed: 0.0,
            z: 0.0,
            steps: 0,
        };
        p.factors = p.real_factors(grid.dz);
        Ok(p)
    }

    fn real_factors(&self, dz: f64) -> StepFactors {
        let norm = 1.0 / self.grid.len() as f64;
        let c = dz / (2.0 * self.grid.k0() * self.grid.reference_index);
        StepFactors {
            dz,
            diffraction: self
                .k_perp2
                .iter()
                .map(|k2| {
                    let h = 0.5 * k2 * c;
                    Complex64::new(norm, 0.0) * Complex64::new(1.0, -h) / Complex64::new(1.0, h)
                })
                .collect(),
            screen_half: self.potential.iter().map(|v| Complex64::from_polar(1.0, v * dz / 2.0)).collect(),
        }
    }

    pub(crate) fn masked(&mut self, data: &mut [Complex64]) {
        if let Some(mask) = &self.mask {
            for (a, m) in data.iter_mut().zip(mask) {
                *a *= m;
            }
        }
    }

    fn check_field(&self, field: &ComplexField) -> Result<(), BpmError> {
        if field.grid.nx != self.grid.nx || field.grid.ny != self.grid.ny {
            return Err(BpmError::Grid("field and propagator grids differ".into()));
        }
        Ok(())
    }

    /// One real step of length `dz` (the configured step unless a final
    /// partial step is being taken).
    fn step(&mut self, field: &mut ComplexField, dz: f64) -> Result<(), BpmError> {
        let cell = self.grid.cell_area();
        let before = power_of(&field.amplitudes, cell);
        if dz == self.factors.dz {
            apply_factors(&mut self.fft, &mut self.spec, &self.factors, &mut field.amplitudes);
        } else {
            let f = self.real_factors(dz);
            apply_factors(&mut self.fft, &mut self.spec, &f, &mut field.amplitudes);
        }
        let after = power_of(&field.amplitudes, cell);
        self.steps += 1;
        self.z += dz;
        if !after.is_finite() || after > before * (1.0 + MAX_STEP_GROWTH) {
            return Err(BpmError::Unstable {
                step: self.steps,
                z_um: self.z,
                before,
                after,
            });
        }
        if self.mask.is_some() {
            self.masked(&mut field.amplitudes);
            self.absorbed += after - power_of(&field.amplitudes, cell);
        }
        Ok(())
    }

    /// Advances `field` by `distance`, taking a final partial step when `dz`
    /// does not divide it. `observe` sees the field after every step.
    pub fn advance_observed<F>(&mut self, field: &mut ComplexField, distance: f64, mut observe: F) -> Result<(), BpmError>
    where
        F: FnMut(f64, &ComplexField),
    {
        self.check_field(field)?;
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(BpmError::Grid(format!("distance must be non-negative, got {distance}")));
        }
        let dz = self.grid.dz;
        let full = (distance / dz + 1e-9).floor() as usize;
        for _ in 0..full {
            self.step(field, dz)?;
            observe(self.z, field);
        }
        let rest = distance - full as f64 * dz;
        if rest > 1e-9 * dz {
            self.step(field, rest)?;
            observe(self.z, field);
        }
        Ok(())
    }

    pub fn advance(&mut self, field: &mut ComplexField, distance: f64) -> Result<(), BpmError> {
        self.advance_observed(field, distance, |_, _| {})
    }

    /// Power removed by the absorber so far.
    pub fn absorbed_power(&self) -> f64 {
        self.absorbed
    }

    pub fn distance(&self) -> f64 {
        self.z
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// `⟨E, H E⟩ / ⟨E, E⟩` for the paraxial operator
    /// `H = ∇⊥²/(2k0·n_ref) + k0·(n² − n_ref²)/(2n_ref)`, i.e. the propagation
    /// constant offset `(β² − k0²n_ref²)/(2k0·n_ref)`, plus the residual norm
    /// `‖HE − λE‖/‖E‖`.
    pub fn rayleigh_quotient(&mut self, field: &ComplexField) -> (f64, f64) {
        let h = self.apply_operator(&field.amplitudes);
        let ee: f64 = field.amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let ehe: Complex64 = field.amplitudes.iter().zip(&h).map(|(a, b)| a.conj() * b).sum();
        let lambda = ehe.re / ee;
        let res: f64 = h
            .iter()
            .zip(&field.amplitudes)
            .map(|(hb, a)| (hb - a * lambda).norm_sqr())
            .sum();
        (lambda, (res / ee).sqrt())
    }

    /// `(k⊥²/(2k0·n_ref) + shift)⁻¹` applied spectrally; the preconditioner of
    /// the mode solver.
    pub(crate) fn apply_kinetic_inverse(&mut self, data: &[Complex64], shift: f64) -> Vec<Complex64> {
        let mut work = data.to_vec();
        self.fft.forward(&mut work, &mut self.spec);
        let norm = 1.0 / self.grid.len() as f64;
        let c = 1.0 / (2.0 * self.grid.k0() * self.grid.reference_index);
        for (a, k2) in self.spec.iter_mut().zip(&self.k_perp2) {
            *a *= norm / (c * k2 + shift);
        }
        self.fft.inverse(&mut self.spec, &mut work);
        work
    }

    /// Deepest point of the index well, `max k0·(n² − n_ref²)/(2n_ref)`.
    pub(crate) fn potential_depth(&self) -> f64 {
        self.potential.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn apply_operator(&mut self, data: &[Complex64]) -> Vec<Complex64> {
        let mut work = data.to_vec();
        self.fft.forward(&mut work, &mut self.spec);
        let norm = 1.0 / self.grid.len() as f64;
        let c = -1.0 / (2.0 * self.grid.k0() * self.grid.reference_index);
        for (a, k2) in self.spec.iter_mut().zip(&self.k_perp2) {
            *a *= c * k2 * norm;
        }
        self.fft.inverse(&mut self.spec, &mut work);
        for ((w, a), v) in work.iter_mut().zip(data).zip(&self.potential) {
            *w += a * v;
        }
        work
    }
}

fn apply_factors(fft: &mut Fft2, spec: &mut [Complex64], f: &StepFactors, data: &mut [Complex64]) {
    for (a, s) in data.iter_mut().zip(&f.screen_half) {
        *a *= s;
    }
    fft.forward(data, spec);
    for (a, d) in spec.iter_mut().zip(&f.diffraction) {
        *a *= d;
    }
    fft.inverse(spec, data);
    for (a, s) in data.iter_mut().zip(&f.screen_half) {
        *a *= s;
    }
}

fn power_of(a: &[Complex64], cell: f64) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell
}

/// Result of [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub field: ComplexField,
    pub distance: f64,
    pub steps: usize,
    pub absorbed_power: f64,
}

/// Propagates `field` through `index` over `distance` µm.
pub fn propagate(field: &ComplexField, index: &IndexMap, distance: f64) -> Result<Propagation, BpmError> {
    let mut p = Propagator::new(&field.grid, index)?;
    let mut out = field.clone();
    p.advance(&mut out, distance)?;
    Ok(Propagation {
        field: out,
        distance: p.distance(),
        steps: p.steps(),
        absorbed_power: p.absorbed_power(),
    })
}
