//! Guided modes of a sampled index map.
//!
//! The fundamental mode is the top eigenvector of the discrete paraxial
//! operator `H = ∇⊥²/(2k0·n_ref) + k0·(n² − n_ref²)/(2n_ref)`, found with
//! locally optimal preconditioned conjugate gradients on `−H`. The
//! preconditioner is the inverse of the shifted kinetic term, so the iteration
//! count barely depends on the grid spacing.

use num_complex::Complex64;

use super::field::{launch_mode, ComplexField};
use super::geometry::{isolated_core_map, FiberCrossSection, IndexMap};
use super::grid::BpmGrid;
use super::propagate::Propagator;
use crate::error::BpmError;

/// Mirror constraint imposed on a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorSymmetry {
    None,
    /// `E(−x, y) = E(x, y)`
    EvenX,
    /// `E(−x, y) = −E(x, y)`
    OddX,
}

#[derive(Debug, Clone, Copy)]
pub struct ModeSolverSettings {
    pub max_iterations: usize,
    /// Converged once `‖HE − λE‖ < residual_tol` for unit `‖E‖`, /µm.
    pub residual_tol: f64,
    pub symmetry: MirrorSymmetry,
}

impl Default for ModeSolverSettings {
    fn default() -> Self {
        ModeSolverSettings {
            max_iterations: 3000,
            residual_tol: 1e-11,
            symmetry: MirrorSymmetry::None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModeSolution {
    /// Unit power.
    pub field: ComplexField,
    /// `(β² − k0²n_ref²)/(2k0·n_ref)`, /µm.
    pub eigenvalue: f64,
    pub effective_index: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p.re * q.re + p.im * q.im).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [Complex64], s: f64) {
    a.iter_mut().for_each(|v| *v *= s);
}

fn combine(vs: &[&Vec<Complex64>], c: &[f64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); vs[0].len()];
    for (v, &ci) in vs.iter().zip(c) {
        if ci != 0.0 {
            for (o, x) in out.iter_mut().zip(v.iter()) {
                *o += x * ci;
            }
        }
    }
    out
}

/// Lowest eigenpair of the symmetric-definite pencil `(s, m)`, or `None` when
/// `m` is numerically singular.
fn smallest_generalized(s: &[Vec<f64>], m: &[Vec<f64>]) -> Option<(f64, Vec<f64>)> {
    let n = s.len();
    // Cholesky m = L Lᵀ
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let sum: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = m[i][i] - sum;
                if d <= 1e-12 * m[i][i] {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (m[i][j] - sum) / l[j][j];
            }
        }
    }
    // c = L⁻¹ s L⁻ᵀ
    let solve_lower = |b: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
        }
        y
    };
    let cols: Vec<Vec<f64>> = (0..n).map(|j| solve_lower(&(0..n).map(|i| s[i][j]).collect::<Vec<_>>())).collect();
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        let row = solve_lower(&(0..n).map(|j| cols[j][i]).collect::<Vec<_>>());
        for j in 0..n {
            c[i][j] = row[j];
        }
    }
    let (vals, vecs) = jacobi_eigen(c);
    let k = (0..n).min_by(|&a, &b| vals[a].total_cmp(&vals[b]))?;
    // back-substitute Lᵀ x = y
    let y: Vec<f64> = (0..n).map(|i| vecs[i][k]).collect();
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - ((i + 1)..n).map(|r| l[r][i] * x[r]).sum::<f64>()) / l[i][i];
    }
    Some((vals[k], x))
}

/// Cyclic Jacobi for a small symmetric matrix; eigenvectors are the columns.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

pub(crate) fn impose_symmetry(data: &mut [Complex64], nx: usize, symmetry: MirrorSymmetry) {
    let sign = match symmetry {
        MirrorSymmetry::None => return,
        MirrorSymmetry::EvenX => 1.0,
        MirrorSymmetry::OddX => -1.0,
    };
    for row in data.chunks_mut(nx) {
        for i in 0..nx / 2 {
            let j = nx - 1 - i;
            let s = 0.5 * (row[i] + row[j] * sign);
            row[i] = s;
            row[j] = s * sign;
        }
        if nx % 2 == 1 && sign < 0.0 {
            row[nx / 2] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Converges `trial` onto the highest-eigenvalue (fundamental) mode of
/// `index` within the requested mirror symmetry class.
pub fn solve_mode(index: &IndexMap, trial: &ComplexField, settings: &ModeSolverSettings) -> Result<ModeSolution, BpmError> {
    let grid = trial.grid.clone();
    let nx = grid.nx;
    let mut p = Propagator::new(&grid, index)?;
    let shift = p.potential_depth().max(1e-6);
    // a = −H
    let apply_a = |p: &mut Propagator, v: &[Complex64]| -> Vec<Complex64> {
        let mut h = p.apply_operator(v);
        h.iter_mut().for_each(|z| *z = -*z);
        h
    };

    let mut x = trial.amplitudes.clone();
    impose_symmetry(&mut x, nx, settings.symmetry);
    let nrm = norm(&x);
    if !(nrm > 0.0 && nrm.is_finite()) {
        return Err(BpmError::DegenerateField);
    }
    scale(&mut x, 1.0 / nrm);
    let mut ax = apply_a(&mut p, &x);
    let mut dir: Option<(Vec<Complex64>, Vec<Complex64>)> = None;
    let mut lambda = dot(&x, &ax);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        if iterations % 50 == 49 {
            ax = apply_a(&mut p, &x);
            lambda = dot(&x, &ax);
        }
        let r: Vec<Complex64> = ax.iter().zip(&x).map(|(a, b)| a - b * lambda).collect();
        residual = norm(&r);
        if residual < settings.residual_tol {
            break;
        }
        iterations += 1;
        let mut w = p.apply_kinetic_inverse(&r, shift);
        impose_symmetry(&mut w, nx, settings.symmetry);
        let wn = norm(&w);
        if !(wn > 0.0 && wn.is_finite()) {
            break;
        }
        scale(&mut w, 1.0 / wn);
        let aw = apply_a(&mut p, &w);

        let mut step = None;
        for use_dir in [true, false] {
            let mut basis: Vec<&Vec<Complex64>> = vec![&x, &w];
            let mut images: Vec<&Vec<Complex64>> = vec![&ax, &aw];
            if use_dir {
                match &dir {
                    Some((d, ad)) => {
                        basis.push(d);
                        images.push(ad);
                    }
                    None => continue,
                }
            }
            let n = basis.len();
            let mut s = vec![vec![0.0; n]; n];
            let mut m = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i..n {
                    let sij = 0.5 * (dot(basis[i], images[j]) + dot(basis[j], images[i]));
                    s[i][j] = sij;
                    s[j][i] = sij;
                    let mij = dot(basis[i], basis[j]);
                    m[i][j] = mij;
                    m[j][i] = mij;
                }
            }
            if let Some((mu, c)) = smallest_generalized(&s, &m) {
                let new_dir = combine(&basis[1..], &c[1..]);
                let new_adir = combine(&images[1..], &c[1..]);
                let new_x = combine(&basis, &c);
                let new_ax = combine(&images, &c);
                step = Some((mu, new_x, new_ax, new_dir, new_adir));
                break;
            }
        }
        let Some((_, mut nx_, mut nax, mut nd, mut nad)) = step else {
            break;
        };
        let xn = norm(&nx_);
        scale(&mut nx_, 1.0 / xn);
        scale(&mut nax, 1.0 / xn);
        let dn = norm(&nd);
        if dn > 0.0 {
            scale(&mut nd, 1.0 / dn);
            scale(&mut nad, 1.0 / dn);
            dir = Some((nd, nad));
        } else {
            dir = None;
        }
        x = nx_;
        ax = nax;
        lambda = dot(&x, &ax);
    }

    let mut field = ComplexField {
        grid: grid.clone(),
        amplitudes: x,
    };
    field.normalize()?;
    let eigenvalue = -lambda;
    let k0 = grid.k0();
    let nref = grid.reference_index;
    let beta2 = k0 * k0 * nref * nref + 2.0 * k0 * nref * eigenvalue;
    Ok(ModeSolution {
        field,
        eigenvalue,
        effective_index: beta2.sqrt() / k0,
        residual,
        iterations,
    })
}

/// Fundamental mode of core `core` alone (other cores and trenches removed).
pub fn core_mode(xs: &FiberCrossSection, grid: &BpmGrid, core: usize) -> Result<ModeSolution, BpmError> {
    let map = isolated_core_map(xs, grid, core)?;
    let trial = launch_mode(core, xs, grid)?.field;
    solve_mode(&map, &trial, &ModeSolverSettings::default())
}

fn mirrored(field: &ComplexField, flip_x: bool, flip_y: bool) -> ComplexField {
    let (nx, ny) = (field.grid.nx, field.grid.ny);
    let mut out = field.clone();
    for iy in 0..ny {
        let sy = if flip_y { ny - 1 - iy } else { iy };
        for ix in 0..nx {
            let sx = if flip_x { nx - 1 - ix } else { ix };
            out.amplitudes[iy * nx + ix] = field.amplitudes[sy * nx + sx];
        }
    }
    out
}

/// Isolated-core modes of every core. Cores that are mirror images of an
/// already solved core (about the grid axes) reuse its mode; the others are
/// solved individually.
pub fn core_modes(xs: &FiberCrossSection, grid: &BpmGrid) -> Result<Vec<ModeSolution>, BpmError> {
    let centers = xs.core_centers();
    let mut solved: Vec<((f64, f64), ModeSolution)> = Vec::new();
    let mut out = Vec::with_capacity(centers.len());
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
    for (k, &(cx, cy)) in centers.iter().enumerate() {
        let reuse = solved.iter().find_map(|((sx, sy), m)| {
            for (fx, fy) in [(false, false), (true, false), (false, true), (true, true)] {
                let mx = if fx { -sx } else { *sx };
                let my = if fy { -sy } else { *sy };
                if same(mx, cx) && same(my, cy) {
                    return Some(ModeSolution {
                        field: mirrored(&m.field, fx, fy),
                        ..m.clone()
                    });
                }
            }
            None
        });
        let mode = match reuse {
            Some(m) => m,
            None => {
                let m = core_mode(xs, grid, k)?;
                if m.eigenvalue <= 0.0 {
                    log::warn!(
                        "core {k} has no guided mode on this grid (n_eff {:.6} <= cladding {:.6})",
                        m.effective_index,
                        grid.reference_index
                    );
                }
                solved.push(((cx, cy), m.clone()));
                m
            }
        };
        out.push(mode);
    }
    Ok(out)
}
