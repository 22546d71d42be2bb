//! CSV grids and binary PGM images of index maps and field intensities.

use std::io::{self, Write};

use super::field::ComplexField;
use super::geometry::IndexMap;

/// Gray-level mapping for [`write_pgm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrayScale {
    /// Minimum to black, maximum to white.
    Linear,
    /// `10·log10(v/max)` clipped at `floor_db` (negative) to black.
    Decibel { floor_db: f64 },
}

/// One CSV row per `y` sample (top row = largest `y`), `nx` columns, no
/// header; values as `{:.8e}`.
pub fn write_csv_grid<W: Write>(mut w: W, nx: usize, ny: usize, values: &[f64]) -> io::Result<()> {
    check_len(nx, ny, values)?;
    for iy in (0..ny).rev() {
        let row = &values[iy * nx..(iy + 1) * nx];
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// 8-bit binary PGM (P5), top row = largest `y`.
pub fn write_pgm<W: Write>(mut w: W, nx: usize, ny: usize, values: &[f64], scale: GrayScale) -> io::Result<()> {
    check_len(nx, ny, values)?;
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let level = |v: f64| -> u8 {
        let t = match scale {
            GrayScale::Linear => {
                if max > min {
                    (v - min) / (max - min)
                } else {
                    0.0
                }
            }
            GrayScale::Decibel { floor_db } => {
                if max <= 0.0 || v <= 0.0 {
                    0.0
                } else {
                    let db = 10.0 * (v / max).log10();
                    1.0 - db / floor_db
                }
            }
        };
        (t.clamp(0.0, 1.0) * 255.0).round() as u8
    };
    write!(w, "P5\n{nx} {ny}\n255\n")?;
    let mut bytes = Vec::with_capacity(nx * ny);
    for iy in (0..ny).rev() {
        bytes.extend(values[iy * nx..(iy + 1) * nx].iter().map(|&v| level(v)));
    }
    w.write_all(&bytes)
}

fn check_len(nx: usize, ny: usize, values: &[f64]) -> io::Result<()> {
    if values.len() != nx * ny {
        return Err(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("{} values for a {nx}x{ny} grid", values.len()),
        ));
    }
    Ok(())
}

/// `|E|²` per µm², relative to the launched power.
pub fn normalized_intensity(field: &ComplexField, launched_power: f64) -> Vec<f64> {
    field.amplitudes.iter().map(|a| a.norm_sqr() / launched_power).collect()
}

pub fn write_index_csv<W: Write>(w: W, map: &IndexMap) -> io::Result<()> {
    write_csv_grid(w, map.nx, map.ny, &map.values)
}

pub fn write_index_pgm<W: Write>(w: W, map: &IndexMap) -> io::Result<()> {
    write_pgm(w, map.nx, map.ny, &map.values, GrayScale::Linear)
}
