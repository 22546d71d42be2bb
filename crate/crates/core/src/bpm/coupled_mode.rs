//! Analytic coupled-mode coefficient for two identical step-index cores in the
//! weak-guidance limit.

use super::field::{v_number, SINGLE_MODE_CUTOFF};
use crate::error::BpmError;
use crate::roots::bisect;
use crate::special::{bessel_j0, bessel_j1, bessel_k0, bessel_k1};

/// Core and cladding parameters `U`, `W` of the LP01 mode, `U² + W² = V²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lp01 {
    pub v: f64,
    pub u: f64,
    pub w: f64,
}

impl Lp01 {
    /// Normalized propagation constant `b = W²/V²`.
    pub fn b(&self) -> f64 {
        (self.w / self.v).powi(2)
    }
}

/// Solves `U·J1(U)/J0(U) = W·K1(W)/K0(W)` for the fundamental mode.
pub fn lp01(v: f64) -> Result<Lp01, BpmError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(BpmError::Geometry(format!("V-number must be positive, got {v}")));
    }
    let hi = v.min(SINGLE_MODE_CUTOFF) * (1.0 - 1e-12);
    let f = |u: f64| {
        let w = (v * v - u * u).sqrt();
        u * bessel_j1(u) / bessel_j0(u) - w * bessel_k1(w) / bessel_k0(w)
    };
    let u = bisect(1e-9 * v, hi, f, 1e-14, 0.0).map_err(|e| BpmError::Geometry(e.to_string()))?;
    Ok(Lp01 {
        v,
        u,
        w: (v * v - u * u).sqrt(),
    })
}

/// Coupling coefficient (/µm) between two identical step-index cores of
/// radius `a` at center spacing `d`:
/// `κ = (√(2Δ)/a)·(U²/V³)·K0(W·d/a)/K1(W)²`, `Δ = (n1² − n2²)/(2n1²)`.
pub fn coupling_coefficient(a: f64, n_core: f64, n_clad: f64, wavelength: f64, d: f64) -> Result<f64, BpmError> {
    if !(d > 0.0) {
        return Err(BpmError::Geometry(format!("core spacing must be positive, got {d}")));
    }
    let v = v_number(a, n_core, n_clad, wavelength);
    let m = lp01(v)?;
    let delta = (n_core * n_core - n_clad * n_clad) / (2.0 * n_core * n_core);
    Ok((2.0 * delta).sqrt() / a * m.u * m.u / v.powi(3) * bessel_k0(m.w * d / a) / bessel_k1(m.w).powi(2))
}

/// Distance of complete power transfer, `π/(2κ)`.
pub fn transfer_length(kappa: f64) -> f64 {
    std::f64::consts::PI / (2.0 * kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp01_satisfies_the_dispersion_relation() {
        for v in [0.8, 1.2, 1.7064, 2.0, 2.4] {
            let m = lp01(v).unwrap();
            let lhs = m.u * bessel_j1(m.u) / bessel_j0(m.u);
            let rhs = m.w * bessel_k1(m.w) / bessel_k0(m.w);
            assert!((lhs - rhs).abs() < 1e-8, "V = {v}");
            assert!((m.u.hypot(m.w) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn b_agrees_with_the_rudolph_neumann_fit() {
        // b ≈ (1.1428 − 0.996/V)², good to ~0.2% for 1.5 < V < 2.5
        for v in [1.6f64, 2.0, 2.4] {
            let fit = (1.1428 - 0.996 / v).powi(2);
            let b = lp01(v).unwrap().b();
            assert!((b - fit).abs() < 4e-3, "V = {v}: {b} vs {fit}");
        }
    }

    #[test]
    fn kappa_decays_with_spacing() {
        let k40 = coupling_coefficient(3.5, 1.449, 1.444, 1.55, 40.0).unwrap();
        let k50 = coupling_coefficient(3.5, 1.449, 1.444, 1.55, 50.0).unwrap();
        assert!(k40 > k50);
        // asymptotically K0(x) ~ e^(−x)·sqrt(π/2x)
        let w = lp01(v_number(3.5, 1.449, 1.444, 1.55)).unwrap().w;
        let ratio = k40 / k50;
        let asym = (w * 10.0 / 3.5).exp() * (50.0f64 / 40.0).sqrt();
        assert!((ratio / asym - 1.0).abs() < 0.02, "{ratio} vs {asym}");
    }

    #[test]
    fn transfer_length_is_quarter_beat() {
        assert!((transfer_length(1e-3) - 1570.796_326_794_896_6).abs() < 1e-9);
    }
}
