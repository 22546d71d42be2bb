//! Phase stochastic resonance: interior maxima of the key-loss threshold as a
//! function of the phase-noise width.
//!
//! The normalized threshold `t/(t − C̄(σ))` is an increasing function of the
//! averaged interference term `C̄(σ)`, and `C̄` stays finite where the
//! threshold diverges (no-effect windows). Peaks are therefore located on
//! `C̄(σ)`: a three-point test on the grid, then golden-section refinement.
//! A single shared damping rate makes `C̄(σ) = d(σ)·Σ f_i cos θ_i` monotone,
//! so resonance needs sources with different noise scales.

use serde::Serialize;

use crate::error::ModelError;
use crate::roots;
use crate::threshold::{self, SweepGrid};
use crate::units::Detuning;
use crate::visibility::CrosstalkScene;

/// Relative margin by which a peak must exceed both ends of the sweep.
pub const PEAK_MARGIN: f64 = 1e-6;

/// Relative accuracy in σ of the refined peak position.
pub const PEAK_SIGMA_TOL: f64 = 1e-3;

fn harmonic_at(template: &CrosstalkScene, sigma: f64) -> f64 {
    template
        .with_sigma(sigma)
        .mean_harmonic()
        .expect("Gaussian noise has a closed-form damping")
}

fn exceeds(peak: f64, end: f64) -> bool {
    if peak.is_infinite() {
        return end.is_finite();
    }
    peak > end * (1.0 + PEAK_MARGIN)
}

/// Position of the interior maximum of the normalized threshold over the
/// sweep, or `None` if the curve peaks at an end of the grid.
pub fn find_psr(grid: &SweepGrid) -> Result<Option<f64>, ModelError> {
    grid.validate()?;
    let template = &grid.scene_template;
    let params = &template.params;
    let sig = &grid.sigma_values;
    if sig.len() < 3 {
        return Ok(None);
    }
    let c: Vec<f64> = sig.iter().map(|&s| harmonic_at(template, s)).collect();
    let mut best = 0;
    for (i, &v) in c.iter().enumerate() {
        if v > c[best] {
            best = i;
        }
    }
    if best == 0 || best == c.len() - 1 {
        return Ok(None);
    }
    let y = |cb: f64| threshold::normalized_from_harmonic(params, cb);
    let (y_peak, y_first, y_last) = (y(c[best])?, y(c[0])?, y(c[c.len() - 1])?);
    if !(exceeds(y_peak, y_first) && exceeds(y_peak, y_last)) {
        return Ok(None);
    }
    let (lo, hi) = (sig[best - 1], sig[best + 1]);
    let sigma_star = if lo > 0.0 {
        let tol = (1.0 + PEAK_SIGMA_TOL).ln();
        roots::golden_max(lo.ln(), hi.ln(), |u| harmonic_at(template, u.exp()), tol).exp()
    } else {
        roots::golden_max(lo, hi, |s| harmonic_at(template, s), PEAK_SIGMA_TOL * sig[best])
    };
    Ok(Some(sigma_star))
}

/// PSR positions over a grid of mismatch factors for a two-source scene.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsrMap {
    pub v_w1: Vec<f64>,
    pub v_w2: Vec<f64>,
    /// `sigma_star[i][j]` belongs to `(v_w1[i], v_w2[j])`.
    pub sigma_star: Vec<Vec<Option<f64>>>,
}

impl PsrMap {
    pub fn entries(&self) -> impl Iterator<Item = (f64, f64, Option<f64>)> + '_ {
        self.v_w1.iter().enumerate().flat_map(move |(i, &a)| {
            self.v_w2
                .iter()
                .enumerate()
                .map(move |(j, &b)| (a, b, self.sigma_star[i][j]))
        })
    }
}

pub fn psr_map(
    v_w1: &[f64],
    v_w2: &[f64],
    template: &CrosstalkScene,
    sigma_values: &[f64],
) -> Result<PsrMap, ModelError> {
    if template.sources.len() != 2 {
        return Err(ModelError::InvalidParameter {
            name: "sources",
            reason: format!("a PSR map needs exactly two sources, got {}", template.sources.len()),
        });
    }
    let mut sigma_star = Vec::with_capacity(v_w1.len());
    for &a in v_w1 {
        let mut row = Vec::with_capacity(v_w2.len());
        for &b in v_w2 {
            let mut scene = template.clone();
            scene.sources[0].detuning = Detuning::VOmega(a);
            scene.sources[1].detuning = Detuning::VOmega(b);
            let grid = SweepGrid {
                sigma_values: sigma_values.to_vec(),
                scene_template: scene,
            };
            row.push(find_psr(&grid)?);
        }
        sigma_star.push(row);
    }
    Ok(PsrMap {
        v_w1: v_w1.to_vec(),
        v_w2: v_w2.to_vec(),
        sigma_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threshold::log_space;
    use crate::units::{ChannelParams, CrosstalkSource};

    fn two_source(f1: f64, v1: f64, c1: f64, v2: f64, c2: f64) -> CrosstalkScene {
        CrosstalkScene::new(
            ChannelParams::default(),
            vec![
                CrosstalkSource::with_v_omega(f1, v1, c1),
                CrosstalkSource::with_v_omega(1.0 - f1, v2, c2),
            ],
            0.0,
        )
    }

    fn sweep() -> Vec<f64> {
        log_space(1e7, 1e12, 301)
    }

    /// Independent dense scan of `0.5e^{-k(0.1σ)²} − 0.5e^{-k(3σ)²}`.
    fn scan_peak(f1: f64) -> (f64, f64) {
        let k = 8.0 * std::f64::consts::PI.powi(2) * 50e-12f64.powi(2);
        (0..=200_000)
            .map(|i| 10f64.powf(7.0 + 5.0 * i as f64 / 200_000.0))
            .map(|s| {
                let c = f1 * (-k * (0.1 * s).powi(2)).exp() - (1.0 - f1) * (-k * (3.0 * s).powi(2)).exp();
                (c, s)
            })
            .fold((f64::MIN, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    }

    #[test]
    fn opposite_signs_with_different_scales_resonate() {
        let grid = SweepGrid::new(sweep(), two_source(0.5, 1.0, 0.1, -1.0, 3.0)).unwrap();
        let s = find_psr(&grid).unwrap().expect("interior maximum");
        let (c_max, s_scan) = scan_peak(0.5);
        assert!((c_max - 0.4957).abs() < 1e-4);
        assert!((s / s_scan - 1.0).abs() < 2e-3, "{s} vs {s_scan}");
    }

    #[test]
    fn equal_scales_do_not_resonate() {
        for (v1, v2) in [(1.0, 1.0), (-1.0, -1.0), (0.4, 0.4), (1.0, -0.3)] {
            let grid = SweepGrid::new(sweep(), two_source(0.5, v1, 1.0, v2, 1.0)).unwrap();
            assert_eq!(find_psr(&grid).unwrap(), None, "{v1} {v2}");
        }
    }

    #[test]
    fn quadrature_sources_do_not_resonate() {
        let grid = SweepGrid::new(sweep(), two_source(0.5, 0.0, 0.1, 0.0, 3.0)).unwrap();
        assert_eq!(find_psr(&grid).unwrap(), None);
        for p in threshold::threshold_vs_noise(&grid).unwrap() {
            assert!((p.normalized - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn map_is_symmetric_under_source_swap() {
        let vs = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let a = psr_map(&vs, &vs, &two_source(0.5, 0.0, 0.1, 0.0, 3.0), &sweep()).unwrap();
        let b = psr_map(&vs, &vs, &two_source(0.5, 0.0, 3.0, 0.0, 0.1), &sweep()).unwrap();
        for i in 0..vs.len() {
            for j in 0..vs.len() {
                assert_eq!(a.sigma_star[i][j], b.sigma_star[j][i]);
            }
        }
        assert!(a.sigma_star[4][0].is_some());
        assert_eq!(a.sigma_star[2][2], None);
    }

    #[test]
    fn map_needs_two_sources() {
        let mut t = two_source(0.5, 1.0, 0.1, -1.0, 3.0);
        t.sources.pop();
        assert!(psr_map(&[0.0], &[0.0], &t, &sweep()).is_err());
    }
}
