//! Key-loss threshold of the crosstalk weight and its dependence on phase noise.
//!
//! With the weight fractions of a scene held fixed and the total weight `s`
//! free, the averaged visibility is
//!
//! ```text
//!     V(s) = (ΔD + s·C̄) / (SD + s),    ΔD = d2 − d1,  SD = d2 + d1
//! ```
//!
//! which moves monotonically from the baseline `ΔD/SD` at `s = 0` to the
//! asymptote `C̄` (the weight-averaged expected interference term). The
//! threshold `s*` solves `V(s*) = t`.

use serde::Serialize;

use crate::error::ModelError;
use crate::noise::McConfig;
use crate::roots;
use crate::units::linear_to_db;
use crate::visibility::{self, CrosstalkScene};

/// Outcome of a threshold search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum ThresholdResult {
    /// Visibility drops to the threshold at total crosstalk weight `scale`.
    Crossing { scale: f64 },
    /// The clean channel is already at or below the threshold.
    AlwaysBelow,
    /// Visibility stays above the threshold for any crosstalk weight.
    NoEffect,
}

impl ThresholdResult {
    pub fn scale(&self) -> Option<f64> {
        match *self {
            ThresholdResult::Crossing { scale } => Some(scale),
            _ => None,
        }
    }

    /// `(αΣP)⁻¹` at the crossing.
    pub fn inv_threshold(&self) -> Option<f64> {
        self.scale().map(|s| 1.0 / s)
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ThresholdResult::Crossing { .. } => "Crossing",
            ThresholdResult::AlwaysBelow => "AlwaysBelow",
            ThresholdResult::NoEffect => "NoEffect",
        }
    }
}

/// How visibility is evaluated during a bisection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VisibilityModel {
    Averaged,
    MonteCarlo(McConfig),
}

fn check_template(scene: &CrosstalkScene) -> Result<f64, ModelError> {
    scene.validate()?;
    let total = scene.total_weight();
    if scene.sources.is_empty() || total <= 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "sources",
            reason: "a threshold needs at least one source with positive weight".into(),
        });
    }
    Ok(total)
}

/// Classifies and solves `V(s) = t` for given interference asymptote `c_bar`.
pub fn threshold_from_harmonic(params: &crate::units::ChannelParams, c_bar: f64) -> ThresholdResult {
    let t = params.visibility_threshold;
    let (dd, sd) = (params.click_difference(), params.click_sum());
    if params.baseline_visibility() <= t {
        ThresholdResult::AlwaysBelow
    } else if c_bar >= t {
        ThresholdResult::NoEffect
    } else {
        ThresholdResult::Crossing {
            scale: (t * sd - dd) / (c_bar - t),
        }
    }
}

/// Closed-form threshold of the averaged visibility. Only the weight
/// fractions of `template` matter.
pub fn find_threshold(template: &CrosstalkScene) -> Result<ThresholdResult, ModelError> {
    check_template(template)?;
    Ok(threshold_from_harmonic(&template.params, template.mean_harmonic()?))
}

/// Threshold by bisection on the total crosstalk weight. With
/// [`VisibilityModel::MonteCarlo`] every evaluation reuses the same seed, so
/// the estimated visibility is a smooth monotone function of the weight.
pub fn find_threshold_bisect(
    template: &CrosstalkScene,
    model: VisibilityModel,
) -> Result<ThresholdResult, ModelError> {
    let total = check_template(template)?;
    let params = &template.params;
    let t = params.visibility_threshold;
    if params.baseline_visibility() <= t {
        return Ok(ThresholdResult::AlwaysBelow);
    }
    let asymptote = match model {
        VisibilityModel::Averaged => template.mean_harmonic()?,
        VisibilityModel::MonteCarlo(mc) => visibility::harmonic_mc(template, &mc).mean,
    };
    if asymptote >= t {
        return Ok(ThresholdResult::NoEffect);
    }
    let visibility_at = |s: f64| -> f64 {
        let scene = template.scaled(s / total);
        match model {
            VisibilityModel::Averaged => visibility::visibility_avg(&scene).unwrap_or(f64::NAN),
            VisibilityModel::MonteCarlo(mc) => visibility::visibility_mc(&scene, &mc).mean,
        }
    };
    let mut hi = 1.0;
    while visibility_at(hi) >= t {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(ModelError::Bracketing("visibility never fell below threshold".into()));
        }
    }
    let s = roots::bisect(0.0, hi, |s| visibility_at(s) - t, 1e-13, 0.0)?;
    Ok(ThresholdResult::Crossing { scale: s })
}

/// Threshold weight in the limit of infinite phase noise, where every
/// interference term averages out: `(ΔD − t·SD)/t`.
pub fn infinite_noise_threshold(params: &crate::units::ChannelParams) -> Result<f64, ModelError> {
    let t = params.visibility_threshold;
    let s_inf = (params.click_difference() - t * params.click_sum()) / t;
    if s_inf <= 0.0 {
        return Err(ModelError::BaselineBelowThreshold {
            baseline: params.baseline_visibility(),
            threshold: t,
        });
    }
    Ok(s_inf)
}

/// A scene shape swept over global noise widths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub sigma_values: Vec<f64>,
    pub scene_template: CrosstalkScene,
}

impl SweepGrid {
    pub fn new(sigma_values: Vec<f64>, scene_template: CrosstalkScene) -> Result<Self, ModelError> {
        let g = SweepGrid {
            sigma_values,
            scene_template,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        check_template(&self.scene_template)?;
        if self.sigma_values.is_empty() {
            return Err(ModelError::InvalidParameter {
                name: "sigma_hz",
                reason: "sweep has no points".into(),
            });
        }
        if self.sigma_values.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(ModelError::InvalidParameter {
                name: "sigma_hz",
                reason: "noise widths must be finite and >= 0".into(),
            });
        }
        if self.sigma_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::InvalidParameter {
                name: "sigma_hz",
                reason: "noise widths must be strictly increasing".into(),
            });
        }
        Ok(())
    }
}

/// `n` logarithmically spaced values from `start` to `stop` inclusive.
pub fn log_space(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let (a, b) = (start.ln(), stop.ln());
            (0..n)
                .map(|i| match i {
                    0 => start,
                    i if i == n - 1 => stop,
                    _ => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdPoint {
    pub sigma_hz: f64,
    pub result: ThresholdResult,
    /// `s*(σ)/s∞`; `+inf` marks a no-effect point.
    pub normalized: f64,
}

impl ThresholdPoint {
    /// Threshold weight in dB, `+inf` for no-effect points.
    pub fn scale_db(&self) -> f64 {
        match self.result {
            ThresholdResult::Crossing { scale } => linear_to_db(scale),
            ThresholdResult::NoEffect => f64::INFINITY,
            ThresholdResult::AlwaysBelow => f64::NEG_INFINITY,
        }
    }
}

/// Normalized threshold `s*/s∞` for an interference asymptote `c_bar`; this
/// reduces to `t/(t − C̄)`.
pub fn normalized_from_harmonic(params: &crate::units::ChannelParams, c_bar: f64) -> Result<f64, ModelError> {
    let s_inf = infinite_noise_threshold(params)?;
    Ok(match threshold_from_harmonic(params, c_bar) {
        ThresholdResult::Crossing { scale } => scale / s_inf,
        ThresholdResult::NoEffect => f64::INFINITY,
        ThresholdResult::AlwaysBelow => unreachable!("baseline checked by infinite_noise_threshold"),
    })
}

/// Threshold at each noise width, normalized to the infinite-noise value.
pub fn threshold_vs_noise(grid: &SweepGrid) -> Result<Vec<ThresholdPoint>, ModelError> {
    grid.validate()?;
    let params = &grid.scene_template.params;
    let s_inf = infinite_noise_threshold(params)?;
    grid.sigma_values
        .iter()
        .map(|&sigma| {
            let result = find_threshold(&grid.scene_template.with_sigma(sigma))?;
            let normalized = match result {
                ThresholdResult::Crossing { scale } => scale / s_inf,
                ThresholdResult::NoEffect => f64::INFINITY,
                ThresholdResult::AlwaysBelow => unreachable!("baseline above threshold"),
            };
            Ok(ThresholdPoint {
                sigma_hz: sigma,
                result,
                normalized,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrPoint {
    pub sigma_hz: f64,
    pub result: ThresholdResult,
    /// Threshold crosstalk weight in dB; `+inf` inside a no-effect region.
    pub snr_db: f64,
}

impl SnrPoint {
    pub fn no_effect(&self) -> bool {
        matches!(self.result, ThresholdResult::NoEffect)
    }
}

/// Key-loss threshold weight in dB versus noise width.
pub fn snr_curve(grid: &SweepGrid) -> Result<Vec<SnrPoint>, ModelError> {
    Ok(threshold_vs_noise(grid)?
        .into_iter()
        .map(|p| SnrPoint {
            sigma_hz: p.sigma_hz,
            result: p.result,
            snr_db: p.scale_db(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{ChannelParams, CrosstalkSource};

    fn single(v: f64, params: ChannelParams) -> CrosstalkScene {
        CrosstalkScene::new(params, vec![CrosstalkSource::with_v_omega(1.0, v, 1.0)], 0.0)
    }

    #[test]
    fn documented_crossing_is_one_ninth() {
        let params = ChannelParams::new(0.0, 1.0).unwrap();
        let r = find_threshold(&single(-1.0, params)).unwrap();
        let s = r.scale().unwrap();
        assert!((s - 1.0 / 9.0).abs() < 1e-15, "{s}");
        assert!((r.inv_threshold().unwrap() - 9.0).abs() < 1e-12);
        let b = find_threshold_bisect(&single(-1.0, params), VisibilityModel::Averaged).unwrap();
        assert!((b.scale().unwrap() - s).abs() / s < 1e-9);
    }

    #[test]
    fn always_below_and_no_effect() {
        let low = ChannelParams::new(0.15, 0.85).unwrap();
        assert!((low.baseline_visibility() - 0.7).abs() < 1e-15);
        assert_eq!(find_threshold(&single(-1.0, low)).unwrap(), ThresholdResult::AlwaysBelow);
        let ok = ChannelParams::default();
        assert_eq!(find_threshold(&single(0.9, ok)).unwrap(), ThresholdResult::NoEffect);
        assert_eq!(
            find_threshold_bisect(&single(0.9, ok), VisibilityModel::Averaged).unwrap(),
            ThresholdResult::NoEffect
        );
    }

    #[test]
    fn crossing_hits_threshold() {
        let params = ChannelParams::default();
        let scene = CrosstalkScene::new(
            params,
            vec![
                CrosstalkSource::with_v_omega(0.4, 0.2, 1.0),
                CrosstalkSource::with_v_omega(1.1, -0.6, 0.3),
            ],
            1e9,
        );
        let s = find_threshold(&scene).unwrap().scale().unwrap();
        let v = visibility::visibility_avg(&scene.scaled(s / scene.total_weight())).unwrap();
        assert!((v - 0.8).abs() < 1e-12);
    }

    #[test]
    fn empty_template_rejected() {
        let scene = CrosstalkScene::clean(ChannelParams::default());
        assert!(find_threshold(&scene).is_err());
    }

    #[test]
    fn anti_phase_threshold_rises_with_noise() {
        let grid = SweepGrid::new(log_space(1e7, 1e12, 200), single(-1.0, ChannelParams::default())).unwrap();
        let curve = threshold_vs_noise(&grid).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].normalized >= w[0].normalized);
        }
        assert!(curve[0].normalized < 0.5);
        assert!((curve.last().unwrap().normalized - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_noise_requires_margin() {
        let low = ChannelParams::new(0.15, 0.85).unwrap();
        let grid = SweepGrid {
            sigma_values: vec![1.0, 2.0],
            scene_template: single(-1.0, low),
        };
        assert!(matches!(
            threshold_vs_noise(&grid),
            Err(ModelError::BaselineBelowThreshold { .. })
        ));
    }

    #[test]
    fn sweep_grid_rejects_unsorted() {
        assert!(SweepGrid::new(vec![2.0, 1.0], single(-1.0, ChannelParams::default())).is_err());
        assert!(SweepGrid::new(vec![-1.0, 1.0], single(-1.0, ChannelParams::default())).is_err());
    }

    #[test]
    fn flat_snr_without_interference() {
        let params = ChannelParams::default();
        let grid = SweepGrid::new(log_space(1e6, 1e11, 20), single(0.0, params)).unwrap();
        let s_inf = infinite_noise_threshold(&params).unwrap();
        for p in snr_curve(&grid).unwrap() {
            assert!((p.snr_db - linear_to_db(s_inf)).abs() < 1e-9);
        }
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e3, 1e9, 7);
        assert_eq!(v[0], 1e3);
        assert_eq!(v[6], 1e9);
        assert!((v[3] - 1e6).abs() / 1e6 < 1e-12);
    }
}
