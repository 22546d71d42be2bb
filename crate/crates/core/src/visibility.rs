//! Visibility of the receiver's monitoring interferometer under crosstalk
//! from several cores,
//!
//! ```text
//!         d2 − d1 + Σ w_i·cos(θ_i + 4π·f_i·ΔT)
//!     V = ------------------------------------,    w_i = α·P_i
//!                 d2 + d1 + Σ w_i
//! ```
//!
//! evaluated either by Monte-Carlo over the frequency noise `f_i` or with the
//! cosine replaced by its exact Gaussian expectation.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::noise::{self, McConfig, NoiseSpec, SampleMean};
use crate::units::{ChannelParams, CrosstalkSource};

/// Monte-Carlo estimate of the mean visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosstalkScene {
    pub params: ChannelParams,
    pub sources: Vec<CrosstalkSource>,
    /// Global noise width; source `i` uses `noise_scale_i · global_sigma_hz`.
    pub global_sigma_hz: f64,
}

impl CrosstalkScene {
    pub fn new(params: ChannelParams, sources: Vec<CrosstalkSource>, global_sigma_hz: f64) -> Self {
        CrosstalkScene {
            params,
            sources,
            global_sigma_hz,
        }
    }

    pub fn clean(params: ChannelParams) -> Self {
        Self::new(params, Vec::new(), 0.0)
    }

    pub fn with_sigma(&self, global_sigma_hz: f64) -> Self {
        CrosstalkScene {
            global_sigma_hz,
            ..self.clone()
        }
    }

    /// Same scene with every source power multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let sources = self
            .sources
            .iter()
            .map(|s| CrosstalkSource {
                power_rel: s.power_rel * factor,
                ..*s
            })
            .collect();
        CrosstalkScene {
            sources,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.params.validate()?;
        NoiseSpec::gaussian(self.global_sigma_hz).validate()?;
        for s in &self.sources {
            s.validate()?;
            if !s.weight(&self.params).is_finite() {
                return Err(ModelError::InvalidParameter {
                    name: "power_rel",
                    reason: "weight α·P is not finite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<f64> {
        self.sources.iter().map(|s| s.weight(&self.params)).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights().iter().sum()
    }

    pub fn source_noise(&self, index: usize) -> NoiseSpec {
        NoiseSpec::gaussian(self.sources[index].noise_scale * self.global_sigma_hz)
    }

    pub fn source_phase(&self, index: usize) -> f64 {
        self.sources[index].detuning.phase(self.params.delta_t)
    }

    /// Expected interference term `c̄_i = cos θ_i · damping(σ_i)` per source.
    pub fn mean_cosines(&self) -> Result<Vec<f64>, ModelError> {
        (0..self.sources.len())
            .map(|i| {
                let d = noise::damping_factor(&self.source_noise(i), self.params.delta_t)?;
                Ok(self.source_phase(i).cos() * d)
            })
            .collect()
    }

    /// Weight-averaged expected interference term `C̄ = Σ f_i·c̄_i` with
    /// `f_i = w_i / Σw`. Zero for a scene without weight.
    pub fn mean_harmonic(&self) -> Result<f64, ModelError> {
        let w = self.weights();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            return Ok(0.0);
        }
        let c = self.mean_cosines()?;
        Ok(w.iter().zip(&c).map(|(wi, ci)| wi / total * ci).sum())
    }
}

/// Per-trial weighted interference sum `Σ w_i·cos(θ_i + 4π·f_ij·ΔT)`.
fn harmonic_samples(scene: &CrosstalkScene, mc: &McConfig) -> Vec<f64> {
    let dt = scene.params.delta_t;
    let terms: Vec<(f64, f64, NoiseSpec)> = (0..scene.sources.len())
        .map(|i| {
            (
                scene.sources[i].weight(&scene.params),
                scene.source_phase(i),
                scene.source_noise(i),
            )
        })
        .collect();
    (0..mc.n_samples as u64)
        .map(|j| {
            terms
                .iter()
                .enumerate()
                .map(|(i, (w, theta, spec))| {
                    let f = noise::freq_noise_draw(spec, mc.master_seed, i as u64, j);
                    w * (theta + noise::noise_phase(f, dt)).cos()
                })
                .sum()
        })
        .collect()
}

/// Monte-Carlo mean of the weight-normalized interference term
/// `Σ f_i·cos(θ_i + 4π·f_ij·ΔT)`; converges to [`CrosstalkScene::mean_harmonic`].
pub fn harmonic_mc(scene: &CrosstalkScene, mc: &McConfig) -> SampleMean {
    let total = scene.total_weight();
    if scene.sources.is_empty() || total == 0.0 {
        return SampleMean {
            mean: 0.0,
            std_err: 0.0,
            n: mc.n_samples,
        };
    }
    let values: Vec<f64> = harmonic_samples(scene, mc).into_iter().map(|h| h / total).collect();
    SampleMean::from_values(&values)
}

pub fn visibility_mc(scene: &CrosstalkScene, mc: &McConfig) -> VisibilityEstimate {
    let p = &scene.params;
    if scene.sources.is_empty() {
        return VisibilityEstimate {
            mean: p.baseline_visibility(),
            std_err: 0.0,
            n_samples: mc.n_samples,
        };
    }
    let num0 = p.click_difference();
    let den = p.click_sum() + scene.total_weight();
    let values: Vec<f64> = harmonic_samples(scene, mc)
        .into_iter()
        .map(|h| (num0 + h) / den)
        .collect();
    let m = SampleMean::from_values(&values);
    VisibilityEstimate {
        mean: m.mean,
        std_err: m.std_err,
        n_samples: mc.n_samples,
    }
}

/// Visibility with each cosine replaced by its exact Gaussian expectation.
pub fn visibility_avg(scene: &CrosstalkScene) -> Result<f64, ModelError> {
    let p = &scene.params;
    let mut num = p.click_difference();
    let mut den = p.click_sum();
    for (w, c) in scene.weights().iter().zip(scene.mean_cosines()?) {
        num += w * c;
        den += w;
    }
    Ok(num / den)
}

/// Accidental-click QBER: crosstalk clicks carry no key information and err
/// with probability 1/2,
/// `(e0·(d1 + d2) + Σw/2) / (d1 + d2 + Σw)`.
pub fn qber_estimate(scene: &CrosstalkScene, baseline_qber: f64) -> Result<f64, ModelError> {
    if !(0.0..0.5).contains(&baseline_qber) {
        return Err(ModelError::InvalidParameter {
            name: "baseline_qber",
            reason: format!("must lie in [0, 0.5), got {baseline_qber}"),
        });
    }
    let sd = scene.params.click_sum();
    let w = scene.total_weight();
    Ok((baseline_qber * sd + 0.5 * w) / (sd + w))
}
