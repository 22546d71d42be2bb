//! Phase-noise engine: samples the zero-mean frequency jitter `f_n` of an
//! interferer and averages the interference cosine `cos(θ + 4π·f_n·ΔT)`.
//!
//! Every draw is addressed by `(master_seed, source_index, trial_index)`; the
//! three are hashed into the seed of a short-lived PCG stream. Adding a source
//! or changing the trial count therefore never perturbs the draws of another
//! `(source, trial)` pair, and chunked or parallel evaluation reproduces the
//! sequential result bit for bit.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};
use rand_pcg::Pcg64Mcg;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

#[non_exhaustive]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
}

/// Zero-mean frequency noise with RMS deviation `sigma_hz`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma_hz: f64,
    #[serde(default)]
    pub distribution: NoiseDistribution,
}

impl NoiseSpec {
    pub fn gaussian(sigma_hz: f64) -> Self {
        NoiseSpec {
            sigma_hz,
            distribution: NoiseDistribution::Gaussian,
        }
    }

    /// Noise width giving an RMS interferometer phase excursion of
    /// `4π·σ·ΔT = phase_rms`.
    pub fn from_phase_rms(phase_rms: f64, delta_t: f64) -> Self {
        Self::gaussian(phase_rms / (4.0 * PI * delta_t))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.sigma_hz >= 0.0 && self.sigma_hz.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "sigma_hz",
                reason: format!("must be finite and >= 0, got {}", self.sigma_hz),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub master_seed: u64,
}

impl McConfig {
    pub fn new(n_samples: usize, master_seed: u64) -> Self {
        McConfig {
            n_samples,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.n_samples == 0 {
            return Err(ModelError::InvalidParameter {
                name: "n_samples",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Mean of Monte-Carlo samples with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleMean {
    pub mean: f64,
    /// Unbiased sample standard deviation over `√n`. Infinite for a single
    /// sample, since the spread is then unknown.
    pub std_err: f64,
    pub n: usize,
}

impl SampleMean {
    /// Two-pass mean and unbiased variance, shifted by the first value so that
    /// identical samples give their common value and a zero error exactly.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n > 0, "SampleMean of an empty sample");
        let shift = values[0];
        let offset = values.iter().map(|v| v - shift).sum::<f64>() / n as f64;
        let mean = shift + offset;
        let std_err = if n == 1 {
            f64::INFINITY
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        };
        SampleMean { mean, std_err, n }
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the sub-stream used by `source_index` in `trial_index`.
pub fn substream_seed(master_seed: u64, source_index: u64, trial_index: u64) -> u64 {
    let h = splitmix64(master_seed);
    let h = splitmix64(h ^ source_index.wrapping_mul(GOLDEN_GAMMA));
    splitmix64(h ^ trial_index)
}

/// Standard normal draw for one `(source, trial)` address.
pub fn standard_normal(master_seed: u64, source_index: u64, trial_index: u64) -> f64 {
    // the 128-bit state is two splitmix64 outputs; cheaper than seed_from_u64
    let seed = substream_seed(master_seed, source_index, trial_index);
    let mut rng = Pcg64Mcg::new(((seed as u128) << 64) | splitmix64(seed) as u128);
    StandardNormal.sample(&mut rng)
}

/// One frequency-noise draw in Hz.
pub fn freq_noise_draw(spec: &NoiseSpec, master_seed: u64, source_index: u64, trial: u64) -> f64 {
    match spec.distribution {
        NoiseDistribution::Gaussian => {
            if spec.sigma_hz == 0.0 {
                0.0
            } else {
                spec.sigma_hz * standard_normal(master_seed, source_index, trial)
            }
        }
    }
}

/// `n_samples` i.i.d. frequency offsets for source 0.
pub fn sample_freq_noise(spec: &NoiseSpec, mc: &McConfig) -> Vec<f64> {
    sample_source_noise(spec, mc, 0)
}

/// `n_samples` i.i.d. frequency offsets for the given source index.
pub fn sample_source_noise(spec: &NoiseSpec, mc: &McConfig, source_index: u64) -> Vec<f64> {
    (0..mc.n_samples as u64)
        .map(|j| freq_noise_draw(spec, mc.master_seed, source_index, j))
        .collect()
}

/// Phase excursion `4π·f·ΔT` produced by a frequency offset `f`.
#[inline]
pub fn noise_phase(freq_hz: f64, delta_t: f64) -> f64 {
    4.0 * PI * freq_hz * delta_t
}

/// Monte-Carlo mean of `cos(θ + 4π·f·ΔT)` over `mc.n_samples` draws of `f`.
pub fn averaged_cos(theta: f64, spec: &NoiseSpec, delta_t: f64, mc: &McConfig) -> SampleMean {
    let values: Vec<f64> = (0..mc.n_samples as u64)
        .map(|j| {
            let f = freq_noise_draw(spec, mc.master_seed, 0, j);
            (theta + noise_phase(f, delta_t)).cos()
        })
        .collect();
    SampleMean::from_values(&values)
}

/// Exact ratio `E[cos(θ + 4π·f·ΔT)] / cos θ`. For Gaussian noise this is the
/// characteristic function `exp(−8π²σ²ΔT²)`.
pub fn damping_factor(spec: &NoiseSpec, delta_t: f64) -> Result<f64, ModelError> {
    match spec.distribution {
        NoiseDistribution::Gaussian => {
            let s = noise_phase(spec.sigma_hz, delta_t);
            Ok((-0.5 * s * s).exp())
        }
        #[allow(unreachable_patterns)]
        other => Err(ModelError::UnsupportedDistribution(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DT: f64 = 50e-12;

    #[test]
    fn zero_sigma_gives_zero_samples() {
        let xs = sample_freq_noise(&NoiseSpec::gaussian(0.0), &McConfig::new(1000, 9));
        assert!(xs.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rms_concentrates() {
        // For n = 1e5 the RMS of a Gaussian has relative sd 1/sqrt(2n) ≈ 0.22 %,
        // so [990, 1010] Hz is a > 4σ window.
        let xs = sample_freq_noise(&NoiseSpec::gaussian(1e3), &McConfig::new(100_000, 1));
        let n = xs.len() as f64;
        let rms = (xs.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
        let mean = xs.iter().sum::<f64>() / n;
        assert!((990.0..=1010.0).contains(&rms), "rms = {rms}");
        assert!(mean.abs() < 4.0 * 1e3 / n.sqrt(), "mean = {mean}");
    }

    #[test]
    fn determinism_and_stream_independence() {
        let spec = NoiseSpec::gaussian(2e3);
        let mc = McConfig::new(500, 77);
        assert_eq!(sample_freq_noise(&spec, &mc), sample_freq_noise(&spec, &mc));
        // a longer run extends, never reshuffles, the shorter one
        let longer = sample_freq_noise(&spec, &McConfig::new(800, 77));
        assert_eq!(&longer[..500], &sample_freq_noise(&spec, &mc)[..]);
        let other = sample_source_noise(&spec, &mc, 1);
        assert_ne!(other, sample_freq_noise(&spec, &mc));
        let reseeded = sample_freq_noise(&spec, &McConfig::new(500, 78));
        assert_ne!(reseeded, sample_freq_noise(&spec, &mc));
    }

    #[test]
    fn averaged_cos_noiseless() {
        let r = averaged_cos(0.0, &NoiseSpec::gaussian(0.0), DT, &McConfig::new(1000, 3));
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.std_err, 0.0);
        let r = averaged_cos(0.7, &NoiseSpec::gaussian(0.0), DT, &McConfig::new(1000, 3));
        assert_eq!(r.mean, 0.7f64.cos());
    }

    #[test]
    fn averaged_cos_quadrature_is_zero() {
        let spec = NoiseSpec::from_phase_rms(0.8, DT);
        let r = averaged_cos(PI / 2.0, &spec, DT, &McConfig::new(100_000, 11));
        assert!(r.mean.abs() <= 4.0 * r.std_err, "{r:?}");
    }

    #[test]
    fn averaged_cos_matches_characteristic_function() {
        let spec = NoiseSpec::from_phase_rms(1.0, DT);
        let r = averaged_cos(0.0, &spec, DT, &McConfig::new(100_000, 5));
        let expected = (-0.5f64).exp();
        assert!((expected - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert!((r.mean - expected).abs() <= 4.0 * r.std_err, "{r:?}");
    }

    #[test]
    fn damping_examples() {
        assert_eq!(damping_factor(&NoiseSpec::gaussian(0.0), DT).unwrap(), 1.0);
        let d = damping_factor(&NoiseSpec::from_phase_rms(1.0, DT), DT).unwrap();
        assert!((d - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(damping_factor(&NoiseSpec::gaussian(1e15), DT).unwrap(), 0.0);
        let mut prev = 1.0;
        for k in 1..200 {
            let d = damping_factor(&NoiseSpec::gaussian(k as f64 * 2e7), DT).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn std_err_shrinks_as_inverse_sqrt_n() {
        let spec = NoiseSpec::from_phase_rms(1.0, DT);
        for seed in 0..5 {
            let a = averaged_cos(0.3, &spec, DT, &McConfig::new(10_000, seed));
            let b = averaged_cos(0.3, &spec, DT, &McConfig::new(40_000, seed + 100));
            let ratio = a.std_err / b.std_err;
            assert!((ratio - 2.0).abs() < 0.4, "ratio = {ratio}");
        }
    }

    #[test]
    fn theta_shift_by_full_turn() {
        let spec = NoiseSpec::from_phase_rms(0.5, DT);
        let mc = McConfig::new(2000, 4);
        for theta in [0.0, 0.4, 2.0, -1.0] {
            let a = averaged_cos(theta, &spec, DT, &mc);
            let b = averaged_cos(theta + 2.0 * PI, &spec, DT, &mc);
            assert!((a.mean - b.mean).abs() < 1e-12);
            assert!((a.std_err - b.std_err).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_mean_single_value() {
        let m = SampleMean::from_values(&[0.25]);
        assert_eq!(m.mean, 0.25);
        assert!(m.std_err.is_infinite());
    }
}
