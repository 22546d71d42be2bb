//! Shared domain types and unit conventions.
//!
//! All ratios in dB follow the power convention `10·log10`. Frequencies are in
//! Hz, times in seconds, and the interferometer phase of an interferer is
//! `θ = 2π·Δf·ΔT`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Carrier wavelength of the quantum channel, m.
pub const CARRIER_WAVELENGTH_M: f64 = 1550e-9;

/// Default delay of the monitoring interferometer, s.
pub const DEFAULT_DELAY_S: f64 = 50e-12;

/// Default crosstalk normalization α, dB.
pub const DEFAULT_ALPHA_DB: f64 = 15.0;

/// Default visibility below which key generation stops.
pub const DEFAULT_VISIBILITY_THRESHOLD: f64 = 0.80;

/// A dimensionless power ratio expressed in dB.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DecibelRatio(pub f64);

impl DecibelRatio {
    pub fn from_linear(ratio: f64) -> Self {
        DecibelRatio(linear_to_db(ratio))
    }

    pub fn db(self) -> f64 {
        self.0
    }

    pub fn linear(self) -> f64 {
        db_to_linear(self)
    }
}

/// `10^(x/10)`.
pub fn db_to_linear(x: DecibelRatio) -> f64 {
    10f64.powf(x.0 / 10.0)
}

/// `10·log10(ratio)`; `-inf` for a zero ratio.
pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Frequency-mismatch factor `cos²(ωΔT/2) − sin²(ωΔT/2) = cos(ωΔT)` with
/// `ω = 2π·freq_offset_hz`.
pub fn v_omega(freq_offset_hz: f64, delta_t: f64) -> f64 {
    interferer_phase(freq_offset_hz, delta_t).cos()
}

/// Deterministic interferometer phase `θ = 2π·Δf·ΔT` of an interferer.
pub fn interferer_phase(freq_offset_hz: f64, delta_t: f64) -> f64 {
    2.0 * PI * freq_offset_hz * delta_t
}

/// Converts a wavelength offset around `wavelength_m` to a frequency offset,
/// `Δf = c·Δλ/λ²`.
pub fn wavelength_offset_to_hz(delta_lambda_m: f64, wavelength_m: f64) -> f64 {
    SPEED_OF_LIGHT * delta_lambda_m / (wavelength_m * wavelength_m)
}

/// Receiver interferometer constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// Click probability in the destructive port without crosstalk.
    pub d1: f64,
    /// Click probability in the constructive port without crosstalk.
    pub d2: f64,
    /// Interferometer delay, s.
    #[serde(default = "default_delay")]
    pub delta_t: f64,
    #[serde(default = "default_alpha")]
    pub alpha_db: DecibelRatio,
    #[serde(default = "default_threshold")]
    pub visibility_threshold: f64,
}

fn default_delay() -> f64 {
    DEFAULT_DELAY_S
}

fn default_alpha() -> DecibelRatio {
    DecibelRatio(DEFAULT_ALPHA_DB)
}

fn default_threshold() -> f64 {
    DEFAULT_VISIBILITY_THRESHOLD
}

impl Default for ChannelParams {
    /// Baseline visibility 0.98 with the 50 ps delay, α = 15 dB and an 80 %
    /// key-loss threshold.
    fn default() -> Self {
        ChannelParams {
            d1: 0.01,
            d2: 0.99,
            delta_t: DEFAULT_DELAY_S,
            alpha_db: DecibelRatio(DEFAULT_ALPHA_DB),
            visibility_threshold: DEFAULT_VISIBILITY_THRESHOLD,
        }
    }
}

impl ChannelParams {
    pub fn new(d1: f64, d2: f64) -> Result<Self, ModelError> {
        let p = ChannelParams {
            d1,
            d2,
            ..ChannelParams::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_alpha_db(mut self, alpha_db: f64) -> Self {
        self.alpha_db = DecibelRatio(alpha_db);
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.visibility_threshold = threshold;
        self
    }

    pub fn with_delay(mut self, delta_t: f64) -> Self {
        self.delta_t = delta_t;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ChannelParams { d1, d2, .. } = *self;
        if !(d1.is_finite() && d2.is_finite() && 0.0 <= d1 && d1 < d2 && d2 <= 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "d1/d2",
                reason: format!("need 0 <= d1 < d2 <= 1, got d1 = {d1}, d2 = {d2}"),
            });
        }
        if !(self.delta_t > 0.0 && self.delta_t.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "delta_t",
                reason: format!("must be positive, got {}", self.delta_t),
            });
        }
        let t = self.visibility_threshold;
        if !(0.0 < t && t < 1.0) {
            return Err(ModelError::InvalidParameter {
                name: "visibility_threshold",
                reason: format!("must lie in (0, 1), got {t}"),
            });
        }
        if !self.alpha_db.0.is_finite() {
            return Err(ModelError::InvalidParameter {
                name: "alpha_db",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// `d2 − d1`
    pub fn click_difference(&self) -> f64 {
        self.d2 - self.d1
    }

    /// `d2 + d1`
    pub fn click_sum(&self) -> f64 {
        self.d2 + self.d1
    }

    /// Visibility without crosstalk, `(d2 − d1)/(d2 + d1)`.
    pub fn baseline_visibility(&self) -> f64 {
        self.click_difference() / self.click_sum()
    }

    pub fn alpha_linear(&self) -> f64 {
        self.alpha_db.linear()
    }
}

/// Carrier detuning of an interferer relative to the quantum channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detuning {
    /// Frequency offset Δf, Hz.
    FreqOffsetHz(f64),
    /// Wavelength offset Δλ around 1550 nm, nm.
    WavelengthOffsetNm(f64),
    /// The mismatch factor `V_ω = cos θ` given directly; θ is taken in `[0, π]`.
    VOmega(f64),
}

impl Detuning {
    /// Interferometer phase θ for a given delay.
    pub fn phase(&self, delta_t: f64) -> f64 {
        match *self {
            Detuning::FreqOffsetHz(f) => interferer_phase(f, delta_t),
            Detuning::WavelengthOffsetNm(nm) => interferer_phase(
                wavelength_offset_to_hz(nm * 1e-9, CARRIER_WAVELENGTH_M),
                delta_t,
            ),
            Detuning::VOmega(v) => v.clamp(-1.0, 1.0).acos(),
        }
    }

    pub fn v_omega(&self, delta_t: f64) -> f64 {
        match *self {
            Detuning::VOmega(v) => v,
            _ => self.phase(delta_t).cos(),
        }
    }
}

/// One interfering core's signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosstalkSource {
    /// Linear power relative to the quantum-signal normalization. The weight
    /// entering the visibility is `α·power_rel`.
    pub power_rel: f64,
    pub detuning: Detuning,
    /// Multiplier applied to the global phase-noise width.
    #[serde(default = "one")]
    pub noise_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl CrosstalkSource {
    pub fn new(power_rel: f64, detuning: Detuning, noise_scale: f64) -> Self {
        CrosstalkSource {
            power_rel,
            detuning,
            noise_scale,
        }
    }

    pub fn with_v_omega(power_rel: f64, v_omega: f64, noise_scale: f64) -> Self {
        Self::new(power_rel, Detuning::VOmega(v_omega), noise_scale)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.power_rel >= 0.0 && self.power_rel.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "power_rel",
                reason: format!("must be finite and >= 0, got {}", self.power_rel),
            });
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(ModelError::InvalidParameter {
                name: "noise_scale",
                reason: format!("must be finite and >= 0, got {}", self.noise_scale),
            });
        }
        if let Detuning::VOmega(v) = self.detuning {
            if !(-1.0..=1.0).contains(&v) {
                return Err(ModelError::InvalidParameter {
                    name: "v_omega",
                    reason: format!("must lie in [-1, 1], got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Dimensionless weight `α·P` with α taken from `params`.
    pub fn weight(&self, params: &ChannelParams) -> f64 {
        params.alpha_linear() * self.power_rel
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn db_examples() {
        assert_eq!(db_to_linear(DecibelRatio(0.0)), 1.0);
        let v = db_to_linear(DecibelRatio(15.0));
        // sqrt(1000)
        assert!((v - 1000f64.sqrt()).abs() < 1e-12);
        assert!((v - 31.622_776_601_683_793).abs() < 1e-12);
        assert!((db_to_linear(DecibelRatio(-50.0)) - 1e-5).abs() < 1e-20);
    }

    #[test]
    fn v_omega_examples() {
        assert_eq!(v_omega(0.0, 50e-12), 1.0);
        assert!(v_omega(5e9, 50e-12).abs() < 1e-15);
        // half-angle form agrees with the double-angle form
        let f = 3.3e9;
        let half = PI * f * 50e-12;
        let expected = half.cos().powi(2) - half.sin().powi(2);
        assert!((v_omega(f, 50e-12) - expected).abs() < 1e-15);
    }

    #[test]
    fn wavelength_shift_flips_sign_of_v_omega() {
        // Δλ = 0.3 nm at 1550 nm is ~37.4 GHz, almost two 20 GHz periods.
        let df = wavelength_offset_to_hz(0.3e-9, 1550e-9);
        assert!((df - 37.435e9).abs() < 0.01e9, "{df}");
        let v_end = v_omega(df, 50e-12);
        assert!(v_end > 0.0);
        // A 0.3 nm shift from a suitably detuned start does switch the sign.
        let start = 0.14e-9;
        let v0 = v_omega(wavelength_offset_to_hz(start, 1550e-9), 50e-12);
        let v1 = v_omega(wavelength_offset_to_hz(start + 0.3e-9, 1550e-9), 50e-12);
        assert!(v0 * v1 < 0.0, "{v0} {v1}");
        // and V_ω takes both signs inside any 0.3 nm window
        let samples: Vec<f64> = (0..=300)
            .map(|i| v_omega(wavelength_offset_to_hz(i as f64 * 1e-12, 1550e-9), 50e-12))
            .collect();
        assert!(samples.iter().any(|&v| v > 0.9));
        assert!(samples.iter().any(|&v| v < -0.9));
    }

    #[test]
    fn channel_validation() {
        assert!(ChannelParams::new(0.5, 0.5).is_err());
        assert!(ChannelParams::new(-0.1, 0.5).is_err());
        assert!(ChannelParams::new(0.0, 1.0).is_ok());
        let p = ChannelParams::default().with_threshold(1.0);
        assert!(p.validate().is_err());
        let p = ChannelParams::default().with_delay(0.0);
        assert!(p.validate().is_err());
        assert!((ChannelParams::default().baseline_visibility() - 0.98).abs() < 1e-15);
    }

    #[test]
    fn detuning_phase_matches_v_omega() {
        let dt = 50e-12;
        for d in [
            Detuning::FreqOffsetHz(1.7e9),
            Detuning::WavelengthOffsetNm(0.05),
            Detuning::VOmega(-0.3),
        ] {
            assert!((d.phase(dt).cos() - d.v_omega(dt)).abs() < 1e-12);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn db_round_trip(exp in -6.0f64..6.0) {
                let x = 10f64.powf(exp);
                let back = DecibelRatio::from_linear(x).linear();
                prop_assert!(((back - x) / x).abs() < 1e-12);
                let db = exp * 10.0;
                let db_back = linear_to_db(db_to_linear(DecibelRatio(db)));
                prop_assert!((db_back - db).abs() <= 1e-12 * db.abs().max(1.0));
            }

            #[test]
            fn v_omega_bounded_and_periodic(f in -1e11f64..1e11, k in -5i32..5) {
                let dt = 50e-12;
                let v = v_omega(f, dt);
                prop_assert!((-1.0..=1.0).contains(&v));
                let shifted = v_omega(f + k as f64 / dt, dt);
                prop_assert!((v - shifted).abs() < 1e-9);
            }

            #[test]
            fn v_omega_lipschitz(a in -50.0f64..50.0, b in -50.0f64..50.0) {
                let dt = 50e-12;
                let fa = a / (2.0 * PI * dt);
                let fb = b / (2.0 * PI * dt);
                prop_assert!((v_omega(fa, dt) - v_omega(fb, dt)).abs() <= (a - b).abs() + 1e-12);
            }
        }
    }
}
