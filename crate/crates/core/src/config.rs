//! Run configurations: a JSON document naming one command, its parameters,
//! a seed and an output directory.
//!
//! ```json
//! { "command": "threshold", "seed": 1, "output_dir": "out",
//!   "parameters": { "scene": { "params": { "d1": 0.0, "d2": 1.0 },
//!                              "sources": [ { "power_rel": 1.0,
//!                                             "detuning": { "v_omega": -1.0 } } ] } } }
//! ```
//!
//! Unknown keys are rejected at every level. [`validate`] collects schema
//! violations and physics warnings without running anything.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bpm::analysis::STUDY_TRENCH_GAP;
use crate::bpm::field::{v_number, SINGLE_MODE_CUTOFF};
use crate::bpm::{BpmGrid, FiberCrossSection};
use crate::error::ModelError;
use crate::threshold::log_space;
use crate::units::{ChannelParams, CrosstalkSource};
use crate::visibility::CrosstalkScene;

/// Index contrast above which the paraxial scalar model is not trusted.
pub const PARAXIAL_CONTRAST_LIMIT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Visibility,
    Threshold,
    PsrSweep,
    PsrMap,
    SnrCurve,
    BpmCrosstalk,
    TrenchStudy,
}

impl CommandKind {
    pub const ALL: [CommandKind; 7] = [
        CommandKind::Visibility,
        CommandKind::Threshold,
        CommandKind::PsrSweep,
        CommandKind::PsrMap,
        CommandKind::SnrCurve,
        CommandKind::BpmCrosstalk,
        CommandKind::TrenchStudy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Visibility => "visibility",
            CommandKind::Threshold => "threshold",
            CommandKind::PsrSweep => "psr-sweep",
            CommandKind::PsrMap => "psr-map",
            CommandKind::SnrCurve => "snr-curve",
            CommandKind::BpmCrosstalk => "bpm-crosstalk",
            CommandKind::TrenchStudy => "trench-study",
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A crosstalk scene as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// Label used in the `scene_id` column.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub params: ChannelParams,
    #[serde(default)]
    pub sources: Vec<CrosstalkSource>,
    /// Global noise width used when the command has no σ axis.
    #[serde(default)]
    pub sigma_hz: f64,
}

impl SceneConfig {
    pub fn new(params: ChannelParams, sources: Vec<CrosstalkSource>) -> Self {
        SceneConfig {
            id: None,
            params,
            sources,
            sigma_hz: 0.0,
        }
    }

    pub fn scene(&self) -> CrosstalkScene {
        CrosstalkScene::new(self.params, self.sources.clone(), self.sigma_hz)
    }
}

/// Logarithmic σ axis, both ends included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSweep {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

/// A σ axis given either as explicit values (`sigma_hz`) or as a
/// logarithmic sweep (`sigma_log`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SigmaAxis {
    pub sigma_hz: Option<Vec<f64>>,
    pub sigma_log: Option<LogSweep>,
}

impl SigmaAxis {
    pub fn values(values: Vec<f64>) -> Self {
        SigmaAxis {
            sigma_hz: Some(values),
            sigma_log: None,
        }
    }

    pub fn log(start_hz: f64, stop_hz: f64, points: usize) -> Self {
        SigmaAxis {
            sigma_hz: None,
            sigma_log: Some(LogSweep {
                start_hz,
                stop_hz,
                points,
            }),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_hz.is_none() && self.sigma_log.is_none()
    }

    /// The explicit values, or the expanded sweep; `None` when unset.
    pub fn resolve(&self) -> Option<Vec<f64>> {
        match (&self.sigma_hz, &self.sigma_log) {
            (Some(v), _) => Some(v.clone()),
            (None, Some(l)) => Some(log_space(l.start_hz, l.stop_hz, l.points)),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMethod {
    /// Seeded sampling of the phase noise.
    #[default]
    MonteCarlo,
    /// Closed-form Gaussian average.
    Averaged,
}

fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityParams {
    pub scenes: Vec<SceneConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_log: Option<LogSweep>,
    #[serde(default)]
    pub method: VisibilityMethod,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    /// QBER without crosstalk; defaults to `d1/(d1 + d2)` of each scene.
    #[serde(default)]
    pub baseline_qber: Option<f64>,
}

/// Parameters shared by `threshold`, `snr-curve` and `psr-sweep`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub scene: SceneConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_log: Option<LogSweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsrMapParams {
    /// Two-source scene; the mismatch factors are replaced per map cell.
    pub scene: SceneConfig,
    pub v_w1: Vec<f64>,
    pub v_w2: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_log: Option<LogSweep>,
}

macro_rules! impl_axis {
    ($($t:ty),*) => {$(
        impl $t {
            pub fn axis(&self) -> SigmaAxis {
                SigmaAxis {
                    sigma_hz: self.sigma_hz.clone(),
                    sigma_log: self.sigma_log,
                }
            }

            pub fn set_axis(&mut self, axis: SigmaAxis) {
                self.sigma_hz = axis.sigma_hz;
                self.sigma_log = axis.sigma_log;
            }
        }
    )*};
}

impl_axis!(VisibilityParams, SweepParams, PsrMapParams);

/// Optional image and grid exports of a BPM run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpmExports {
    /// `index.csv` and `index.pgm`.
    #[serde(default)]
    pub index: bool,
    /// `intensity.csv` and `intensity.pgm` of the output field.
    #[serde(default)]
    pub intensity: bool,
}

fn default_distance() -> f64 {
    10_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpmCrosstalkParams {
    #[serde(default)]
    pub fiber: FiberCrossSection,
    #[serde(default)]
    pub grid: BpmGrid,
    #[serde(default = "default_distance")]
    pub distance_um: f64,
    #[serde(default)]
    pub launch_core: usize,
    #[serde(default)]
    pub exports: BpmExports,
}

fn default_widths() -> Vec<f64> {
    vec![0.0, 1.0, 3.0, 6.0]
}

fn default_trench_dns() -> Vec<f64> {
    vec![0.005, 0.01]
}

fn default_gap() -> f64 {
    STUDY_TRENCH_GAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrenchStudyParams {
    /// Base cross-section; its own trench is ignored.
    #[serde(default)]
    pub fiber: FiberCrossSection,
    #[serde(default)]
    pub grid: BpmGrid,
    #[serde(default = "default_distance")]
    pub distance_um: f64,
    #[serde(default = "default_widths")]
    pub widths_um: Vec<f64>,
    #[serde(default = "default_trench_dns")]
    pub trench_dn: Vec<f64>,
    /// Cladding ring between core and trench, µm.
    #[serde(default = "default_gap")]
    pub trench_gap_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "kebab-case")]
pub enum Parameters {
    Visibility(VisibilityParams),
    Threshold(SweepParams),
    PsrSweep(SweepParams),
    PsrMap(PsrMapParams),
    SnrCurve(SweepParams),
    BpmCrosstalk(BpmCrosstalkParams),
    TrenchStudy(TrenchStudyParams),
}

impl Parameters {
    pub fn command(&self) -> CommandKind {
        match self {
            Parameters::Visibility(_) => CommandKind::Visibility,
            Parameters::Threshold(_) => CommandKind::Threshold,
            Parameters::PsrSweep(_) => CommandKind::PsrSweep,
            Parameters::PsrMap(_) => CommandKind::PsrMap,
            Parameters::SnrCurve(_) => CommandKind::SnrCurve,
            Parameters::BpmCrosstalk(_) => CommandKind::BpmCrosstalk,
            Parameters::TrenchStudy(_) => CommandKind::TrenchStudy,
        }
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub parameters: Parameters,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: CommandKind,
    #[serde(default)]
    parameters: Option<Value>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

/// A config document that could not be parsed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    /// Dotted path of the offending key.
    pub path: String,
    pub message: String,
}

/// Values given on the command line; each replaces the file's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(parameters: Parameters) -> Self {
        RunConfig {
            parameters,
            seed: None,
            output_dir: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = Some(dir.into());
        self
    }

    pub fn command(&self) -> CommandKind {
        self.parameters.command()
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            path: path_or_root(e.path().to_string()),
            message: e.inner().to_string(),
        })?;
        let tagged = serde_json::json!({
            "command": raw.command,
            "parameters": raw.parameters.unwrap_or_else(|| Value::Object(Default::default())),
        });
        let parameters: Parameters = serde_path_to_error::deserialize(tagged).map_err(|e| ConfigError {
            path: path_or_root(e.path().to_string()),
            message: strip_position(&e.inner().to_string()),
        })?;
        Ok(RunConfig {
            parameters,
            seed: raw.seed,
            output_dir: raw.output_dir,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(seed) = overrides.seed {
            self.seed = Some(seed);
        }
        if let Some(dir) = &overrides.output_dir {
            self.output_dir = Some(dir.clone());
        }
    }

    /// Whether the command draws random numbers and so needs a seed.
    pub fn is_monte_carlo(&self) -> bool {
        matches!(&self.parameters, Parameters::Visibility(p) if p.method == VisibilityMethod::MonteCarlo)
    }
}

fn path_or_root(p: String) -> String {
    if p == "." || p.is_empty() {
        "<root>".into()
    } else {
        p
    }
}

fn strip_position(msg: &str) -> String {
    match msg.find(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

/// One finding of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Dotted path of the key concerned.
    pub key: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}: {}", self.key, self.message)
    }
}

#[derive(Default)]
struct Findings(Vec<Diagnostic>);

impl Findings {
    fn error(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Error, key, message);
    }

    fn warn(&mut self, key: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Warning, key, message);
    }

    fn push(&mut self, severity: Severity, key: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity,
            key: key.into(),
            message: message.into(),
        });
    }

    fn model(&mut self, prefix: &str, e: ModelError) {
        match e {
            ModelError::InvalidParameter { name, reason } => self.error(format!("{prefix}.{name}"), reason),
            other => self.error(prefix, other.to_string()),
        }
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(|d| d.severity == Severity::Error)
}

/// All schema violations and physics warnings of a parsed config.
pub fn validate(config: &RunConfig) -> Vec<Diagnostic> {
    let mut f = Findings::default();
    if config.is_monte_carlo() && config.seed.is_none() {
        f.error("seed", "Monte-Carlo commands need a seed (config `seed` or --seed)");
    }
    let p = "parameters";
    match &config.parameters {
        Parameters::Visibility(v) => {
            if v.scenes.is_empty() {
                f.error(format!("{p}.scenes"), "at least one scene is required");
            }
            for (i, s) in v.scenes.iter().enumerate() {
                check_scene(&mut f, &format!("{p}.scenes[{i}]"), s, false);
            }
            check_axis(&mut f, p, &v.axis(), false);
            if v.method == VisibilityMethod::MonteCarlo && v.n_samples == 0 {
                f.error(format!("{p}.n_samples"), "must be >= 1");
            }
            if let Some(q) = v.baseline_qber {
                if !(0.0..0.5).contains(&q) {
                    f.error(format!("{p}.baseline_qber"), format!("must lie in [0, 0.5), got {q}"));
                }
            }
        }
        Parameters::Threshold(s) | Parameters::SnrCurve(s) => {
            check_scene(&mut f, &format!("{p}.scene"), &s.scene, true);
            check_axis(&mut f, p, &s.axis(), false);
        }
        Parameters::PsrSweep(s) => {
            check_scene(&mut f, &format!("{p}.scene"), &s.scene, true);
            check_axis(&mut f, p, &s.axis(), true);
            if let Some(values) = s.axis().resolve() {
                if values.len() < 3 {
                    f.warn(format!("{p}.sigma_hz"), "fewer than 3 points cannot show an interior maximum");
                }
            }
        }
        Parameters::PsrMap(m) => {
            check_scene(&mut f, &format!("{p}.scene"), &m.scene, true);
            if m.scene.sources.len() != 2 {
                f.error(
                    format!("{p}.scene.sources"),
                    format!("a PSR map needs exactly two sources, got {}", m.scene.sources.len()),
                );
            }
            check_axis(&mut f, p, &m.axis(), true);
            for (key, values) in [("v_w1", &m.v_w1), ("v_w2", &m.v_w2)] {
                if values.is_empty() {
                    f.error(format!("{p}.{key}"), "needs at least one value");
                }
                for (i, v) in values.iter().enumerate() {
                    if !(-1.0..=1.0).contains(v) {
                        f.error(format!("{p}.{key}[{i}]"), format!("must lie in [-1, 1], got {v}"));
                    }
                }
            }
        }
        Parameters::BpmCrosstalk(b) => {
            check_fiber(&mut f, &format!("{p}.fiber"), &b.fiber);
            check_grid(&mut f, p, &b.grid, &b.fiber);
            check_distance(&mut f, p, b.distance_um);
            if b.launch_core >= b.fiber.core_count() {
                f.error(
                    format!("{p}.launch_core"),
                    format!("core {} does not exist ({} cores)", b.launch_core, b.fiber.core_count()),
                );
            }
        }
        Parameters::TrenchStudy(t) => {
            let base = FiberCrossSection {
                trench: None,
                ..t.fiber.clone()
            };
            check_fiber(&mut f, &format!("{p}.fiber"), &base);
            check_distance(&mut f, p, t.distance_um);
            if t.widths_um.is_empty() {
                f.error(format!("{p}.widths_um"), "needs at least one width");
            }
            for (i, w) in t.widths_um.iter().enumerate() {
                if !(*w >= 0.0 && w.is_finite()) {
                    f.error(format!("{p}.widths_um[{i}]"), format!("must be finite and >= 0, got {w}"));
                }
            }
            if t.trench_dn.is_empty() {
                f.error(format!("{p}.trench_dn"), "needs at least one depression");
            }
            for (i, d) in t.trench_dn.iter().enumerate() {
                if !(*d > 0.0 && d.is_finite()) {
                    f.error(format!("{p}.trench_dn[{i}]"), format!("must be finite and > 0, got {d}"));
                } else if *d > PARAXIAL_CONTRAST_LIMIT {
                    f.warn(format!("{p}.trench_dn[{i}]"), paraxial_message(*d));
                }
            }
            if !(t.trench_gap_um >= 0.0 && t.trench_gap_um.is_finite()) {
                f.error(format!("{p}.trench_gap_um"), format!("must be finite and >= 0, got {}", t.trench_gap_um));
            }
            let widest = t.widths_um.iter().cloned().fold(0.0, f64::max);
            let deepest = t.trench_dn.iter().cloned().fold(0.0, f64::max);
            if widest > 0.0 && deepest > 0.0 {
                let xs = base.clone().with_trench(widest, deepest).with_trench_gap(t.trench_gap_um);
                if let Err(e) = xs.validate() {
                    f.error(format!("{p}.widths_um"), e.to_string());
                }
                check_grid(&mut f, p, &t.grid, &xs);
            } else {
                check_grid(&mut f, p, &t.grid, &base);
            }
        }
    }
    f.0
}

fn check_scene(f: &mut Findings, prefix: &str, s: &SceneConfig, needs_sources: bool) {
    if let Err(e) = s.params.validate() {
        f.model(&format!("{prefix}.params"), e);
    }
    for (i, src) in s.sources.iter().enumerate() {
        if let Err(e) = src.validate() {
            f.model(&format!("{prefix}.sources[{i}]"), e);
        }
    }
    if !(s.sigma_hz >= 0.0 && s.sigma_hz.is_finite()) {
        f.error(format!("{prefix}.sigma_hz"), format!("must be finite and >= 0, got {}", s.sigma_hz));
    }
    if needs_sources {
        if s.sources.is_empty() {
            f.error(
                format!("{prefix}.sources"),
                "a threshold is undefined without at least one crosstalk source",
            );
        } else if s.sources.iter().all(|x| x.power_rel <= 0.0) {
            f.error(format!("{prefix}.sources"), "all source powers are zero");
        }
        if s.params.validate().is_ok() && s.params.baseline_visibility() <= s.params.visibility_threshold {
            f.error(
                format!("{prefix}.params"),
                format!(
                    "baseline visibility {} does not exceed the threshold {}",
                    s.params.baseline_visibility(),
                    s.params.visibility_threshold
                ),
            );
        }
    }
}

fn check_axis(f: &mut Findings, prefix: &str, axis: &SigmaAxis, required: bool) {
    match (&axis.sigma_hz, &axis.sigma_log) {
        (Some(_), Some(_)) => {
            f.error(format!("{prefix}.sigma_log"), "give either sigma_hz or sigma_log, not both");
        }
        (None, None) if required => {
            f.error(format!("{prefix}.sigma_hz"), "a sigma axis (sigma_hz or sigma_log) is required");
        }
        (Some(values), None) => {
            if values.is_empty() {
                f.error(format!("{prefix}.sigma_hz"), "needs at least one value");
            }
            for (i, v) in values.iter().enumerate() {
                if !(*v >= 0.0 && v.is_finite()) {
                    f.error(format!("{prefix}.sigma_hz[{i}]"), format!("must be finite and >= 0, got {v}"));
                }
            }
            if values.windows(2).any(|w| w[1] <= w[0]) {
                f.error(format!("{prefix}.sigma_hz"), "values must be strictly increasing");
            }
        }
        (None, Some(l)) => {
            let key = format!("{prefix}.sigma_log");
            if !(l.start_hz > 0.0 && l.start_hz.is_finite()) {
                f.error(format!("{key}.start_hz"), format!("must be finite and > 0, got {}", l.start_hz));
            }
            if !(l.stop_hz > l.start_hz && l.stop_hz.is_finite()) {
                f.error(format!("{key}.stop_hz"), format!("must be finite and > start_hz, got {}", l.stop_hz));
            }
            if l.points < 2 {
                f.error(format!("{key}.points"), "needs at least 2 points");
            }
        }
        (None, None) => {}
    }
}

fn paraxial_message(dn: f64) -> String {
    format!("index contrast {dn} exceeds the paraxial limit {PARAXIAL_CONTRAST_LIMIT}; results are not trustworthy")
}

fn check_fiber(f: &mut Findings, prefix: &str, xs: &FiberCrossSection) {
    if let Err(e) = xs.validate() {
        f.error(prefix, e.to_string());
        return;
    }
    if xs.core_dn > PARAXIAL_CONTRAST_LIMIT {
        f.warn(format!("{prefix}.core_dn"), paraxial_message(xs.core_dn));
    }
    if let Some(t) = xs.trench {
        if t.dn_below_cladding > PARAXIAL_CONTRAST_LIMIT {
            f.warn(format!("{prefix}.trench.dn_below_cladding"), paraxial_message(t.dn_below_cladding));
        }
    }
    if !(xs.core_dn > 0.0) {
        f.error(format!("{prefix}.core_dn"), format!("must be > 0 for a guiding core, got {}", xs.core_dn));
        return;
    }
    let v = v_number(xs.core_radius, xs.core_index(), xs.cladding_index, 1.55);
    if v > SINGLE_MODE_CUTOFF {
        f.warn(
            format!("{prefix}.core_dn"),
            format!("core V-number {v:.4} exceeds {SINGLE_MODE_CUTOFF:.3}; the core is multimode"),
        );
    }
}

fn check_grid(f: &mut Findings, prefix: &str, grid: &BpmGrid, xs: &FiberCrossSection) {
    let key = format!("{prefix}.grid");
    if let Err(e) = grid.validate() {
        f.error(key, e.to_string());
        return;
    }
    for issue in grid.check_fiber(xs) {
        f.warn(key.clone(), issue);
    }
    if (grid.wavelength - 1.55).abs() > 1e-12 && xs.core_dn > 0.0 {
        let v = v_number(xs.core_radius, xs.core_index(), xs.cladding_index, grid.wavelength);
        if v > SINGLE_MODE_CUTOFF {
            f.warn(
                format!("{key}.wavelength"),
                format!("core V-number {v:.4} at this wavelength exceeds {SINGLE_MODE_CUTOFF:.3}"),
            );
        }
    }
}

fn check_distance(f: &mut Findings, prefix: &str, d: f64) {
    if !(d >= 0.0 && d.is_finite()) {
        f.error(format!("{prefix}.distance_um"), format!("must be finite and >= 0, got {d}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(d: &[Diagnostic], severity: Severity) -> Vec<String> {
        d.iter().filter(|x| x.severity == severity).map(|x| x.key.clone()).collect()
    }

    #[test]
    fn unknown_key_is_named() {
        let e = RunConfig::from_json(r#"{"command": "threshold", "sede": 3}"#).unwrap_err();
        assert!(e.message.contains("sede"), "{e}");
        let e = RunConfig::from_json(
            r#"{"command": "threshold", "parameters": {"scene": {"params": {"d1": 0, "d2": 1, "dd": 1}}}}"#,
        )
        .unwrap_err();
        assert_eq!(e.path, "parameters.scene.params.dd");
        assert!(e.message.contains("dd"), "{e}");
    }

    #[test]
    fn unknown_command_is_rejected() {
        let e = RunConfig::from_json(r#"{"command": "thresh"}"#).unwrap_err();
        assert_eq!(e.path, "command");
    }

    #[test]
    fn round_trip_through_json() {
        let text = r#"{"command": "psr-sweep", "seed": 9,
            "parameters": {"scene": {"sources": [{"power_rel": 1, "detuning": {"v_omega": 1}}]},
                           "sigma_log": {"start_hz": 1e7, "stop_hz": 1e11, "points": 50}}}"#;
        let c = RunConfig::from_json(text).unwrap();
        assert_eq!(c.command(), CommandKind::PsrSweep);
        assert_eq!(c.seed, Some(9));
        let again = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
    }

    proptest::proptest! {
        #[test]
        fn any_sweep_round_trips(
            seed in proptest::prelude::any::<u64>(),
            power in 1e-6f64..10.0,
            v in -1.0f64..=1.0,
            sigma in proptest::collection::vec(0.0f64..1e12, 1..8),
        ) {
            let text = serde_json::json!({
                "command": "snr-curve",
                "seed": seed,
                "parameters": {
                    "scene": {"sources": [{"power_rel": power, "detuning": {"v_omega": v}}]},
                    "sigma_hz": sigma,
                },
            })
            .to_string();
            let c = RunConfig::from_json(&text).unwrap();
            proptest::prop_assert_eq!(&RunConfig::from_json(&c.to_json()).unwrap(), &c);
        }
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut c = RunConfig::from_json(r#"{"command": "bpm-crosstalk", "seed": 1, "output_dir": "a"}"#).unwrap();
        c.apply(&Overrides {
            seed: Some(2),
            output_dir: None,
        });
        assert_eq!(c.seed, Some(2));
        assert_eq!(c.output_dir, Some(PathBuf::from("a")));
    }

    #[test]
    fn negative_sigma_names_the_key() {
        let c = RunConfig::from_json(
            r#"{"command": "snr-curve", "parameters": {"scene": {"sources": [{"power_rel": 1,
                "detuning": {"v_omega": -1}}]}, "sigma_hz": [1e6, -2e6]}}"#,
        )
        .unwrap();
        let d = validate(&c);
        assert!(keys(&d, Severity::Error).iter().any(|k| k.contains("sigma_hz")), "{d:?}");
    }

    #[test]
    fn strong_contrast_warns_about_paraxiality() {
        let c = RunConfig::from_json(r#"{"command": "bpm-crosstalk", "parameters": {"fiber": {"core_dn": 0.05}}}"#).unwrap();
        let d = validate(&c);
        let w = d.iter().find(|x| x.key == "parameters.fiber.core_dn" && x.message.contains("paraxial"));
        assert!(w.is_some(), "{d:?}");
        assert_eq!(w.unwrap().severity, Severity::Warning);
    }

    #[test]
    fn multimode_core_warns() {
        let c = RunConfig::from_json(r#"{"command": "bpm-crosstalk", "parameters": {"fiber": {"core_dn": 0.01}}}"#).unwrap();
        let d = validate(&c);
        assert!(d.iter().any(|x| x.message.contains("multimode")), "{d:?}");
        assert!(!has_errors(&d), "{d:?}");
    }

    #[test]
    fn threshold_without_sources_is_an_error() {
        let c = RunConfig::from_json(r#"{"command": "threshold", "parameters": {"scene": {}}}"#).unwrap();
        let d = validate(&c);
        assert_eq!(keys(&d, Severity::Error), vec!["parameters.scene.sources".to_string()]);
    }

    #[test]
    fn monte_carlo_needs_a_seed() {
        let c = RunConfig::from_json(r#"{"command": "visibility", "parameters": {"scenes": [{}]}}"#).unwrap();
        assert_eq!(keys(&validate(&c), Severity::Error), vec!["seed".to_string()]);
        let c = RunConfig::from_json(
            r#"{"command": "visibility", "parameters": {"scenes": [{}], "method": "averaged"}}"#,
        )
        .unwrap();
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn default_bpm_configs_are_clean() {
        for cmd in ["bpm-crosstalk", "trench-study"] {
            let c = RunConfig::from_json(&format!(r#"{{"command": "{cmd}"}}"#)).unwrap();
            assert!(validate(&c).is_empty(), "{cmd}: {:?}", validate(&c));
        }
    }

    #[test]
    fn psr_map_needs_two_sources_and_an_axis() {
        let c = RunConfig::from_json(
            r#"{"command": "psr-map", "parameters": {"scene": {"sources": [{"power_rel": 1,
                "detuning": {"v_omega": 1}}]}, "v_w1": [1], "v_w2": [2]}}"#,
        )
        .unwrap();
        let e = keys(&validate(&c), Severity::Error);
        assert!(e.contains(&"parameters.scene.sources".to_string()));
        assert!(e.contains(&"parameters.sigma_hz".to_string()));
        assert!(e.contains(&"parameters.v_w2[0]".to_string()));
    }
}
