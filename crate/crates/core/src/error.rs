use thiserror::Error;

/// Errors from the visibility, noise and threshold models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{0:?} noise has no closed-form damping factor")]
    UnsupportedDistribution(crate::noise::NoiseDistribution),
    #[error("baseline visibility {baseline} does not exceed the threshold {threshold}")]
    BaselineBelowThreshold { baseline: f64, threshold: f64 },
    #[error("root bracketing failed: {0}")]
    Bracketing(String),
}

/// Errors from the beam-propagation solver.
#[derive(Debug, Error)]
pub enum BpmError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("core index {index} out of range ({count} cores)")]
    CoreIndex { index: usize, count: usize },
    #[error("unstable propagation at step {step} (z = {z_um:.3} um): power grew from {before:.6e} to {after:.6e}")]
    Unstable {
        step: usize,
        z_um: f64,
        before: f64,
        after: f64,
    },
    #[error("field has zero or non-finite power")]
    DegenerateField,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
