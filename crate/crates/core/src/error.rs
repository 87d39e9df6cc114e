use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),
    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, partial value {partial:.6e}")]
    Quadrature { achieved: f64, partial: f64 },
    #[error("derivative order {0} not supported (maximum 2)")]
    UnsupportedOrder(usize),
    #[error("spectral condition {condition} failed: {reason}")]
    ConditionFailed { condition: &'static str, reason: String },
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("work budget exceeded: {0}")]
    Budget(String),
    #[error("window too small: {0}")]
    Window(String),
    #[error("field sample has no gradients")]
    MissingGradients,
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("singular transform (|det| = {0:e})")]
    SingularTransform(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

