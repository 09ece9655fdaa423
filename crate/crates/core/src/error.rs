use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid B-H curve: {0}")]
    InvalidCurve(String),
    #[error("invalid material `{name}`: {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid arrangement: {0}")]
    InvalidArrangement(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("winding bundle does not fit: {what} needs {required:.6e} m but {available:.6e} m is available")]
    DoesNotFit {
        what: String,
        required: f64,
        available: f64,
    },
    #[error("mesh generation failed: {0}")]
    Mesh(String),
    #[error("feature `{feature}` is too small for the mesh: requires h <= {required_h:.3e} m")]
    FeatureTooSmall { feature: String, required_h: f64 },
    #[error("invalid excitation: {0}")]
    InvalidExcitation(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("matrix is not positive definite (curvature {0:.3e})")]
    Indefinite(f64),
    #[error("solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("Newton iteration diverged; residual history {0:?}")]
    NewtonDiverged(Vec<f64>),
    #[error("wrong solution kind: expected {0}")]
    WrongKind(&'static str),
    #[error("empty selection: {0}")]
    EmptySelection(String),
    #[error("path leaves the meshed domain at ({0:.6e}, {1:.6e})")]
    PathOutsideDomain(f64, f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
