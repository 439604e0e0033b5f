use thiserror::Error;
use wavescope_core::fbi::FbiError;
use wavescope_core::geometry::GeometryError;
use wavescope_core::propagation::PropagationError;
use wavescope_core::stability::StabilityError;
use wavescope_core::wave::WaveError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error in [{section}] at line {line}: {message}")]
    Parse { section: String, line: usize, message: String },
    #[error("validation failed ({invariant}): {message}")]
    Validation { invariant: String, message: String },
    #[error("output: {0}")]
    Output(String),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("solver: {0}")]
    Solver(#[from] WaveError),
    #[error("fbi: {0}")]
    Fbi(#[from] FbiError),
    #[error("propagation: {0}")]
    Propagation(#[from] PropagationError),
    #[error("stability: {0}")]
    Stability(#[from] StabilityError),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn validation(invariant: &str, message: impl Into<String>) -> Self {
        CliError::Validation { invariant: invariant.into(), message: message.into() }
    }

    /// Stable machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Validation { .. } => "validation",
            CliError::Output(_) => "output",
            CliError::Geometry(_) => "geometry",
            CliError::Solver(_) => "solver",
            CliError::Fbi(_) => "fbi",
            CliError::Propagation(_) => "propagation",
            CliError::Stability(StabilityError::InsufficientData { .. }) => "insufficient_data",
            CliError::Stability(StabilityError::Geometry { .. }) => "geometry",
            CliError::Stability(StabilityError::Solver { .. }) => "solver",
            CliError::Stability(_) => "stability",
            CliError::CheckFailed(_) => "check_failed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.category() {
            "parse" => 2,
            "validation" => 3,
            "output" => 4,
            "geometry" => 10,
            "solver" => 11,
            "fbi" => 12,
            "propagation" => 13,
            "insufficient_data" => 14,
            "stability" => 15,
            _ => 20,
        }
    }
}
