//! Error type shared across the workspace.

use thiserror::Error;

/// Everything that can go wrong between a config file and a report.
#[derive(Debug, Error)]
pub enum DcmError {
    /// Parameter vector length or network shape does not match.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A non-finite value appeared while evaluating a residual loss.
    /// Carries the collocation point index for diagnosis.
    #[error("non-finite value at collocation point {point}: {context}")]
    NonFinite { point: usize, context: String },

    /// Invalid user-facing configuration (bounds, weights, names).
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Config validation collected one message per violated invariant.
    #[error("config validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    /// Geometry construction or evaluation outside the valid range.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// A goal functional could not be evaluated or differentiated.
    #[error("goal functional error: {0}")]
    Goal(String),

    /// Combined-functional weight is undefined because |J_n(u_theta)| ~ 0.
    #[error("combination weight undefined: |{name}(u_theta)| = {value:e} is below 1e-14")]
    DegenerateGoalValue { name: String, value: f64 },

    /// The optimizer could not make progress; best-so-far state is returned
    /// alongside where possible.
    #[error("optimizer failure: {0}")]
    Optimizer(String),

    /// Primal and adjoint stages disagree about the collocation set.
    #[error("collocation mismatch: {0}")]
    CollocationMismatch(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl DcmError {
    /// Stable process exit code per error class (used by the CLI).
    pub fn exit_code(&self) -> i32 {
        match self {
            DcmError::Config(_) | DcmError::Validation(_) => 2,
            DcmError::Io(_) | DcmError::Serde(_) => 3,
            DcmError::Optimizer(_) => 4,
            DcmError::NonFinite { .. } => 5,
            DcmError::ShapeMismatch(_) => 6,
            DcmError::Geometry(_) => 7,
            DcmError::Goal(_) | DcmError::DegenerateGoalValue { .. } => 8,
            DcmError::CollocationMismatch(_) => 9,
        }
    }
}
