use thiserror::Error;

/// Errors raised by the solver and the analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("ambiguous normal at corner ({:.6}, {:.6})", at[0], at[1])]
    AmbiguousNormal {
        at: [f64; 2],
        /// Extreme inner normals of the normal cone, incoming piece first.
        extremes: [[f64; 2]; 2],
    },

    #[error("ellipse normalization failed: optimality gap {gap:.3e}")]
    NormalizationFailure { gap: f64 },

    #[error("singular linear map (det = {det:.3e})")]
    SingularMap { det: f64 },

    #[error("Newton iteration did not converge after {} steps (last residual {:.3e})", residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    NonConvergence { residuals: Vec<f64> },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("section of height {h:.3e} escapes the bounding box")]
    HeightTooLarge { h: f64 },

    #[error("centring failed after {iterations} iterations (centroid gap {gap:.3e})")]
    CentringFailure { iterations: usize, gap: f64 },

    #[error("degenerate section: {0}")]
    DegenerateSection(String),

    #[error("insufficient data: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("Dirichlet solver did not converge after {} sweeps (last residual {:.3e})", residuals.len(), residuals.last().copied().unwrap_or(f64::NAN))]
    DirichletNonConvergence { residuals: Vec<f64> },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("incompatible reports: {0}")]
    IncompatibleReport(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } | Error::DirichletNonConvergence { .. } => 2,
            Error::InvalidSpec(_) | Error::InvalidConfig(_) | Error::Json(_) => 3,
            _ => 4,
        }
    }

    /// Short machine-readable code stored in report failure entries.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid-spec",
            Error::AmbiguousNormal { .. } => "ambiguous-normal",
            Error::NormalizationFailure { .. } => "normalization-failure",
            Error::SingularMap { .. } => "singular-map",
            Error::NonConvergence { .. } => "non-convergence",
            Error::DegenerateConfiguration(_) => "degenerate-configuration",
            Error::HeightTooLarge { .. } => "height-too-large",
            Error::CentringFailure { .. } => "centring-failure",
            Error::DegenerateSection(_) => "degenerate-section",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::Construction(_) => "construction",
            Error::DirichletNonConvergence { .. } => "dirichlet-non-convergence",
            Error::InvalidConfig(_) => "invalid-config",
            Error::IncompatibleReport(_) => "incompatible-report",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
