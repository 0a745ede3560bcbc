use thiserror::Error;

/// Errors produced by the elicitation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),

    #[error("invalid scenario set: {0}")]
    InvalidScenarioSet(String),

    #[error("invalid data model config: {0}")]
    InvalidConfig(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("invalid fit options: {0}")]
    InvalidOptions(String),

    #[error("incomplete responses; missing scenarios: {}", .missing.join(", "))]
    IncompleteResponses { missing: Vec<String> },

    #[error("response for unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("duplicate response for scenario `{0}`")]
    DuplicateResponse(String),

    #[error("unidentifiable scenario set: {0}")]
    Unidentifiable(String),

    #[error("grid search requires a nonempty grid")]
    EmptyGrid,

    #[error("fit does not match responses: {0}")]
    Mismatch(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("conflict: {0}")]
    Conflict(String),

    #[error("state violation: {0}")]
    StateViolation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// True for errors caused by bad caller input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub(crate) fn ensure_finite(value: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(what))
    }
}
