use thiserror::Error;

/// Errors surfaced by the library. Numerical non-convergence is not an error:
/// solvers return empty solution lists instead.
#[derive(Debug, Error)]
pub enum QesError {
    #[error("invalid ODE specification: {0}")]
    InvalidSpec(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("sl(2) dependence condition violated: |b3 + 2(n-1) a4| = {gap:e}")]
    NotDependent { gap: f64 },

    #[error("canonical form has coincident poles (separation {separation:e})")]
    CoincidentPoles { separation: f64 },

    #[error("spec does not have the shape of the {form} form: {reason}")]
    FormMismatch { form: &'static str, reason: String },

    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    EigenFailure(usize),

    #[error("degree {n} exceeds the oracle limit of {max}")]
    DegreeTooLarge { n: usize, max: usize },

    #[error("invalid augmented system: {0}")]
    InvalidSystem(String),

    #[error("invalid application parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QesError>;
