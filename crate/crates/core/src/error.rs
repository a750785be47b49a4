use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge: worst subinterval [{a}, {b}] has error {error:e} \
         (total {total_error:e}, tolerance {tolerance:e})"
    )]
    NonConvergence {
        a: f64,
        b: f64,
        error: f64,
        total_error: f64,
        tolerance: f64,
    },

    #[error("{context}: {source}")]
    Annotated {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("covariance violates the uncertainty bound: det = {det} < 1/4")]
    InvalidState { det: f64 },

    #[error("time step {step} exceeds the stability limit {limit}")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub fn annotate(self, context: impl Into<String>) -> Error {
        Error::Annotated {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Annotated { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
