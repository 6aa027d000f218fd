use thiserror::Error;

/// Errors produced by the sensing/communication model and its solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Target sits on (or within 1e-6 m of) an access point.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// A scenario, waveform or constraint set violates its invariants.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "quadrature did not converge on [{lower:e}, {upper:e}]: estimate {estimate:e}, \
         error estimate {error_estimate:e} after {evaluations} evaluations"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// The Fisher information is singular or too ill-conditioned to invert.
    #[error("estimation infeasible: {0}")]
    EstimationInfeasible(String),

    #[error("line search stagnated after {backtracks} backtracks (last step {step:e})")]
    Stagnation { backtracks: usize, step: f64 },

    /// Config file problem, with the dotted path of the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
