use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid order {0}")]
    InvalidOrder(String),

    #[error("point {t} outside of [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonfiniteRhs { t: f64 },

    #[error("Newton iteration failed to converge at t = {t} after {iterations} iterations")]
    NewtonFailure { t: f64, iterations: usize },

    #[error("no convergence after {sweeps} sweeps (correction {correction:e}, residual {residual:e})")]
    NoConvergence {
        sweeps: usize,
        correction: f64,
        residual: f64,
    },

    #[error("interval {index}: {source}")]
    Interval {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("coefficient is not positive at t = {t} (q = {value})")]
    CoefficientNonpositive { t: f64, value: f64 },

    #[error("phase derivative is not positive at t = {t}")]
    NonpositiveDerivative { t: f64 },

    #[error("degenerate phase at t = {t}: alpha' = {alpha_prime}")]
    DegeneratePhase { t: f64, alpha_prime: f64 },

    #[error("singular boundary system (relative determinant {relative_det:e})")]
    SingularSystem { relative_det: f64 },

    #[error("phase file: {0}")]
    Format(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Strips `Interval` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Interval { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::NonfiniteRhs { .. }
                | Error::NewtonFailure { .. }
                | Error::NoConvergence { .. }
                | Error::NonpositiveDerivative { .. }
                | Error::DegeneratePhase { .. }
                | Error::SingularSystem { .. }
        )
    }
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), message: e.to_string() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
