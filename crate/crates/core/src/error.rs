use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "truncation n_max = {n_max} too small for amplitude {amplitude} (need at least {required})"
    )]
    TruncationTooSmall {
        amplitude: f64,
        n_max: usize,
        required: usize,
    },

    #[error("displacement {beta} exceeds the interior-validity limit {limit} for n_max = {n_max}")]
    DisplacementGuard { beta: f64, limit: f64, n_max: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("Fisher information diverges at p = {0}")]
    Divergent(f64),

    #[error("polynomial fit is ill-conditioned (condition {condition:e}); reduce the degree below {degree}")]
    IllConditioned { condition: f64, degree: usize },

    #[error("operating point is not at mid-fringe: {0}")]
    OperatingPoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of a numerical guard (truncation, normalization,
    /// conditioning), as opposed to a bad request.
    pub fn is_numerical_guard(&self) -> bool {
        !matches!(self, Error::InvalidArgument(_) | Error::OperatingPoint(_))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
