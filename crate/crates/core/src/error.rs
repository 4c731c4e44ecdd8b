use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty point set")]
    EmptyPointSet,

    #[error("polytope is {dim}-dimensional in ambient dimension {ambient}; a full-dimensional polytope is required")]
    NotFullDimensional { dim: usize, ambient: usize },

    #[error("cone is not pointed or not full-dimensional")]
    DegenerateCone,

    #[error("coefficient must be strictly positive, got {0}")]
    NonPositiveCoefficient(String),

    #[error("negative exponent in a polynomial that must be a genuine polynomial")]
    NegativeExponent,

    #[error("ray matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("invalid fan: {0}")]
    InvalidFan(String),

    #[error("polynomial is not homogeneous in the class group grading")]
    Inhomogeneous,

    #[error("numerator and denominator have different degrees {0:?} and {1:?}")]
    DegreeMismatch(Vec<i64>, Vec<i64>),

    #[error("class group has torsion along an exponent difference; only torsion-free gradings are supported")]
    Torsion,

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("tie in vertex selection for cone {cone}; the refinement is not generic")]
    VertexTie { cone: usize },

    #[error("point coordinate must be strictly positive")]
    NonPositivePoint,

    #[error("cube coordinate must lie in (0, 1], got {0}")]
    CubeCoordinate(f64),

    #[error("overflow in plain evaluation; use the log-space variant")]
    Overflow,

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    /// True for errors that mean the requested integral does not converge.
    pub fn is_divergence(&self) -> bool {
        matches!(self, Error::Divergent(_))
    }
}
