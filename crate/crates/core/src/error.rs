use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("metric is not invertible at chart point {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("metric is not positive definite at chart point {point:?}")]
    NotPositiveDefinite { point: Vec<f64> },

    #[error("chart point {point:?} lies outside the chart domain: {reason}")]
    OutsideChart { point: Vec<f64>, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vectors span a degenerate plane")]
    DegeneratePlane,

    #[error("energy density t = {t} is outside the domain of weight family `{family}`")]
    OutsideWeightDomain { t: f64, family: String },

    #[error("weights of `{family}` are not admissible at t = {t}: {reason}")]
    InadmissibleWeights { t: f64, family: String, reason: String },

    #[error("the almost complex structure with epsilon = +1 is undefined on the zero section")]
    ZeroSection,

    #[error("tangent vectors are attached to different points of T(M)")]
    MismatchedBasePoint,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("invalid parameter for `{family}`: {reason}")]
    InvalidParameter { family: String, reason: String },

    #[error("invalid declarative spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
