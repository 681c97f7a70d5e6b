use thiserror::Error;

/// Errors raised by the algebra, factorization, realization and synthesis
/// pipeline. Each variant names the failing condition; callers map them to
/// exit codes or user-facing messages.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid support box: {0}")]
    InvalidBox(String),
    #[error("spatial index {index} outside box [{min}, {max}]")]
    IndexOutOfBox { index: i64, min: i64, max: i64 },
    #[error("series is not temporally causal: nonzero coefficient at (i={i}, t={t})")]
    NotTemporallyCausal { i: i64, t: i64 },
    #[error("leading lambda^0 term depends on z: nonzero coefficient at z^{i}")]
    NonScalarLeadingTerm { i: i64 },
    #[error("leading lambda^0 term {value:e} is below tolerance")]
    SingularLeadingTerm { value: f64 },
    #[error("series is not cone causal: coefficient {value:e} at (i={i}, t={t}) with t < |i|")]
    NotCone { i: i64, t: i64, value: f64 },
    #[error("inner factor is not a pure temporal delay: {0}")]
    UnsupportedInnerStructure(String),
    #[error("plant is not open-loop stable: {0}")]
    Unstable(String),
    #[error("feedback is ill posed: lambda^0 term of 1 - Gyu*Q is {value:e}")]
    IllPosedFeedback { value: f64 },
    #[error("D matrix is singular (condition estimate {cond:e})")]
    SingularD { cond: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("algebraic loop: I - D3*D is singular")]
    AlgebraicLoop,
    #[error("not realizable as an l-causal system: {0}")]
    NotRealizableAsLCausal(String),
    #[error("wraparound risk: {0}")]
    WraparoundRisk(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
