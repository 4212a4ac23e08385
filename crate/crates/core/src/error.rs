use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operand is not of pure parity")]
    MixedParity,

    #[error("operation requires an even supermatrix")]
    NotEven,

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("generator count {0} exceeds the supported maximum of 16")]
    TooManyGenerators(usize),

    #[error("unsupported signature ({k},{l}): {reason}")]
    UnsupportedSignature { k: usize, l: usize, reason: String },

    #[error("spin generator needs two distinct indices, got ({0},{0})")]
    RepeatedIndex(usize),

    #[error("bilinear form is not suitable (sigma = {sigma}, tau = {tau}); pi is symmetric only when sigma*tau = +1")]
    NotSuitable { sigma: i8, tau: i8 },

    #[error("bilinear form is degenerate")]
    Degenerate,

    #[error("no non-degenerate suitable form exists for signature ({k},{l})")]
    NoSuitableForm { k: usize, l: usize },

    #[error("solver size exceeded: {0}")]
    SolverTooLarge(String),

    #[error("basis is not orthonormal (deviation {0:.3e})")]
    NonOrthonormalBasis(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid model space: {0}")]
    InvalidModel(String),

    #[error("point {0:?} is too close to the chart boundary for central differences")]
    BoundaryPoint(Vec<f64>),

    #[error("field kind `{field}` is not compatible with a {space} model space")]
    IncompatibleField { field: String, space: String },
}
