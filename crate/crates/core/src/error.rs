use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands come from different scalar backends")]
    MixedBackend,
    #[error("operation requires the exact backend")]
    ApproxBackendUnsupported,
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("basis is linearly dependent")]
    DegenerateBasis,
    #[error("span is not graded by exponentials")]
    NotGraded,
    #[error("space is not special: {0}")]
    NotSpecial(String),
    #[error("singular point {0} is not among the given points")]
    MissingSingularPoint(String),
    #[error("singular point is not rational: {0}")]
    NonRationalSingularPoint(String),
    #[error("operator keeps a pole after regularization: {0}")]
    NotRegularizable(String),
    #[error("tuple is not admissible: {0}")]
    NonAdmissibleTuple(String),
    #[error("operator is not of the phi form (residual {0:e})")]
    NotInPhiForm(f64),
    #[error("essential singularity at the contour point")]
    EssentialSingularity,
    #[error("point is not admissible: {0}")]
    NonAdmissiblePoint(String),
    #[error("parameters look non-generic: {0}")]
    PossiblyNonGeneric(String),
    #[error("no convergent start among {0} attempts")]
    MaxStartsExceeded(usize),
    #[error("space is not admissible: {0}")]
    NonAdmissibleSpace(String),
    #[error("kernel solve failed: {0}")]
    KernelSolveFailed(String),
    #[error("correspondence broken: {0}")]
    CorrespondenceBroken(String),
    #[error("weights do not match: {0}")]
    WeightMismatch(String),
    #[error("coinciding parameters: {0}")]
    CoincidingParameters(String),
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("degree {0} exceeds {1}")]
    DegreeTooHigh(usize, usize),
    #[error("duality violated at index {index}: residual {residual:e}")]
    DualityViolation { index: usize, residual: f64 },
    #[error("coefficients are not polynomial")]
    NonPolynomialCoefficients,
    #[error("evaluation point hits a pole")]
    PoleHit,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
