use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude vector has length {len}, expected 2^{m} = {}", 1usize << m)]
    BadLength { m: usize, len: usize },

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("zero vector cannot be evaluated or normalized")]
    ZeroVector,

    #[error("matrix is not a valid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("basis vectors are not orthogonal (|<phi0|phi1>| = {0})")]
    NonOrthogonalBasis(f64),

    #[error("invalid Bloch vector: {0}")]
    InvalidBloch(String),

    #[error("qubit index {k} out of range for {m} qubits (indices are 1-based)")]
    IndexOutOfRange { k: usize, m: usize },

    #[error("matrix rank exceeds 2 (third eigenvalue {0:e})")]
    RankTooHigh(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("measure `{measure}` applies to {expected} qubits, got {got}")]
    WrongQubitCount {
        measure: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown measure `{0}` (expected `concurrence` or `sqrt_three_tangle`)")]
    UnknownMeasure(String),

    #[error("invalid SLOCC operator: {0}")]
    InvalidSlocc(String),

    #[error(
        "interpolated polynomial fails check nodes (relative residual {0:e}); degree mis-declared?"
    )]
    InterpolationResidual(f64),

    #[error(
        "zero-polytope polynomial vanishes identically: the measure is zero on the whole range"
    )]
    ZeroPolynomialIdentically,

    #[error("measure vanishes on every basis tried in the range; the zero polytope is the whole Bloch ball")]
    EntireRangeVanishes,

    #[error("state is not one-root; the closed form does not apply")]
    NotOneRoot,

    #[error("certificate does not belong to this state's range (overlap {0})")]
    CertificateMismatch(f64),

    #[error("state is rank deficient (smallest eigenvalue {0:e}); every decomposition is trivial")]
    RankDeficient(f64),

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("theorem precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("unsupported SLOCC class {0} (generators exist for 4, 5, 7, 8)")]
    UnsupportedClass(u8),

    #[error("wrong number of class parameters for class {mu}: expected {expected}, got {got}")]
    BadClassParameters { mu: u8, expected: usize, got: usize },

    #[error("degenerate family parameters: {0}")]
    DegenerateParameters(String),

    #[error("random SLOCC sampling failed after {0} attempts")]
    SamplingFailed(usize),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
