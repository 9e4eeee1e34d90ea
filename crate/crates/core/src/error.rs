use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian: residual {residual:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { residual: f64, tolerance: f64 },

    #[error("trace {trace} differs from 1 by more than {tolerance:.1e}")]
    TraceMismatch { trace: f64, tolerance: f64 },

    #[error("operator is not positive semi-definite: minimum eigenvalue {min_eigenvalue:.3e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Hermitian eigensolver failed to converge")]
    EigenFailure,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no Kraus operators given")]
    NoKraus,

    #[error("Kraus operator {index} has shape {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    KrausShape {
        index: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },

    #[error("channel is not trace preserving: residual {residual:.3e} exceeds {tolerance:.1e}")]
    NotTracePreserving { residual: f64, tolerance: f64 },

    #[error("tensor product dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("parameter `{name}` = {value} out of range ({expected})")]
    ParameterRange {
        name: String,
        value: f64,
        expected: String,
    },

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("invalid channel spec: {0}")]
    InvalidSpec(String),

    #[error("cluster index {index} out of range for {count} clusters")]
    ClusterIndex { index: usize, count: usize },

    #[error("wrong rank case: {0}")]
    WrongRankCase(String),

    #[error("perturbation direction is not traceless: trace {trace:.3e}")]
    NotTraceless { trace: f64 },

    #[error("epsilon {0} outside the admissible range")]
    EpsilonOutOfRange(f64),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("line family `{family}` does not fit a channel with input dimension {dim_in}")]
    FamilyMismatch { family: String, dim_in: usize },

    #[error("no sign change on [{lo}, {hi}]: margins {f_lo:.6e} and {f_hi:.6e}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("base state differs from the product of declared optimal states (residual {0:.3e})")]
    BaseMismatch(f64),

    #[error("base state is not pure (largest eigenvalue {0})")]
    NotPure(f64),

    #[error("unknown tolerance key `{0}`")]
    UnknownTolerance(String),
}
