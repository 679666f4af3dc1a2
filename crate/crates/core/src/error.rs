use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("subsystem dimensions {dims:?} do not multiply to matrix size {size}")]
    DimsMismatch { dims: Vec<usize>, size: usize },

    #[error("subsystem dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("subsystem index {index} out of range for {len} subsystems")]
    SubsystemOutOfRange { index: usize, len: usize },

    #[error("cannot trace out every subsystem")]
    TraceOutAll,

    #[error("malformed subsystem permutation {0:?}")]
    MalformedPermutation(Vec<usize>),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not normalized (trace {trace})")]
    NotNormalized { trace: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("projector is not a Hermitian idempotent")]
    NotProjector,

    #[error("dense expansion of dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("entry ({row}, {col}) of magnitude {magnitude:e} lies off the diagonal and anti-diagonal")]
    NotXForm {
        row: usize,
        col: usize,
        magnitude: f64,
    },

    #[error("invalid X-form data: {0}")]
    InvalidXForm(String),

    #[error("need at least {min} qubits, got {got}")]
    TooFewQubits { got: usize, min: usize },

    #[error("mixing parameter p = {p} outside [{lo}, 1] for {n_qubits} qubits")]
    ParameterOutOfRange { p: f64, lo: f64, n_qubits: usize },

    #[error("copy count must be at least 1")]
    ZeroCopies,

    #[error("trace {trace:e} of the product is below tolerance")]
    ZeroTrace { trace: f64 },

    #[error("projection succeeds with probability zero")]
    ZeroProbability,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("indices {indices:?} do not form a rectangle across an allowed bipartition")]
    RectangleViolation { indices: [usize; 4] },

    #[error("parameter {name} = {value} must be positive")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("invalid probability vector {0:?}")]
    InvalidProbabilities(Vec<f64>),

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
