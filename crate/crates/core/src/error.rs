use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("not a projector (hermiticity defect {hermiticity:.3e}, idempotency defect {idempotency:.3e})")]
    NotProjector { hermiticity: f64, idempotency: f64 },

    #[error("not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("not unitary (defect {defect:.3e} exceeds {threshold:.1e})")]
    NotUnitary { defect: f64, threshold: f64 },

    #[error("not a density operator: {0}")]
    NotDensity(String),

    #[error("span of the given kets is zero")]
    ZeroSpan,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("invalid decomposition of the identity: completeness defect {completeness:.3e}, max overlap {overlap:.3e}")]
    InvalidDecomposition { completeness: f64, overlap: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time index {index} out of range for grid of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown label `{label}` at time {time}")]
    UnknownLabel { time: String, label: String },

    #[error("unknown time `{0}`")]
    UnknownTime(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("family is inconsistent ({violations} violating pairs, max normalized overlap {max_overlap:.3e}); probabilities refused under the single framework rule")]
    InconsistentFamily { violations: usize, max_overlap: f64 },

    #[error("conditioning event has zero probability")]
    ZeroConditionProbability,

    #[error("families do not share dynamics: {0}")]
    PropagatorMismatch(String),

    #[error("families carry different boundary conditions")]
    BoundaryMismatch,

    #[error("duplicate time {0}")]
    DuplicateTime(f64),

    #[error("cannot add time {0} before the initial-state time")]
    TimeBeforeBoundary(f64),

    #[error("boost velocity |v| = {0} must be below the speed of light")]
    SuperluminalBoost(f64),

    #[error("causal precedence contains a cycle through events {0:?}")]
    CyclicCausality(Vec<String>),

    #[error("embedding impossible: entangled event `{entangled}` is forced both before and after `{other}`")]
    EmbeddingImpossible { entangled: String, other: String },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

pub type Result<T> = std::result::Result<T, Error>;
