use thiserror::Error;

/// Errors raised by state construction, linear algebra and optimization.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("subsystem layout needs at least one party, each of local dimension >= 2")]
    InvalidLayout,
    #[error("party index {index} out of range for a {parties}-party layout")]
    PartyOutOfRange { index: usize, parties: usize },
    #[error("party subset is empty")]
    EmptySubset,
    #[error("party subset contains duplicate indices")]
    DuplicateParty,
    #[error("operation requires a proper subset of the parties")]
    NotProperSubset,
    #[error("groups do not partition the party set")]
    InvalidPartition,
    #[error("embedding dimensions must not shrink any party")]
    InvalidEmbedding,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state vector squared norm deviates from 1 by {0:.3e}")]
    NotNormalized(f64),
    #[error("matrix is not Hermitian within tolerance (max entry deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix trace deviates from 1 by {0:.3e}")]
    TraceNotOne(f64),
    #[error("matrix has eigenvalue {0:.3e} below the positivity tolerance")]
    NotPositiveSemidefinite(f64),
    #[error("W-class coefficient normalization deviates from 1 by {0:.3e}")]
    CoefficientsNotNormalized(f64),
    #[error("parameter {name} = {value} outside [0, 1]")]
    ParamOutOfRange { name: &'static str, value: f64 },
    #[error("degenerate reduction: the kept parties carry no W-class weight")]
    DegenerateReduction,
    #[error("matrix is not unitary within tolerance (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("ensemble size {r} is smaller than the state rank {rank}")]
    EnsembleTooSmall { r: usize, rank: usize },
    #[error("pure-state measure returned {0:.3e}, below the negativity violation threshold")]
    MeasureViolation(f64),
    #[error("cut side must be a single party of local dimension 2")]
    NotAQubitCut,
    #[error("operation requires at least {0} parties")]
    TooFewParties(usize),
    #[error("subset level m = {m} outside 2..=n-1 for n = {n}")]
    LevelOutOfRange { m: usize, n: usize },
    #[error("recursion depth exhausted")]
    DepthExhausted,
    #[error("eigenvalue iteration failed to converge")]
    EigenConvergence,
    #[error("malformed state file: {0}")]
    MalformedState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
