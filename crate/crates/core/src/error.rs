use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for a {n_sites}-site register")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("two-site gate needs distinct sites, got {0} twice")]
    SameSite(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("{backend} backend supports at most {max} sites, circuit has {n_sites}")]
    CapacityExceeded {
        backend: &'static str,
        max: usize,
        n_sites: usize,
    },
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("gate after terminal measurement")]
    GateAfterMeasure,
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("unknown noise parameter `{0}`")]
    UnknownParameter(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no shots survived post-selection")]
    EmptySelection,
    #[error("input has no counts")]
    EmptyCounts,
    #[error("projection onto a zero-probability subspace")]
    ZeroProjection,
    #[error("dataset has zero likelihood for every admissible state")]
    ZeroLikelihood,
    #[error("optimizer did not converge: best {best} vs exact {exact}")]
    NoConvergence { best: f64, exact: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
