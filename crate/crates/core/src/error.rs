use std::fmt;

use thiserror::Error;

/// Evidence that a graph does not yield a homogeneous cone.
///
/// Vertex labels are 1-based, matching the graph file format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A chordless cycle of length at least four (the graph is not decomposable).
    ChordlessCycle(Vec<usize>),
    /// An induced path on four vertices (an A4 subgraph), listed in path order.
    InducedPath(Vec<usize>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("-")
        };
        match self {
            Witness::ChordlessCycle(c) => write!(f, "chordless cycle {}-{}", join(c), c[0]),
            Witness::InducedPath(p) => write!(f, "induced A4 path {}", join(p)),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis for block ({l},{k}) is rank deficient")]
    RankDeficient { l: usize, k: usize },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("element is not in Z_V (residual {0:e})")]
    NotInZ(f64),

    #[error("point is not in the cone P_V")]
    NotInCone,

    #[error("point is not in the dual cone Q_V")]
    NotInDualCone,

    #[error("invalid shape parameter: {0}")]
    InvalidShape(String),

    #[error("shape parameter is outside the Gindikin set")]
    OutsideGindikin,

    #[error("graph is not homogeneous: {0}")]
    NotHomogeneous(Witness),

    #[error("no permutation satisfies the diagonal condition")]
    PermutationNotFound,

    #[error("structure mismatch: {0}")]
    StructureMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("not enough samples: {0}")]
    InsufficientSamples(String),

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for ConeError {
    fn from(e: serde_json::Error) -> Self {
        ConeError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, ConeError>;
