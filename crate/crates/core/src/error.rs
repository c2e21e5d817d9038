//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The target exponent vector is not a convex combination of the node exponents.
    #[error("infeasible: target outside hull (residual {residual:.3e})")]
    Infeasible { residual: f64 },

    /// The enumeration oracle refuses instances beyond its configured size.
    #[error(
        "oracle cap exceeded: {nodes} nodes, k = {k} (limits {max_nodes} nodes, k <= {max_k})"
    )]
    CapExceeded {
        nodes: usize,
        k: usize,
        max_nodes: usize,
        max_k: usize,
    },

    /// A tabulated weight family has no sample with the requested levels.
    #[error("level unreachable: best tabulated residual {residual:.3e} exceeds {tolerance:.3e}")]
    LevelUnreachable { residual: f64, tolerance: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-uniform grid: {0}")]
    NonUniformGrid(String),

    /// Trial data cannot be rescaled into the admissible class.
    #[error("not admissible: {0}")]
    NotAdmissible(String),

    /// No positive bump radius keeps the weight variation below epsilon.
    #[error(
        "epsilon too large for grid resolution: no positive radius found (epsilon {epsilon:.3e})"
    )]
    EpsilonTooLarge { epsilon: f64 },

    /// A node norm is zero, subnormal or non-finite.
    #[error("degenerate function: {0}")]
    DegenerateFunction(String),

    #[error("unsupported norm index: {0}")]
    UnsupportedNorm(String),

    #[error("missing observation for node {0}")]
    MissingObservation(usize),

    #[error("linear program failed: {0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
