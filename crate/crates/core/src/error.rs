use thiserror::Error;

/// Everything that can go wrong in this crate, in one shallow taxonomy.
///
/// Callers that need exit-code semantics can treat `Config` as a usage
/// problem and everything else as a computational/input problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col} (1-based)")]
    NonFiniteInput { row: usize, col: usize },

    #[error("matrix size mismatch: {left} vs {right} observations")]
    SizeMismatch { left: usize, right: usize },

    #[error("sample too small: need at least {needed} observations, got {got}")]
    SampleTooSmall { needed: usize, got: usize },

    #[error("median-heuristic bandwidth is degenerate: all pairwise distances are zero")]
    DegenerateBandwidth,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("anchor index {anchor} out of range for {n} observations")]
    AnchorOutOfRange { anchor: usize, n: usize },

    #[error("permutation count must be at least 1")]
    ZeroPermutations,

    #[error("affinity row {row} has zero degree; spectral clustering is undefined")]
    ZeroDegreeRow { row: usize },

    #[error("cluster count {k} exceeds the number of observations {n}")]
    TooManyClusters { k: usize, n: usize },

    #[error("{path}: row {row}, column {col} (1-based): {message}")]
    Parse {
        path: String,
        row: usize,
        col: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
