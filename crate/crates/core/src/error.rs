//! Error taxonomy shared by every module in the crate.

use thiserror::Error;

/// Failure categories for clustering, decomposition and data generation.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated (shape, range, finiteness).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The data admits no well-defined answer (e.g. an empty cluster after
    /// all k-means restarts, or a zero median pairwise distance).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Synthetic data generation could not satisfy its constraints.
    #[error("generation failure: {0}")]
    GenerationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
