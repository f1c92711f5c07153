//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input graph is not a series-parallel multigraph.
    #[error("not a series-parallel multigraph: {0}")]
    NotSeriesParallel(&'static str),

    /// Input graph has a block that is neither a clique nor a cycle, or the
    /// requested sub-mode (block / cactus) rejects it.
    #[error("not in the block-cactus class: {0}")]
    NotBlockCactus(&'static str),

    /// Input graph is not a 3-leaf power.
    #[error("not a 3-leaf power: {0}")]
    Not3LeafPower(&'static str),

    /// Malformed argument or input data.
    #[error("invalid input: {0}")]
    Invalid(&'static str),

    /// Serialized payload failed validation.
    #[error("corrupt container: {0}")]
    Corrupt(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
