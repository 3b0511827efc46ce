use thiserror::Error;

/// Errors raised by the measure, group, system and engine layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space mismatch")]
    SpaceMismatch,
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("degenerate fiber: block {0} has zero mass")]
    DegenerateFiber(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty set")]
    EmptySet,
    #[error("index {index} out of schedule of length {len}")]
    OutOfSchedule { index: usize, len: usize },
    #[error("size cap exceeded: {size} > {cap}")]
    SizeCap { size: usize, cap: usize },
    #[error("enumeration cap exceeded: {patterns} patterns > {cap}; use a smaller window")]
    EnumerationCap { patterns: u128, cap: u64 },
    #[error("gap cap exceeded: total gap {gap} > {cap}")]
    GapCap { gap: usize, cap: usize },
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("incompatible: {0}")]
    Incompatible(String),
    #[error("partition not fixed: block {block} is moved by generator {generator}")]
    NotFixed { block: usize, generator: usize },
    #[error("chain not increasing at index {0}")]
    ChainNotIncreasing(usize),
    #[error("empty partition list")]
    EmptyList,
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

impl Error {
    /// True for errors caused by an enumeration or size ceiling rather than bad input.
    pub fn is_resource_cap(&self) -> bool {
        matches!(
            self,
            Error::SizeCap { .. } | Error::EnumerationCap { .. } | Error::GapCap { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
