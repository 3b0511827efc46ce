//! Exactly computable measure-preserving Z^d actions: finite permutation
//! actions, Bernoulli and Markov shifts, and their mixtures.

mod finite;
mod mixture;
mod patterns;
mod shift;
mod subalgebra;

pub use finite::{FinitePMPAction, Permutation};
pub use mixture::{mixture, FiniteMixture, MixtureSystem, ShiftMixture, SystemComponent};
pub use shift::{
    stationarity_residual, stationary_distribution, CellPartition, MeasureModel, ShiftSystem,
    WeightedPartition, DEFAULT_ENUMERATION_CAP, DEFAULT_GAP_CAP, STATIONARITY_TOLERANCE,
    STOCHASTIC_TOLERANCE,
};
pub use subalgebra::SubAlgebraSpec;

pub(crate) use patterns::{enumerate_patterns, Site};
