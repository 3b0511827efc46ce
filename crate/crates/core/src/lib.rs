//! Exact conditional entropy for measure-preserving Z^d actions on finite and
//! symbolic systems: partitions and disintegrations on finite probability
//! spaces, Følner boxes, conditional block entropies, entropy-rate traces and
//! the decomposition of rates over fixed partitions.

pub mod cli;
pub mod decomposition;
pub mod engine;
pub mod error;
pub mod group;
pub mod measure;
pub mod sampling;
pub mod systems;

pub use error::{Error, Result};
