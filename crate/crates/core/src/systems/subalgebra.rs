use serde::Serialize;

use super::shift::CellPartition;
use crate::error::Result;
use crate::measure::Partition;

/// The invariant sub-σ-algebra 𝒜 conditioned on, given by its generating partition 𝒞.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SubAlgebraSpec {
    /// The trivial algebra; conditional quantities reduce to unconditional ones.
    Trivial,
    /// A partition of a finite space with T_g 𝒞 = 𝒞 for the generators.
    InvariantPartition { partition: Partition },
    /// The factor generated by a symbolwise map alphabet → factor alphabet,
    /// read at every coordinate. Shift-invariant by construction.
    SymbolFactor { factor: CellPartition },
}

impl SubAlgebraSpec {
    pub fn invariant_partition(partition: Partition) -> Self {
        Self::InvariantPartition { partition }
    }

    /// From the factor map, one factor symbol per alphabet symbol.
    pub fn symbol_factor(map: &[usize]) -> Result<Self> {
        Ok(Self::SymbolFactor {
            factor: CellPartition::new(map)?,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::InvariantPartition { .. } => "invariant_partition",
            Self::SymbolFactor { .. } => "symbol_factor",
        }
    }
}
