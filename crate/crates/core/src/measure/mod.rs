//! Finite probability spaces, partitions and their entropy algebra.

mod disintegration;
mod entropy;
mod partition;
mod space;

pub use disintegration::{disintegrate, factor_space, Disintegration, FactorSpace};
pub use entropy::{conditional_entropy, entropy, entropy_of_masses, fiber_entropy, nats_to_bits};
pub use partition::Partition;
pub use space::{FiniteProbabilitySpace, SpaceId, MASS_TOLERANCE};

/// Tolerance for identities between entropies, which accumulate log error.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;
