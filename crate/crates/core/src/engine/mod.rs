//! Conditional block entropies H_μ(α^F | 𝒞), Følner entropy-rate traces and
//! the executable checks of the conditional-entropy inequalities.

mod block;
mod exchangeable;
mod rate;
mod verify;

use std::fmt::Debug;

use crate::error::Result;
use crate::group::FolnerSubset;
use crate::systems::{DEFAULT_ENUMERATION_CAP, DEFAULT_GAP_CAP};

pub use crate::systems::SubAlgebraSpec;
pub use rate::{
    entropy_rate, h_conditional, ConvergenceReport, HConditional, LimitKind, RateEntry,
    RateOutcome, RateTrace,
};
pub use verify::{
    verify_exhaustion, verify_partition_identities, verify_rate_inequalities, CheckKind,
    ExhaustionReport, PropertyCheck, RateInequalityReport,
};

/// Default stopping tolerance for rate traces.
pub const DEFAULT_RATE_TOLERANCE: f64 = 1e-3;
/// Tolerance for inequalities between estimated limits.
pub const LIMIT_TOLERANCE: f64 = 1e-6;

/// How an infinite conditioning algebra is cut down to a finite window W ⊇ F.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Conditioning {
    /// Condition on the factor inside F itself, and refuse when that is not
    /// the exact answer.
    Exact,
    /// W = F ⊕ [−r, r]^d.
    Margin(usize),
    /// A fixed window, which must contain F.
    Window(FolnerSubset),
}

#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub conditioning: Conditioning,
    pub enumeration_cap: u64,
    pub gap_cap: usize,
    pub tol: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            conditioning: Conditioning::Margin(0),
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            gap_cap: DEFAULT_GAP_CAP,
            tol: DEFAULT_RATE_TOLERANCE,
        }
    }
}

/// A measure-preserving Z^d action whose finite block entropies can be
/// computed exactly.
pub trait EntropySystem {
    type Partition: Clone + Debug + PartialEq;

    fn dimension(&self) -> usize;

    fn trivial_partition(&self) -> Self::Partition;

    /// The partition whose translates generate the whole algebra.
    fn generating_partition(&self) -> Self::Partition;

    fn join(&self, a: &Self::Partition, b: &Self::Partition) -> Result<Self::Partition>;

    /// `a ≤ b`, mod null sets.
    fn is_coarser(&self, a: &Self::Partition, b: &Self::Partition) -> Result<bool>;

    /// G𝒞 ≤ 𝒞 on the generators (and their inverses when asked). Errors when
    /// the spec kind does not fit the system.
    fn check_invariant(&self, sub: &SubAlgebraSpec, with_inverses: bool) -> Result<bool>;

    /// H_μ(α^F | 𝒞_W) without validating `sub`.
    fn block_entropy(
        &self,
        alpha: &Self::Partition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Result<f64>;

    /// H_μ(α^F | β^F ∨ 𝒞_W).
    fn block_entropy_given(
        &self,
        alpha: &Self::Partition,
        beta: &Self::Partition,
        window: &FolnerSubset,
        sub: &SubAlgebraSpec,
        opts: &EngineOptions,
    ) -> Result<f64> {
        let joint = self.join(alpha, beta)?;
        let both = self.block_entropy(&joint, window, sub, opts)?;
        let given = self.block_entropy(beta, window, sub, opts)?;
        Ok((both - given).max(0.0))
    }

    /// Size of the conditioning window used for F, when one is used.
    fn conditioning_size(
        &self,
        _window: &FolnerSubset,
        _sub: &SubAlgebraSpec,
        _opts: &EngineOptions,
    ) -> Option<usize> {
        None
    }

    /// For systems whose block entropies are bounded (finite spaces), the
    /// bound; the entropy rate is then exactly zero.
    fn bounded_numerator(&self) -> Option<f64> {
        None
    }
}

/// H_μ(α^F | 𝒞), after checking that `sub` is an invariant sub-algebra of the
/// system.
pub fn conditional_block_entropy<S: EntropySystem>(
    system: &S,
    alpha: &S::Partition,
    window: &FolnerSubset,
    sub: &SubAlgebraSpec,
    opts: &EngineOptions,
) -> Result<f64> {
    ensure_invariant(system, sub)?;
    system.block_entropy(alpha, window, sub, opts)
}

pub(crate) fn ensure_invariant<S: EntropySystem>(system: &S, sub: &SubAlgebraSpec) -> Result<()> {
    if system.check_invariant(sub, false)? {
        Ok(())
    } else {
        Err(crate::Error::Incompatible(
            "conditioning partition is not invariant under the action".into(),
        ))
    }
}
