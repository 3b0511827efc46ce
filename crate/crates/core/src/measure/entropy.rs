//! Entropy of a partition and mean conditional entropy, in nats.
//!
//! `entropy` is −Σ μ(A) log μ(A) over the positive-mass blocks. On a finite
//! space every partition covers the space, so the `+∞` value reserved for a
//! partition whose positive-mass blocks miss a set of positive measure never
//! occurs; callers should still treat `f64::INFINITY` as a legal result.

use std::collections::BTreeMap;

use super::partition::Partition;
use super::space::FiniteProbabilitySpace;
use crate::error::Result;

/// −Σ m log m over the strictly positive masses.
pub fn entropy_of_masses(masses: impl IntoIterator<Item = f64>) -> f64 {
    masses
        .into_iter()
        .filter(|&m| m > 0.0)
        .map(|m| -m * m.ln())
        .sum::<f64>()
        + 0.0
}

/// H_μ(α).
pub fn entropy(alpha: &Partition, space: &FiniteProbabilitySpace) -> Result<f64> {
    Ok(entropy_of_masses(alpha.block_masses(space)?))
}

/// Σ over fibers B of Σ over cells A ⊂ B of −μ(A) log(μ(A)/μ(B)).
///
/// `cells` yields `(fiber key, cell mass)` pairs; cells sharing a key make up
/// one fiber. Fibers of zero total mass contribute nothing.
pub fn fiber_entropy<K: Ord>(cells: impl IntoIterator<Item = (K, f64)>) -> f64 {
    let mut fibers: BTreeMap<K, Vec<f64>> = BTreeMap::new();
    for (k, m) in cells {
        fibers.entry(k).or_default().push(m);
    }
    let mut total = 0.0;
    for masses in fibers.values() {
        let fiber: f64 = masses.iter().sum();
        if fiber <= 0.0 {
            continue;
        }
        for &m in masses {
            if m > 0.0 {
                total -= m * (m / fiber).ln();
            }
        }
    }
    total.max(0.0)
}

/// H_μ(α | β): the β-fiberwise entropy of α averaged over the factor space.
pub fn conditional_entropy(
    alpha: &Partition,
    beta: &Partition,
    space: &FiniteProbabilitySpace,
) -> Result<f64> {
    let a = alpha.labels(space)?;
    let b = beta.labels(space)?;
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for ((&la, &lb), &m) in a.iter().zip(&b).zip(space.masses()) {
        *cells.entry((lb, la)).or_insert(0.0) += m;
    }
    Ok(fiber_entropy(cells.into_iter().map(|((lb, _), m)| (lb, m))))
}

pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
