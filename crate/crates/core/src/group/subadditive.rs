//! Hypothesis checks for set functions φ on the subsets of a finite box:
//! monotonicity, strong subadditivity, translation invariance, and the
//! k-cover inequality φ(F) ≤ (1/k) Σ_{E∈𝒦} φ(E) on sampled covers.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{FolnerSubset, GroupElement};
use crate::error::{Error, Result};

/// Largest box for which all pairs (E, F) are checked directly; beyond it the
/// equivalent local form φ(S+x) + φ(S+y) ≥ φ(S+x+y) + φ(S) is used.
const EXHAUSTIVE_PAIR_LIMIT: usize = 12;
const MAX_WITNESSES: usize = 16;

#[derive(Clone, Debug)]
pub struct SubadditivityOptions {
    pub samples: usize,
    pub seed: u64,
    pub size_cap: usize,
    pub tolerance: f64,
}

impl Default for SubadditivityOptions {
    fn default() -> Self {
        Self {
            samples: 1000,
            seed: 0,
            size_cap: 16,
            tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub slack: f64,
    pub e: Vec<GroupElement>,
    pub f: Vec<GroupElement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// Outcome of one hypothesis: how many instances were checked, the smallest
/// slack seen, and up to 16 witnesses of violation.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub checks: u64,
    pub violations: u64,
    pub min_slack: f64,
    pub witnesses: Vec<Violation>,
}

impl HypothesisCheck {
    fn new() -> Self {
        Self {
            checks: 0,
            violations: 0,
            min_slack: f64::INFINITY,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, slack: f64, tol: f64, witness: impl FnOnce() -> Violation) {
        self.checks += 1;
        self.min_slack = self.min_slack.min(slack);
        if slack < -tol {
            self.violations += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityReport {
    pub subsets: usize,
    pub exhaustive_pairs: bool,
    pub monotonicity: HypothesisCheck,
    pub strong_subadditivity: HypothesisCheck,
    pub translation_invariance: HypothesisCheck,
    pub k_cover: HypothesisCheck,
}

impl SubadditivityReport {
    pub fn total_violations(&self) -> u64 {
        self.monotonicity.violations
            + self.strong_subadditivity.violations
            + self.translation_invariance.violations
            + self.k_cover.violations
    }
}

/// Evaluate `phi` on every subset of `domain` (the empty set included) and
/// check the hypotheses of the subadditive convergence theorem.
pub fn verify_subadditive_hypotheses(
    mut phi: impl FnMut(&FolnerSubset) -> Result<f64>,
    domain: &FolnerSubset,
    opts: &SubadditivityOptions,
) -> Result<SubadditivityReport> {
    let n = domain.len();
    if n > opts.size_cap {
        return Err(Error::SizeCap {
            size: n,
            cap: opts.size_cap,
        });
    }
    let elems: Vec<GroupElement> = domain.iter().cloned().collect();
    let position: HashMap<&GroupElement, usize> =
        elems.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let d = domain.dim();
    let subset_of = |mask: u32| -> FolnerSubset {
        FolnerSubset::new(
            d,
            (0..n).filter(|i| mask >> i & 1 == 1).map(|i| elems[i].clone()),
        )
        .expect("elements share the domain dimension")
    };
    let members = |mask: u32| -> Vec<GroupElement> {
        (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| elems[i].clone())
            .collect()
    };

    let count = 1usize << n;
    let mut values = Vec::with_capacity(count);
    for mask in 0..count as u32 {
        values.push(phi(&subset_of(mask))?);
    }
    let tol = opts.tolerance;

    let mut mono = HypothesisCheck::new();
    for s in 0..count as u32 {
        for x in 0..n {
            if s >> x & 1 == 0 {
                let t = s | 1 << x;
                let slack = values[t as usize] - values[s as usize];
                mono.record(slack, tol, || Violation {
                    slack,
                    e: members(s),
                    f: members(t),
                    k: None,
                });
            }
        }
    }

    let exhaustive_pairs = n <= EXHAUSTIVE_PAIR_LIMIT;
    let mut ssa = HypothesisCheck::new();
    if exhaustive_pairs {
        for e in 0..count as u32 {
            for f in e..count as u32 {
                let slack = values[e as usize] + values[f as usize]
                    - values[(e | f) as usize]
                    - values[(e & f) as usize];
                ssa.record(slack, tol, || Violation {
                    slack,
                    e: members(e),
                    f: members(f),
                    k: None,
                });
            }
        }
    } else {
        for s in 0..count as u32 {
            for x in 0..n {
                for y in x + 1..n {
                    if s >> x & 1 == 1 || s >> y & 1 == 1 {
                        continue;
                    }
                    let (sx, sy) = (s | 1 << x, s | 1 << y);
                    let slack = values[sx as usize] + values[sy as usize]
                        - values[(sx | sy) as usize]
                        - values[s as usize];
                    ssa.record(slack, tol, || Violation {
                        slack,
                        e: members(sx),
                        f: members(sy),
                        k: None,
                    });
                }
            }
        }
    }

    // Shifts by ±e_i, compared only when the translate stays inside the domain.
    let mut shifts: Vec<Vec<Option<usize>>> = Vec::new();
    for axis in 0..d {
        for step in [1i64, -1] {
            let delta = GroupElement::axis(d, axis, step);
            shifts.push(
                elems
                    .iter()
                    .map(|g| {
                        let moved = g.checked_add(&delta).expect("same dim");
                        position.get(&moved).copied()
                    })
                    .collect(),
            );
        }
    }
    let mut trans = HypothesisCheck::new();
    for s in 1..count as u32 {
        for shift in &shifts {
            let moved = (0..n)
                .filter(|i| s >> i & 1 == 1)
                .try_fold(0u32, |acc, i| shift[i].map(|j| acc | 1 << j));
            if let Some(t) = moved {
                let slack = -(values[t as usize] - values[s as usize]).abs();
                trans.record(slack, tol, || Violation {
                    slack,
                    e: members(s),
                    f: members(t),
                    k: None,
                });
            }
        }
    }

    let mut cover = HypothesisCheck::new();
    if n > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.samples {
            let f = rng.gen_range(1..count as u32);
            let k = rng.gen_range(1..=3usize);
            let cover_sets = sample_k_cover(&mut rng, f, n, k);
            let sum: f64 = cover_sets.iter().map(|&e| values[e as usize]).sum();
            let slack = sum / k as f64 - values[f as usize];
            cover.record(slack, tol, || Violation {
                slack,
                e: cover_sets.iter().flat_map(|&e| members(e)).collect(),
                f: members(f),
                k: Some(k),
            });
        }
    }

    Ok(SubadditivityReport {
        subsets: count,
        exhaustive_pairs,
        monotonicity: mono,
        strong_subadditivity: ssa,
        translation_invariance: trans,
        k_cover: cover,
    })
}

/// A multiset of nonempty subsets of `f` covering each element at least `k` times.
fn sample_k_cover(rng: &mut ChaCha8Rng, f: u32, n: usize, k: usize) -> Vec<u32> {
    let mut sets = Vec::new();
    let mut hits = vec![0usize; n];
    let need = |hits: &[usize]| (0..n).any(|i| f >> i & 1 == 1 && hits[i] < k);
    let budget = 4 * k * (f.count_ones() as usize);
    while need(&hits) && sets.len() < budget {
        let e = rng.gen::<u32>() & f;
        if e == 0 {
            continue;
        }
        for (i, h) in hits.iter_mut().enumerate() {
            if e >> i & 1 == 1 {
                *h += 1;
            }
        }
        sets.push(e);
    }
    for (i, h) in hits.iter_mut().enumerate().take(n) {
        while f >> i & 1 == 1 && *h < k {
            sets.push(1 << i);
            *h += 1;
        }
    }
    sets
}
