use std::collections::HashMap;

use serde::Serialize;

use super::patterns::{enumerate_patterns, path_mass, Site};
use crate::error::{Error, Result};
use crate::group::{FolnerSubset, GroupElement};

/// Row-sum tolerance for probability vectors.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;
/// Largest accepted |πP − π|.
pub const STATIONARITY_TOLERANCE: f64 = 1e-10;
/// Default ceiling on enumerated window patterns.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;
/// Default ceiling on the total number of marginalized gap symbols.
pub const DEFAULT_GAP_CAP: usize = 20;

/// A partition of the alphabet, read at one coordinate. Cells are numbered in
/// order of first appearance, so equal partitions have equal labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CellPartition {
    labels: Vec<usize>,
    cells: usize,
}

impl CellPartition {
    pub fn new(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("empty alphabet".into()));
        }
        let mut relabel: HashMap<usize, usize> = HashMap::new();
        let labels: Vec<usize> = labels
            .iter()
            .map(|l| {
                let next = relabel.len();
                *relabel.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self {
            cells: relabel.len(),
            labels,
        })
    }

    /// The symbol partition: one cell per symbol.
    pub fn symbols(alphabet: usize) -> Self {
        Self {
            labels: (0..alphabet).collect(),
            cells: alphabet,
        }
    }

    pub fn trivial(alphabet: usize) -> Self {
        Self {
            labels: vec![0; alphabet],
            cells: 1,
        }
    }

    pub fn alphabet(&self) -> usize {
        self.labels.len()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn label(&self, symbol: usize) -> usize {
        self.labels[symbol]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_trivial(&self) -> bool {
        self.cells == 1
    }

    pub fn join(&self, other: &CellPartition) -> Result<CellPartition> {
        if self.alphabet() != other.alphabet() {
            return Err(Error::SpaceMismatch);
        }
        let pairs: Vec<usize> = self
            .labels
            .iter()
            .zip(&other.labels)
            .map(|(a, b)| a * other.cells + b)
            .collect();
        CellPartition::new(&pairs)
    }

    /// `self ≤ finer`, ignoring symbols flagged as null.
    pub fn is_coarser(&self, finer: &CellPartition, positive: &[bool]) -> Result<bool> {
        if self.alphabet() != finer.alphabet() || positive.len() != self.alphabet() {
            return Err(Error::SpaceMismatch);
        }
        let mut owner: HashMap<usize, usize> = HashMap::new();
        for s in (0..self.alphabet()).filter(|&s| positive[s]) {
            let o = *owner.entry(finer.labels[s]).or_insert(self.labels[s]);
            if o != self.labels[s] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Mass of each cell under a symbol distribution.
    pub fn cell_masses(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cells];
        for (s, &m) in p.iter().enumerate() {
            out[self.labels[s]] += m;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureModel {
    /// Independent symbols with law `p`.
    Bernoulli { p: Vec<f64> },
    /// Stationary chain with initial law `pi` and row-stochastic `transition`.
    Markov {
        pi: Vec<f64>,
        transition: Vec<Vec<f64>>,
    },
}

/// The full shift over a finite alphabet on Z^d with an invariant measure
/// whose cylinder masses are exactly computable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftSystem {
    d: usize,
    alphabet: usize,
    model: MeasureModel,
}

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::InvalidSystem(format!("{what} must be nonnegative and nonempty")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(Error::InvalidSystem(format!("{what} sums to {total}, not 1")));
    }
    Ok(())
}

impl ShiftSystem {
    pub fn bernoulli(d: usize, p: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSystem("dimension must be at least 1".into()));
        }
        check_distribution(&p, "symbol law")?;
        Ok(Self {
            d,
            alphabet: p.len(),
            model: MeasureModel::Bernoulli { p },
        })
    }

    /// A stationary Markov chain on Z. `pi` must satisfy πP = π.
    pub fn markov(pi: Vec<f64>, transition: Vec<Vec<f64>>) -> Result<Self> {
        check_distribution(&pi, "initial law")?;
        if transition.len() != pi.len() {
            return Err(Error::InvalidSystem("transition matrix must be square".into()));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != pi.len() {
                return Err(Error::InvalidSystem("transition matrix must be square".into()));
            }
            check_distribution(row, &format!("transition row {i}"))?;
        }
        let residual = stationarity_residual(&pi, &transition);
        if residual > STATIONARITY_TOLERANCE {
            return Err(Error::InvalidSystem(format!(
                "initial law is not stationary (residual {residual:e})"
            )));
        }
        Ok(Self {
            d: 1,
            alphabet: pi.len(),
            model: MeasureModel::Markov { pi, transition },
        })
    }

    /// A Markov chain started from the stationary law of `transition`.
    pub fn markov_stationary(transition: Vec<Vec<f64>>) -> Result<Self> {
        let pi = stationary_distribution(&transition)?;
        Self::markov(pi, transition)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn model(&self) -> &MeasureModel {
        &self.model
    }

    pub fn is_bernoulli(&self) -> bool {
        matches!(self.model, MeasureModel::Bernoulli { .. })
    }

    /// Law of the symbol at a single coordinate.
    pub fn marginal(&self) -> &[f64] {
        match &self.model {
            MeasureModel::Bernoulli { p } => p,
            MeasureModel::Markov { pi, .. } => pi,
        }
    }

    /// The partition by the symbol at the origin.
    pub fn base_partition(&self) -> CellPartition {
        CellPartition::symbols(self.alphabet)
    }

    /// μ of the cylinder {x : x_f = word_f for f ∈ window}; `word` is listed
    /// in the window's iteration order.
    pub fn cylinder_measure(&self, window: &FolnerSubset, word: &[usize]) -> Result<f64> {
        self.cylinder_measure_capped(window, word, DEFAULT_GAP_CAP)
    }

    pub fn cylinder_measure_capped(
        &self,
        window: &FolnerSubset,
        word: &[usize],
        gap_cap: usize,
    ) -> Result<f64> {
        if window.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: window.dim(),
            });
        }
        if word.len() != window.len() {
            return Err(Error::InvalidPartition(format!(
                "word of length {} on a window of {} sites",
                word.len(),
                window.len()
            )));
        }
        if let Some(&s) = word.iter().find(|&&s| s >= self.alphabet) {
            return Err(Error::InvalidPartition(format!("symbol {s} outside alphabet")));
        }
        let positions: Vec<GroupElement> = window.iter().cloned().collect();
        path_mass(self, &positions, word, gap_cap)
    }

    /// The distribution of α-cell patterns on the window F: every positive
    /// mass pattern of α^F with its cylinder measure.
    pub fn window_partition(
        &self,
        alpha: &CellPartition,
        window: &FolnerSubset,
        enumeration_cap: u64,
    ) -> Result<WeightedPartition> {
        weighted_window_partition(&[(1.0, self)], alpha, window, enumeration_cap)
    }
}

pub(crate) fn weighted_window_partition(
    components: &[(f64, &ShiftSystem)],
    alpha: &CellPartition,
    window: &FolnerSubset,
    enumeration_cap: u64,
) -> Result<WeightedPartition> {
    let positions: Vec<GroupElement> = window.iter().cloned().collect();
    let site = Site::unconditioned(alpha.clone());
    let sites = vec![site; positions.len()];
    let mut patterns = Vec::new();
    enumerate_patterns(
        components,
        &positions,
        &sites,
        enumeration_cap,
        DEFAULT_GAP_CAP,
        |cells, _cond, mass| patterns.push((cells.to_vec(), mass)),
    )?;
    Ok(WeightedPartition {
        window: window.clone(),
        patterns,
    })
}

/// Patterns of cell labels on a window with their probabilities.
#[derive(Clone, Debug, Serialize)]
pub struct WeightedPartition {
    pub window: FolnerSubset,
    pub patterns: Vec<(Vec<usize>, f64)>,
}

impl WeightedPartition {
    pub fn total_mass(&self) -> f64 {
        self.patterns.iter().map(|(_, m)| m).sum()
    }

    pub fn entropy(&self) -> f64 {
        crate::measure::entropy_of_masses(self.patterns.iter().map(|(_, m)| *m))
    }
}

/// max_j |(πP)_j − π_j|.
pub fn stationarity_residual(pi: &[f64], transition: &[Vec<f64>]) -> f64 {
    (0..pi.len())
        .map(|j| {
            let pj: f64 = (0..pi.len()).map(|i| pi[i] * transition[i][j]).sum();
            (pj - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Stationary law of a row-stochastic matrix by iterating the lazy chain
/// (I + P)/2 from the uniform law until the residual drops below 1e-13.
pub fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>> {
    let k = transition.len();
    if k == 0 || transition.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidSystem("transition matrix must be square".into()));
    }
    let mut pi = vec![1.0 / k as f64; k];
    for _ in 0..1_000_000 {
        let next: Vec<f64> = (0..k)
            .map(|j| {
                let pj: f64 = (0..k).map(|i| pi[i] * transition[i][j]).sum();
                0.5 * (pi[j] + pj)
            })
            .collect();
        let total: f64 = next.iter().sum();
        pi = next.into_iter().map(|x| x / total).collect();
        if stationarity_residual(&pi, transition) < 1e-13 {
            return Ok(pi);
        }
    }
    Err(Error::NoConvergence("stationary law iteration".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markov() -> ShiftSystem {
        ShiftSystem::markov(vec![2.0 / 3.0, 1.0 / 3.0], vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn cell_partition_canonical() {
        let a = CellPartition::new(&[5, 5, 2]).unwrap();
        assert_eq!(a.labels(), &[0, 0, 1]);
        assert_eq!(a.cells(), 2);
        let b = CellPartition::new(&[0, 1, 1]).unwrap();
        assert_eq!(a.join(&b).unwrap(), CellPartition::symbols(3));
        assert!(CellPartition::trivial(3).is_coarser(&a, &[true; 3]).unwrap());
        assert!(!a.is_coarser(&b, &[true; 3]).unwrap());
        assert!(a.is_coarser(&b, &[true, false, true]).unwrap());
    }

    #[test]
    fn bernoulli_cylinders() {
        let b = ShiftSystem::bernoulli(1, vec![0.5, 0.5]).unwrap();
        let w = FolnerSubset::from_ints([0, 1]);
        assert_eq!(b.cylinder_measure(&w, &[0, 0]).unwrap(), 0.25);
        assert!(b.cylinder_measure(&w, &[0]).is_err());
        assert!(b.cylinder_measure(&w, &[0, 2]).is_err());
    }

    #[test]
    fn markov_cylinders() {
        let m = markov();
        let adj = FolnerSubset::from_ints([0, 1]);
        assert!((m.cylinder_measure(&adj, &[0, 0]).unwrap() - 0.6).abs() < 1e-15);
        let gap = FolnerSubset::from_ints([0, 2]);
        // Oracle: sum over the middle symbol.
        let oracle = 2.0 / 3.0 * (0.9 * 0.9 + 0.1 * 0.2);
        assert!((m.cylinder_measure(&gap, &[0, 0]).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.5533333).abs() < 1e-7);
        let far = FolnerSubset::from_ints([0, 30]);
        assert!(matches!(
            m.cylinder_measure(&far, &[0, 0]),
            Err(Error::GapCap { gap: 29, cap: 20 })
        ));
    }

    #[test]
    fn markov_requires_stationarity() {
        assert!(ShiftSystem::markov(vec![0.5, 0.5], vec![vec![0.9, 0.1], vec![0.2, 0.8]]).is_err());
        assert!(ShiftSystem::markov(vec![1.0], vec![vec![0.5, 0.5]]).is_err());
        let m = ShiftSystem::markov_stationary(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        assert!((m.marginal()[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_of_periodic_chain() {
        let pi = stationary_distribution(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-13);
    }

    #[test]
    fn window_partition_examples() {
        let b = ShiftSystem::bernoulli(1, vec![0.3, 0.7]).unwrap();
        let single = b
            .window_partition(&b.base_partition(), &FolnerSubset::from_ints([0]), DEFAULT_ENUMERATION_CAP)
            .unwrap();
        assert_eq!(single.patterns, vec![(vec![0], 0.3), (vec![1], 0.7)]);

        let fair = ShiftSystem::bernoulli(1, vec![0.5, 0.5]).unwrap();
        let w = fair
            .window_partition(&fair.base_partition(), &FolnerSubset::cube(1, 3), DEFAULT_ENUMERATION_CAP)
            .unwrap();
        assert_eq!(w.patterns.len(), 8);
        assert!(w.patterns.iter().all(|(_, m)| *m == 0.125));

        let m = markov();
        let w = m
            .window_partition(&m.base_partition(), &FolnerSubset::cube(1, 2), DEFAULT_ENUMERATION_CAP)
            .unwrap();
        assert_eq!(w.patterns.len(), 4);
        for (word, mass) in &w.patterns {
            let oracle = m.cylinder_measure(&FolnerSubset::cube(1, 2), word).unwrap();
            assert!((mass - oracle).abs() < 1e-15);
        }
        assert!((w.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumeration_cap() {
        let fair = ShiftSystem::bernoulli(1, vec![0.5, 0.5]).unwrap();
        let r = fair.window_partition(&fair.base_partition(), &FolnerSubset::cube(1, 11), 1024);
        assert!(matches!(r, Err(Error::EnumerationCap { .. })));
    }
}
