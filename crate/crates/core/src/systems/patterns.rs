//! Depth-first enumeration of cell patterns on a window of a shift, with
//! exact cylinder masses for weighted mixtures of Bernoulli and Markov laws.
//!
//! Markov windows with holes are handled by propagating through the missing
//! coordinates, which sums over every filling of the gaps.

use std::collections::HashMap;

use super::shift::{CellPartition, MeasureModel, ShiftSystem};
use crate::error::{Error, Result};
use crate::group::GroupElement;

/// The observation made at one site: a joint cell partition, and the map from
/// joint cells to conditioning cells.
#[derive(Clone, Debug)]
pub(crate) struct Site {
    pub cells: CellPartition,
    pub cond: Vec<usize>,
    pub cond_cells: usize,
}

impl Site {
    pub fn unconditioned(cells: CellPartition) -> Self {
        Self {
            cond: vec![0; cells.cells()],
            cond_cells: 1,
            cells,
        }
    }

    /// Observe `joint`, which must refine `factor`; condition on `factor`.
    pub fn conditioned(joint: CellPartition, factor: &CellPartition) -> Self {
        let mut cond = vec![0; joint.cells()];
        for s in 0..joint.alphabet() {
            cond[joint.label(s)] = factor.label(s);
        }
        Self {
            cond,
            cond_cells: factor.cells(),
            cells: joint,
        }
    }
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

/// P^g by stepping through the g − 1 hidden coordinates one at a time.
fn transition_power(p: &[Vec<f64>], g: usize) -> Vec<Vec<f64>> {
    let mut out = p.to_vec();
    for _ in 1..g {
        out = mat_mul(&out, p);
    }
    out
}

fn propagate(v: &[f64], p: &[Vec<f64>]) -> Vec<f64> {
    let k = v.len();
    (0..k).map(|j| (0..k).map(|i| v[i] * p[i][j]).sum()).collect()
}

/// Coordinate gaps between consecutive sites of a one-dimensional window.
fn gaps(positions: &[GroupElement], gap_cap: usize) -> Result<Vec<usize>> {
    let mut out = vec![0];
    let mut hidden = 0usize;
    for w in positions.windows(2) {
        if w[0].dim() != 1 || w[1].dim() != 1 {
            return Err(Error::Incompatible("Markov measures need d = 1".into()));
        }
        let g = w[1].coords()[0] - w[0].coords()[0];
        if g <= 0 {
            return Err(Error::InvalidPartition("window sites must be increasing".into()));
        }
        hidden += g as usize - 1;
        out.push(g as usize);
    }
    if hidden > gap_cap {
        return Err(Error::GapCap {
            gap: hidden,
            cap: gap_cap,
        });
    }
    Ok(out)
}

pub(crate) fn path_mass(
    system: &ShiftSystem,
    positions: &[GroupElement],
    word: &[usize],
    gap_cap: usize,
) -> Result<f64> {
    match system.model() {
        MeasureModel::Bernoulli { p } => Ok(word.iter().map(|&s| p[s]).product()),
        MeasureModel::Markov { pi, transition } => {
            let gaps = gaps(positions, gap_cap)?;
            if word.is_empty() {
                return Ok(1.0);
            }
            let k = pi.len();
            let mut v = vec![0.0; k];
            v[word[0]] = pi[word[0]];
            for (i, &s) in word.iter().enumerate().skip(1) {
                let u = propagate(&v, &transition_power(transition, gaps[i]));
                v = vec![0.0; k];
                v[s] = u[s];
            }
            Ok(v.iter().sum())
        }
    }
}

enum Law<'a> {
    Bernoulli {
        /// per site, per cell
        cell_mass: Vec<Vec<f64>>,
    },
    Markov {
        pi: &'a [f64],
        /// per site (index ≥ 1), transition over the preceding gap
        steps: Vec<Option<&'a Vec<Vec<f64>>>>,
        /// per site, per cell, per symbol
        masks: Vec<Vec<Vec<bool>>>,
    },
}

#[derive(Clone)]
enum State {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl State {
    fn mass(&self) -> f64 {
        match self {
            State::Scalar(m) => *m,
            State::Vector(v) => v.iter().sum(),
        }
    }
}

struct Walker<'a, F> {
    weights: Vec<f64>,
    laws: Vec<Law<'a>>,
    sites: &'a [Site],
    pattern: Vec<usize>,
    visit: F,
}

impl<F: FnMut(&[usize], u64, f64)> Walker<'_, F> {
    fn descend(&mut self, level: usize, states: &[State], cond_key: u64) {
        if level == self.sites.len() {
            let mass: f64 = self
                .weights
                .iter()
                .zip(states)
                .map(|(w, s)| w * s.mass())
                .sum();
            if mass > 0.0 {
                (self.visit)(&self.pattern, cond_key, mass);
            }
            return;
        }
        // Propagate Markov states across the gap once, then branch on cells.
        let carried: Vec<Option<Vec<f64>>> = self
            .laws
            .iter()
            .zip(states)
            .map(|(law, state)| match (law, state) {
                (Law::Markov { pi, .. }, _) if level == 0 => Some(pi.to_vec()),
                (Law::Markov { steps, .. }, State::Vector(v)) => {
                    Some(propagate(v, steps[level].expect("gap step")))
                }
                _ => None,
            })
            .collect();
        let site = &self.sites[level];
        for cell in 0..site.cells.cells() {
            let next: Vec<State> = self
                .laws
                .iter()
                .zip(states)
                .zip(&carried)
                .map(|((law, state), carried)| match law {
                    Law::Bernoulli { cell_mass } => {
                        let prev = match state {
                            State::Scalar(m) => *m,
                            State::Vector(_) => unreachable!(),
                        };
                        State::Scalar(prev * cell_mass[level][cell])
                    }
                    Law::Markov { masks, .. } => {
                        let u = carried.as_ref().expect("carried vector");
                        let mask = &masks[level][cell];
                        State::Vector(
                            u.iter()
                                .zip(mask)
                                .map(|(x, &keep)| if keep { *x } else { 0.0 })
                                .collect(),
                        )
                    }
                })
                .collect();
            let alive = self
                .weights
                .iter()
                .zip(&next)
                .any(|(w, s)| *w > 0.0 && s.mass() > 0.0);
            if !alive {
                continue;
            }
            self.pattern.push(cell);
            let key = cond_key * site.cond_cells as u64 + site.cond[cell] as u64;
            self.descend(level + 1, &next, key);
            self.pattern.pop();
        }
    }
}

/// Visit every positive-mass pattern of joint cells on `positions`, reporting
/// the pattern, its conditioning key (mixed radix over the sites' conditioning
/// cells) and its mass under Σ w_j μ_j.
pub(crate) fn enumerate_patterns(
    components: &[(f64, &ShiftSystem)],
    positions: &[GroupElement],
    sites: &[Site],
    enumeration_cap: u64,
    gap_cap: usize,
    visit: impl FnMut(&[usize], u64, f64),
) -> Result<()> {
    assert_eq!(positions.len(), sites.len());
    let patterns: u128 = sites
        .iter()
        .map(|s| s.cells.cells() as u128)
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX);
    if patterns > enumeration_cap as u128 {
        return Err(Error::EnumerationCap {
            patterns,
            cap: enumeration_cap,
        });
    }

    let mut powers: Vec<HashMap<usize, Vec<Vec<f64>>>> = Vec::new();
    let mut gap_list = Vec::new();
    if components.iter().any(|(_, s)| !s.is_bernoulli()) {
        gap_list = gaps(positions, gap_cap)?;
    }
    for (_, sys) in components {
        let mut table = HashMap::new();
        if let MeasureModel::Markov { transition, .. } = sys.model() {
            for &g in gap_list.iter().skip(1) {
                table
                    .entry(g)
                    .or_insert_with(|| transition_power(transition, g));
            }
        }
        powers.push(table);
    }

    let laws: Vec<Law> = components
        .iter()
        .zip(&powers)
        .map(|((_, sys), table)| match sys.model() {
            MeasureModel::Bernoulli { p } => Law::Bernoulli {
                cell_mass: sites.iter().map(|s| s.cells.cell_masses(p)).collect(),
            },
            MeasureModel::Markov { pi, .. } => Law::Markov {
                pi,
                steps: (0..sites.len())
                    .map(|i| if i == 0 { None } else { table.get(&gap_list[i]) })
                    .collect(),
                masks: sites
                    .iter()
                    .map(|s| {
                        (0..s.cells.cells())
                            .map(|c| (0..pi.len()).map(|sym| s.cells.label(sym) == c).collect())
                            .collect()
                    })
                    .collect(),
            },
        })
        .collect();

    let start: Vec<State> = laws
        .iter()
        .map(|law| match law {
            Law::Bernoulli { .. } => State::Scalar(1.0),
            Law::Markov { pi, .. } => State::Vector(vec![1.0; pi.len()]),
        })
        .collect();

    let mut walker = Walker {
        weights: components.iter().map(|(w, _)| *w).collect(),
        laws,
        sites,
        pattern: Vec::with_capacity(sites.len()),
        visit,
    };
    if sites.is_empty() {
        (walker.visit)(&[], 0, 1.0);
        return Ok(());
    }
    walker.descend(0, &start, 0);
    Ok(())
}
