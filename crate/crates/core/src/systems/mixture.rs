use super::finite::{FinitePMPAction, Permutation};
use super::shift::{weighted_window_partition, CellPartition, ShiftSystem, WeightedPartition};
use crate::error::{Error, Result};
use crate::group::FolnerSubset;
use crate::measure::{FiniteProbabilitySpace, Partition, MASS_TOLERANCE};

/// A component offered to [`mixture`].
#[derive(Clone, Debug)]
pub enum SystemComponent {
    Shift(ShiftSystem),
    Finite(FinitePMPAction),
}

/// A convex combination of invariant measures on a tagged disjoint union.
///
/// The tag partition (one block per component) is fixed by the action.
#[derive(Clone, Debug)]
pub enum MixtureSystem {
    Shift(ShiftMixture),
    Finite(FiniteMixture),
}

impl MixtureSystem {
    pub fn weights(&self) -> &[f64] {
        match self {
            Self::Shift(m) => &m.weights,
            Self::Finite(m) => &m.weights,
        }
    }

    /// The tag partition and the space it partitions: the tag space for
    /// shift mixtures, the union space for finite ones.
    pub fn tag_partition(&self) -> (Partition, FiniteProbabilitySpace) {
        match self {
            Self::Shift(m) => (m.tag_partition(), m.tags.clone()),
            Self::Finite(m) => (m.tag_partition.clone(), m.union.space().clone()),
        }
    }
}

fn check_weights(weights: &[f64], components: usize) -> Result<()> {
    if components == 0 {
        return Err(Error::InvalidWeights("no components".into()));
    }
    if weights.len() != components {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {components} components",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidWeights("weights must be positive".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// Build the mixture Σ w_i μ_i. Components must all be shifts (same d and
/// alphabet) or all finite actions (same d).
pub fn mixture(components: Vec<SystemComponent>, weights: Vec<f64>) -> Result<MixtureSystem> {
    check_weights(&weights, components.len())?;
    let mut shifts = Vec::new();
    let mut finite = Vec::new();
    for c in components {
        match c {
            SystemComponent::Shift(s) => shifts.push(s),
            SystemComponent::Finite(f) => finite.push(f),
        }
    }
    match (shifts.is_empty(), finite.is_empty()) {
        (false, true) => ShiftMixture::new(shifts, weights).map(MixtureSystem::Shift),
        (true, false) => FiniteMixture::new(finite, weights).map(MixtureSystem::Finite),
        _ => Err(Error::InvalidSystem(
            "mixture components must all be shifts or all be finite actions".into(),
        )),
    }
}

/// Mixture of shift-invariant measures on a common full shift.
#[derive(Clone, Debug)]
pub struct ShiftMixture {
    components: Vec<ShiftSystem>,
    weights: Vec<f64>,
    tags: FiniteProbabilitySpace,
}

impl ShiftMixture {
    pub fn new(components: Vec<ShiftSystem>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, components.len())?;
        let first = &components[0];
        if components
            .iter()
            .any(|c| c.dimension() != first.dimension() || c.alphabet() != first.alphabet())
        {
            return Err(Error::InvalidSystem(
                "mixture components must share dimension and alphabet".into(),
            ));
        }
        let tags = FiniteProbabilitySpace::from_masses(weights.clone())?;
        Ok(Self {
            components,
            weights,
            tags,
        })
    }

    pub fn components(&self) -> &[ShiftSystem] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weighted(&self) -> Vec<(f64, &ShiftSystem)> {
        self.weights.iter().copied().zip(&self.components).collect()
    }

    pub fn dimension(&self) -> usize {
        self.components[0].dimension()
    }

    pub fn alphabet(&self) -> usize {
        self.components[0].alphabet()
    }

    /// The space of component tags, weighted by the mixture weights.
    pub fn tag_space(&self) -> &FiniteProbabilitySpace {
        &self.tags
    }

    pub fn tag_partition(&self) -> Partition {
        Partition::discrete(&self.tags)
    }

    /// Law of the symbol at a single coordinate.
    pub fn marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.alphabet()];
        for (w, c) in self.weighted() {
            for (o, p) in out.iter_mut().zip(c.marginal()) {
                *o += w * p;
            }
        }
        out
    }

    /// The mixture restricted to a set of tags, weights renormalized.
    pub fn sub_mixture(&self, tags: &[usize]) -> Result<ShiftMixture> {
        let total: f64 = tags.iter().map(|&t| self.weights[t]).sum();
        let weights: Vec<f64> = tags.iter().map(|&t| self.weights[t] / total).collect();
        let components = tags.iter().map(|&t| self.components[t].clone()).collect();
        // Renormalized weights can miss 1 by an ulp; rescale the last one.
        let mut weights = weights;
        let head: f64 = weights[..weights.len() - 1].iter().sum();
        *weights.last_mut().expect("nonempty") = 1.0 - head;
        ShiftMixture::new(components, weights)
    }

    /// Mass of the tagged cylinder {tag} × [word on window].
    pub fn tagged_cylinder_measure(
        &self,
        tag: usize,
        window: &FolnerSubset,
        word: &[usize],
    ) -> Result<f64> {
        let c = self
            .components
            .get(tag)
            .ok_or_else(|| Error::InvalidSystem(format!("no component {tag}")))?;
        Ok(self.weights[tag] * c.cylinder_measure(window, word)?)
    }

    pub fn cylinder_measure(&self, window: &FolnerSubset, word: &[usize]) -> Result<f64> {
        (0..self.components.len())
            .map(|t| self.tagged_cylinder_measure(t, window, word))
            .sum()
    }

    pub fn window_partition(
        &self,
        alpha: &CellPartition,
        window: &FolnerSubset,
        enumeration_cap: u64,
    ) -> Result<WeightedPartition> {
        weighted_window_partition(&self.weighted(), alpha, window, enumeration_cap)
    }
}

/// Mixture of finite actions, realized as one action on the disjoint union.
#[derive(Clone, Debug)]
pub struct FiniteMixture {
    components: Vec<FinitePMPAction>,
    weights: Vec<f64>,
    union: FinitePMPAction,
    tag_partition: Partition,
}

impl FiniteMixture {
    pub fn new(components: Vec<FinitePMPAction>, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, components.len())?;
        let d = components[0].dimension();
        if components.iter().any(|c| c.dimension() != d) {
            return Err(Error::InvalidSystem("mixture components must share dimension".into()));
        }
        let mut masses = Vec::new();
        let mut blocks = Vec::new();
        let mut maps = vec![Vec::new(); d];
        for (c, &w) in components.iter().zip(&weights) {
            let offset = masses.len();
            blocks.push((offset..offset + c.space().len()).collect::<Vec<_>>());
            masses.extend(c.space().masses().iter().map(|m| w * m));
            for (map, g) in maps.iter_mut().zip(c.generators()) {
                map.extend(g.as_slice().iter().map(|&j| offset + j));
            }
        }
        let space = FiniteProbabilitySpace::from_masses(masses)?;
        let tag_partition = Partition::new(&space, blocks)?;
        let generators = maps
            .into_iter()
            .map(Permutation::new)
            .collect::<Result<Vec<_>>>()?;
        let union = FinitePMPAction::new(space, generators)?;
        Ok(Self {
            components,
            weights,
            union,
            tag_partition,
        })
    }

    pub fn components(&self) -> &[FinitePMPAction] {
        &self.components
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn union(&self) -> &FinitePMPAction {
        &self.union
    }

    pub fn tag_partition(&self) -> &Partition {
        &self.tag_partition
    }
}
