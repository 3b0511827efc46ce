use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::space::{FiniteProbabilitySpace, SpaceId};
use crate::error::{Error, Result};

/// A partition of a finite space into nonempty blocks of atom ids.
///
/// Blocks are stored canonically: each block sorted, blocks ordered by their
/// smallest atom. Structural equality is therefore partition equality.
/// Zero-mass blocks are kept; entropy sums skip them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    #[serde(skip)]
    space: SpaceId,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(space: &FiniteProbabilitySpace, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; space.len()];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for &a in block {
                let i = space
                    .index_of(a)
                    .ok_or_else(|| Error::InvalidPartition(format!("atom {a} not in space")))?;
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("atom {a} in two blocks")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!(
                "atom {} not covered",
                space.atom_ids()[i]
            )));
        }
        Ok(Self::canonical(space.id(), blocks))
    }

    /// Build from one label per atom (in atom order); equal labels share a block.
    pub fn from_labels(space: &FiniteProbabilitySpace, labels: &[usize]) -> Result<Self> {
        if labels.len() != space.len() {
            return Err(Error::InvalidPartition(format!(
                "{} labels for {} atoms",
                labels.len(),
                space.len()
            )));
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&id, &l) in space.atom_ids().iter().zip(labels) {
            groups.entry(l).or_default().push(id);
        }
        Ok(Self::canonical(space.id(), groups.into_values().collect()))
    }

    /// ε: every atom its own block.
    pub fn discrete(space: &FiniteProbabilitySpace) -> Self {
        Self {
            space: space.id(),
            blocks: space.atom_ids().iter().map(|&a| vec![a]).collect(),
        }
    }

    /// The single-block partition {X}.
    pub fn trivial(space: &FiniteProbabilitySpace) -> Self {
        Self {
            space: space.id(),
            blocks: vec![space.atom_ids().to_vec()],
        }
    }

    pub(crate) fn canonical(space: SpaceId, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Self { space, blocks }
    }

    pub fn space_id(&self) -> SpaceId {
        self.space
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn belongs_to(&self, space: &FiniteProbabilitySpace) -> bool {
        self.space == space.id()
    }

    pub(crate) fn ensure_on(&self, space: &FiniteProbabilitySpace) -> Result<()> {
        if self.belongs_to(space) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Map from atom id to block index.
    pub fn block_index(&self) -> HashMap<usize, usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(bi, b)| b.iter().map(move |&a| (a, bi)))
            .collect()
    }

    /// Block index of every atom of `space`, in atom order.
    pub fn labels(&self, space: &FiniteProbabilitySpace) -> Result<Vec<usize>> {
        self.ensure_on(space)?;
        let mut labels = vec![0; space.len()];
        for (bi, b) in self.blocks.iter().enumerate() {
            for &a in b {
                labels[space.index_of(a).ok_or(Error::SpaceMismatch)?] = bi;
            }
        }
        Ok(labels)
    }

    /// Mass of each block, summed in block order.
    pub fn block_masses(&self, space: &FiniteProbabilitySpace) -> Result<Vec<f64>> {
        self.ensure_on(space)?;
        self.blocks.iter().map(|b| space.measure(b)).collect()
    }

    /// α ∨ β: all nonempty pairwise intersections.
    pub fn join(&self, other: &Partition) -> Result<Partition> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let index = other.block_index();
        let mut blocks = Vec::new();
        for block in &self.blocks {
            let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &a in block {
                cells.entry(index[&a]).or_default().push(a);
            }
            blocks.extend(cells.into_values());
        }
        Ok(Self::canonical(self.space, blocks))
    }

    /// α ≤ β: every block of `finer` lies inside one block of `self`, ignoring
    /// zero-mass atoms.
    pub fn is_coarser(&self, finer: &Partition, space: &FiniteProbabilitySpace) -> Result<bool> {
        self.ensure_on(space)?;
        finer.ensure_on(space)?;
        let index = self.block_index();
        for block in &finer.blocks {
            let mut owner = None;
            for &a in block {
                if space.mass_of(a).unwrap_or(0.0) <= 0.0 {
                    continue;
                }
                let bi = index[&a];
                match owner {
                    None => owner = Some(bi),
                    Some(o) if o != bi => return Ok(false),
                    _ => {}
                }
            }
        }
        Ok(true)
    }

    /// Equality mod zero-mass atoms.
    pub fn equivalent(&self, other: &Partition, space: &FiniteProbabilitySpace) -> Result<bool> {
        Ok(self.is_coarser(other, space)? && other.is_coarser(self, space)?)
    }

    /// Nonempty traces A ∩ B of the blocks on the atoms of `sub`, as a
    /// partition of `sub`.
    pub fn trace(&self, sub: &FiniteProbabilitySpace) -> Result<Partition> {
        let index = self.block_index();
        let mut cells: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &a in sub.atom_ids() {
            let bi = *index.get(&a).ok_or(Error::SpaceMismatch)?;
            cells.entry(bi).or_default().push(a);
        }
        Ok(Self::canonical(sub.id(), cells.into_values().collect()))
    }

    /// Image of the partition under an atom relabeling that is a bijection of
    /// the same space.
    pub(crate) fn map_atoms(&self, f: impl Fn(usize) -> usize) -> Partition {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|&a| f(a)).collect())
            .collect();
        Self::canonical(self.space, blocks)
    }
}
