use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::measure::{FiniteProbabilitySpace, Partition};

/// A bijection of atom positions `0..n`; `map[i]` is the image of position i.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &j in &map {
            if j >= map.len() || seen[j] {
                return Err(Error::InvalidSystem(format!(
                    "{map:?} is not a permutation of 0..{}",
                    map.len()
                )));
            }
            seen[j] = true;
        }
        Ok(Self(map))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Self(other.0.iter().map(|&j| self.0[j]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Self(inv)
    }

    pub fn pow(&self, k: i64) -> Permutation {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Permutation::identity(self.len());
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out);
        }
        out
    }

    /// True when every atom keeps exactly its mass.
    pub fn preserves(&self, space: &FiniteProbabilitySpace) -> bool {
        let m = space.masses();
        self.0.len() == m.len() && self.0.iter().enumerate().all(|(i, &j)| m[i] == m[j])
    }

    /// Image of a partition of `space`, blockwise.
    pub fn image(&self, space: &FiniteProbabilitySpace, alpha: &Partition) -> Result<Partition> {
        alpha.ensure_on(space)?;
        let ids = space.atom_ids();
        Ok(alpha.map_atoms(|a| ids[self.0[space.index_of(a).expect("atom of space")]]))
    }
}

/// A measure-preserving action of Z^d on a finite space, given by d commuting
/// mass-preserving permutations.
#[derive(Clone, Debug)]
pub struct FinitePMPAction {
    space: FiniteProbabilitySpace,
    generators: Vec<Permutation>,
}

impl FinitePMPAction {
    pub fn new(space: FiniteProbabilitySpace, generators: Vec<Permutation>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidSystem("at least one generator required".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.len() != space.len() {
                return Err(Error::InvalidSystem(format!(
                    "generator {i} acts on {} atoms, space has {}",
                    g.len(),
                    space.len()
                )));
            }
            if !g.preserves(&space) {
                return Err(Error::InvalidSystem(format!(
                    "generator {i} does not preserve masses"
                )));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if generators[i].compose(&generators[j]) != generators[j].compose(&generators[i]) {
                    return Err(Error::InvalidSystem(format!(
                        "generators {i} and {j} do not commute"
                    )));
                }
            }
        }
        Ok(Self { space, generators })
    }

    /// Z acting by a single permutation.
    pub fn cyclic(space: FiniteProbabilitySpace, generator: Permutation) -> Result<Self> {
        Self::new(space, vec![generator])
    }

    pub fn space(&self) -> &FiniteProbabilitySpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// T_g = Π σ_i^{g_i}.
    pub fn transformation(&self, g: &GroupElement) -> Result<Permutation> {
        if g.dim() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: g.dim(),
            });
        }
        Ok(self
            .generators
            .iter()
            .zip(g.coords())
            .fold(Permutation::identity(self.space.len()), |acc, (s, &k)| {
                s.pow(k).compose(&acc)
            }))
    }

    /// T_g α.
    pub fn act(&self, g: &GroupElement, alpha: &Partition) -> Result<Partition> {
        self.transformation(g)?.image(&self.space, alpha)
    }

    /// The action restricted to an invariant set of positive mass, with the
    /// normalized measure on it.
    pub fn restrict_to(&self, block: &[usize]) -> Result<FinitePMPAction> {
        let positions: Vec<usize> = block
            .iter()
            .map(|&a| self.space.index_of(a).ok_or(Error::SpaceMismatch))
            .collect::<Result<_>>()?;
        let mass: f64 = positions.iter().map(|&i| self.space.masses()[i]).sum();
        if mass <= 0.0 {
            return Err(Error::DegenerateFiber(0));
        }
        let local = |pos: usize| positions.iter().position(|&p| p == pos);
        let sub = FiniteProbabilitySpace::new(
            block.to_vec(),
            positions.iter().map(|&i| self.space.masses()[i] / mass).collect(),
        )?;
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(gi, g)| {
                let map = positions
                    .iter()
                    .map(|&p| {
                        local(g.apply(p)).ok_or(Error::NotFixed {
                            block: 0,
                            generator: gi,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Permutation::new(map)
            })
            .collect::<Result<Vec<_>>>()?;
        FinitePMPAction::new(sub, generators)
    }
}
