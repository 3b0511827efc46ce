use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for mass normalization and measure-algebra identities.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Identifies the atom set a space (and every partition of it) lives on.
///
/// Two spaces over the same atom ids share an id, so a partition built for
/// one can be evaluated against the other's masses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SpaceId(u64);

impl SpaceId {
    pub(crate) fn of_atoms(ids: &[usize]) -> Self {
        // FNV-1a over the little-endian ids, length first.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(ids.len() as u64);
        for &id in ids {
            feed(id as u64);
        }
        SpaceId(h)
    }
}

/// A finite probability space: strictly increasing atom ids, one nonnegative
/// mass per atom, masses summing to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteProbabilitySpace {
    #[serde(skip)]
    id: SpaceId,
    atom_ids: Vec<usize>,
    masses: Vec<f64>,
}

impl FiniteProbabilitySpace {
    pub fn new(atom_ids: Vec<usize>, masses: Vec<f64>) -> Result<Self> {
        if atom_ids.is_empty() {
            return Err(Error::InvalidSpace("no atoms".into()));
        }
        if atom_ids.len() != masses.len() {
            return Err(Error::InvalidSpace(format!(
                "{} atom ids but {} masses",
                atom_ids.len(),
                masses.len()
            )));
        }
        if atom_ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpace(
                "atom ids must be distinct and increasing".into(),
            ));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidSpace(format!("mass {m} is not a nonnegative real")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidSpace(format!("masses sum to {total}, not 1")));
        }
        Ok(Self {
            id: SpaceId::of_atoms(&atom_ids),
            atom_ids,
            masses,
        })
    }

    /// Space on atoms `0..masses.len()`.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        Self::new((0..masses.len()).collect(), masses)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_masses(vec![1.0 / n as f64; n])
    }

    pub fn id(&self) -> SpaceId {
        self.id
    }

    pub fn len(&self) -> usize {
        self.atom_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atom_ids.is_empty()
    }

    pub fn atom_ids(&self) -> &[usize] {
        &self.atom_ids
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn index_of(&self, atom: usize) -> Option<usize> {
        self.atom_ids.binary_search(&atom).ok()
    }

    pub fn mass_of(&self, atom: usize) -> Option<f64> {
        self.index_of(atom).map(|i| self.masses[i])
    }

    /// μ(C) for an atom set, summed in the order given. Unknown atoms are an error.
    pub fn measure(&self, atoms: &[usize]) -> Result<f64> {
        atoms.iter().try_fold(0.0, |acc, &a| {
            self.mass_of(a).map(|m| acc + m).ok_or(Error::SpaceMismatch)
        })
    }
}
