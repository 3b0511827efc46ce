//! Z^d group elements, finite subsets and Følner box sequences.

mod subadditive;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use subadditive::{
    verify_subadditive_hypotheses, HypothesisCheck, SubadditivityOptions, SubadditivityReport,
    Violation,
};

/// A countable discrete group presented by a finite generating set.
///
/// Only [`IntegerLattice`] is provided; the trait is what a finite group or
/// quotient would implement.
pub trait Group {
    type Element: Clone + Eq + Ord + fmt::Debug;

    fn identity(&self) -> Self::Element;
    fn compose(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn invert(&self, a: &Self::Element) -> Self::Element;
    fn generators(&self) -> Vec<Self::Element>;
}

/// An element of Z^d.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupElement(Vec<i64>);

impl GroupElement {
    pub fn new(coords: Vec<i64>) -> Self {
        Self(coords)
    }

    pub fn identity(d: usize) -> Self {
        Self(vec![0; d])
    }

    /// k · e_axis.
    pub fn axis(d: usize, axis: usize, k: i64) -> Self {
        let mut c = vec![0; d];
        c[axis] = k;
        Self(c)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn checked_add(&self, other: &GroupElement) -> Result<GroupElement> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn neg(&self) -> GroupElement {
        Self(self.0.iter().map(|c| -c).collect())
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Z^d with its standard generators e_1, …, e_d.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IntegerLattice {
    pub d: usize,
}

impl Group for IntegerLattice {
    type Element = GroupElement;

    fn identity(&self) -> GroupElement {
        GroupElement::identity(self.d)
    }

    /// Panics if either element is not in Z^d for this `d`.
    fn compose(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        assert!(a.dim() == self.d && b.dim() == self.d, "element outside Z^{}", self.d);
        a.checked_add(b).expect("dimensions checked")
    }

    fn invert(&self, a: &GroupElement) -> GroupElement {
        a.neg()
    }

    fn generators(&self) -> Vec<GroupElement> {
        (0..self.d).map(|i| GroupElement::axis(self.d, i, 1)).collect()
    }
}

/// A finite subset of Z^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FolnerSubset {
    d: usize,
    elements: BTreeSet<GroupElement>,
}

impl FolnerSubset {
    pub fn new(d: usize, elements: impl IntoIterator<Item = GroupElement>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let elements: BTreeSet<_> = elements.into_iter().collect();
        if let Some(bad) = elements.iter().find(|g| g.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(Self { d, elements })
    }

    /// A subset of Z from integer coordinates.
    pub fn from_ints(points: impl IntoIterator<Item = i64>) -> Self {
        Self {
            d: 1,
            elements: points.into_iter().map(|p| GroupElement(vec![p])).collect(),
        }
    }

    pub fn empty(d: usize) -> Self {
        Self {
            d,
            elements: BTreeSet::new(),
        }
    }

    /// The box [0, side)^d.
    pub fn cube(d: usize, side: usize) -> Self {
        Self::boxed(&vec![0; d], &vec![side; d])
    }

    /// The box Π [origin_i, origin_i + sides_i).
    pub fn boxed(origin: &[i64], sides: &[usize]) -> Self {
        let d = origin.len();
        let mut elements = BTreeSet::new();
        let total: usize = sides.iter().product();
        for mut idx in 0..total {
            let mut c = vec![0; d];
            for i in (0..d).rev() {
                c[i] = origin[i] + (idx % sides[i]) as i64;
                idx /= sides[i];
            }
            elements.insert(GroupElement(c));
        }
        Self { d, elements }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.contains(g)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement> {
        self.elements.iter()
    }

    pub fn is_subset(&self, other: &FolnerSubset) -> bool {
        self.elements.is_subset(&other.elements)
    }

    pub fn union(&self, other: &FolnerSubset) -> FolnerSubset {
        Self {
            d: self.d,
            elements: self.elements.union(&other.elements).cloned().collect(),
        }
    }

    pub fn intersection(&self, other: &FolnerSubset) -> FolnerSubset {
        Self {
            d: self.d,
            elements: self.elements.intersection(&other.elements).cloned().collect(),
        }
    }

    pub fn difference(&self, other: &FolnerSubset) -> FolnerSubset {
        Self {
            d: self.d,
            elements: self.elements.difference(&other.elements).cloned().collect(),
        }
    }

    /// gF = {g + f : f ∈ F}.
    pub fn translate(&self, g: &GroupElement) -> Result<FolnerSubset> {
        self.check_dim(g)?;
        let elements = self
            .elements
            .iter()
            .map(|f| f.checked_add(g))
            .collect::<Result<_>>()?;
        Ok(Self { d: self.d, elements })
    }

    /// F ⊕ [−r, r]^d.
    pub fn thicken(&self, r: usize) -> FolnerSubset {
        if r == 0 {
            return self.clone();
        }
        let side = 2 * r + 1;
        let offsets = FolnerSubset::boxed(&vec![-(r as i64); self.d], &vec![side; self.d]);
        let elements = self
            .elements
            .iter()
            .flat_map(|f| offsets.iter().map(move |o| f.checked_add(o).expect("same dim")))
            .collect();
        Self { d: self.d, elements }
    }

    /// |gF △ F| / |F|.
    pub fn invariance_defect(&self, g: &GroupElement) -> Result<f64> {
        self.check_dim(g)?;
        if self.is_empty() {
            return Err(Error::EmptySet);
        }
        let shared = self
            .elements
            .iter()
            .filter(|f| self.elements.contains(&f.checked_add(g).expect("same dim")))
            .count();
        let sym_diff = 2 * (self.len() - shared);
        Ok(sym_diff as f64 / self.len() as f64)
    }

    fn check_dim(&self, g: &GroupElement) -> Result<()> {
        if g.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: g.dim(),
            });
        }
        Ok(())
    }
}

impl Serialize for FolnerSubset {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.elements.iter())
    }
}

/// Boxes F_n = [0, s(n))^d for a strictly increasing side schedule, n ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FolnerSequence {
    d: usize,
    sides: Vec<usize>,
}

impl FolnerSequence {
    pub fn new(d: usize, sides: Vec<usize>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if sides.first() == Some(&0) || sides.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSystem(
                "box sides must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self { d, sides })
    }

    /// s(n) = n for n = 1..=n_max.
    pub fn linear(d: usize, n_max: usize) -> Result<Self> {
        Self::new(d, (1..=n_max).collect())
    }

    /// s(n) = 2^(n-1) for n = 1..=n_max.
    pub fn doubling(d: usize, n_max: usize) -> Result<Self> {
        Self::new(d, (0..n_max).map(|k| 1usize << k).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.sides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_empty()
    }

    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    pub fn side(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.sides.len() {
            return Err(Error::OutOfSchedule {
                index: n,
                len: self.sides.len(),
            });
        }
        Ok(self.sides[n - 1])
    }

    pub fn box_at(&self, n: usize) -> Result<FolnerSubset> {
        Ok(FolnerSubset::cube(self.d, self.side(n)?))
    }
}

/// F_n of `sequence`, checking that it lives in Z^d.
pub fn folner_box(d: usize, n: usize, sequence: &FolnerSequence) -> Result<FolnerSubset> {
    if d != sequence.dim() {
        return Err(Error::DimensionMismatch {
            expected: sequence.dim(),
            found: d,
        });
    }
    sequence.box_at(n)
}

/// Closed-form defect of a box of side `side` under the axis translation k·e_i.
pub fn axis_defect(k: i64, side: usize) -> f64 {
    let moved = (k.unsigned_abs() as usize).min(side);
    (2 * moved) as f64 / side as f64
}
