use serde::Serialize;

use super::entropy::entropy;
use super::partition::Partition;
use super::space::FiniteProbabilitySpace;
use crate::error::{Error, Result};

/// The quotient X/α with its pushforward measure μ_α.
///
/// Quotient atoms are block indices `0..k`; `projection[i]` is the block of
/// the i-th base atom.
#[derive(Clone, Debug, Serialize)]
pub struct FactorSpace {
    #[serde(skip)]
    pub base: FiniteProbabilitySpace,
    #[serde(skip)]
    pub partition: Partition,
    pub quotient: FiniteProbabilitySpace,
    pub projection: Vec<usize>,
}

pub fn factor_space(space: &FiniteProbabilitySpace, alpha: &Partition) -> Result<FactorSpace> {
    let masses = alpha.block_masses(space)?;
    let projection = alpha.labels(space)?;
    let quotient = FiniteProbabilitySpace::from_masses(masses)?;
    Ok(FactorSpace {
        base: space.clone(),
        partition: alpha.clone(),
        quotient,
        projection,
    })
}

/// The canonical system of conditional measures {μ_A} of μ over a partition.
#[derive(Clone, Debug)]
pub struct Disintegration {
    pub partition: Partition,
    /// One entry per block; `None` for zero-mass blocks.
    pub conditionals: Vec<Option<FiniteProbabilitySpace>>,
    pub factor: FactorSpace,
}

pub fn disintegrate(space: &FiniteProbabilitySpace, alpha: &Partition) -> Result<Disintegration> {
    let factor = factor_space(space, alpha)?;
    let conditionals = alpha
        .blocks()
        .iter()
        .zip(factor.quotient.masses())
        .map(|(block, &mass)| {
            if mass <= 0.0 {
                return Ok(None);
            }
            let masses = block
                .iter()
                .map(|&a| space.mass_of(a).map(|m| m / mass))
                .collect::<Option<Vec<_>>>()
                .ok_or(Error::SpaceMismatch)?;
            FiniteProbabilitySpace::new(block.clone(), masses).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Disintegration {
        partition: alpha.clone(),
        conditionals,
        factor,
    })
}

impl Disintegration {
    /// μ_α(A) for block `i`.
    pub fn weight(&self, block: usize) -> f64 {
        self.factor.quotient.masses()[block]
    }

    /// Σ_A μ_α(A) · μ_A(C ∩ A).
    pub fn reconstruct(&self, set: &[usize]) -> f64 {
        self.conditionals
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.as_ref().map(|c| (i, c)))
            .map(|(i, cond)| {
                let inside: f64 = set.iter().filter_map(|&a| cond.mass_of(a)).sum();
                self.weight(i) * inside
            })
            .sum()
    }

    /// α|_B on the conditional space of block `block`.
    pub fn restrict(&self, alpha: &Partition, block: usize) -> Result<Partition> {
        let cond = self
            .conditionals
            .get(block)
            .ok_or_else(|| Error::InvalidPartition(format!("no block {block}")))?
            .as_ref()
            .ok_or(Error::DegenerateFiber(block))?;
        if alpha.space_id() != self.partition.space_id() {
            return Err(Error::SpaceMismatch);
        }
        alpha.trace(cond)
    }

    /// ∫ H_{μ_B}(α|_B) dμ_β computed fiber by fiber.
    pub fn integrated_entropy(&self, alpha: &Partition) -> Result<f64> {
        let mut total = 0.0;
        for (i, cond) in self.conditionals.iter().enumerate() {
            if let Some(cond) = cond {
                let restricted = alpha.trace(cond)?;
                total += self.weight(i) * entropy(&restricted, cond)?;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::entropy::conditional_entropy;

    fn s3() -> FiniteProbabilitySpace {
        FiniteProbabilitySpace::new(vec![1, 2, 3], vec![0.2, 0.3, 0.5]).unwrap()
    }

    #[test]
    fn factor_examples() {
        let s = s3();
        let a = Partition::new(&s, vec![vec![1, 2], vec![3]]).unwrap();
        let f = factor_space(&s, &a).unwrap();
        assert_eq!(f.quotient.masses(), &[0.5, 0.5]);
        assert_eq!(f.projection, vec![0, 0, 1]);

        let f = factor_space(&s, &Partition::discrete(&s)).unwrap();
        assert_eq!(f.quotient.masses(), s.masses());
        let f = factor_space(&s, &Partition::trivial(&s)).unwrap();
        assert_eq!(f.quotient.masses(), &[1.0]);
    }

    #[test]
    fn disintegration_examples() {
        let s = s3();
        let a = Partition::new(&s, vec![vec![1, 2], vec![3]]).unwrap();
        let d = disintegrate(&s, &a).unwrap();
        let c0 = d.conditionals[0].as_ref().unwrap();
        assert!((c0.masses()[0] - 0.4).abs() < 1e-15);
        assert!((c0.masses()[1] - 0.6).abs() < 1e-15);
        assert_eq!(d.conditionals[1].as_ref().unwrap().masses(), &[1.0]);

        let d = disintegrate(&s, &Partition::trivial(&s)).unwrap();
        assert_eq!(d.conditionals[0].as_ref().unwrap(), &s);
        let d = disintegrate(&s, &Partition::discrete(&s)).unwrap();
        assert!(d
            .conditionals
            .iter()
            .all(|c| c.as_ref().unwrap().masses() == [1.0]));
    }

    #[test]
    fn zero_mass_fibers() {
        let s = FiniteProbabilitySpace::from_masses(vec![0.0, 0.0, 1.0]).unwrap();
        let a = Partition::new(&s, vec![vec![0, 1], vec![2]]).unwrap();
        let d = disintegrate(&s, &a).unwrap();
        assert!(d.conditionals[0].is_none());
        assert_eq!(d.restrict(&a, 0), Err(Error::DegenerateFiber(0)));
        assert_eq!(d.restrict(&a, 1).unwrap().len(), 1);
        assert_eq!(d.reconstruct(&[0, 2]), 1.0);
    }

    #[test]
    fn restrict_traces() {
        let s = FiniteProbabilitySpace::new(vec![1, 2, 3, 4], vec![0.25; 4]).unwrap();
        let alpha = Partition::new(&s, vec![vec![1, 2], vec![3, 4]]).unwrap();
        let beta = Partition::new(&s, vec![vec![1, 3], vec![2, 4]]).unwrap();
        let d = disintegrate(&s, &beta).unwrap();
        assert_eq!(d.restrict(&alpha, 0).unwrap().blocks(), &[vec![1], vec![3]]);
    }

    #[test]
    fn fiber_route_matches_direct_formula() {
        let s = s3();
        let beta = Partition::new(&s, vec![vec![1, 2], vec![3]]).unwrap();
        let alpha = Partition::discrete(&s);
        let d = disintegrate(&s, &beta).unwrap();
        let via_fibers = d.integrated_entropy(&alpha).unwrap();
        let direct = conditional_entropy(&alpha, &beta, &s).unwrap();
        assert!((via_fibers - direct).abs() < 1e-15);
    }
}
