//! Seeded random instances for the property checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::measure::{FiniteProbabilitySpace, Partition};
use crate::systems::Permutation;

/// A space of `2..=max_atoms` atoms whose masses are drawn from a short list of
/// levels, so that equal masses (and hence non-trivial mass-preserving
/// permutations) are common. About one space in five carries a null atom.
pub fn random_space<R: Rng>(rng: &mut R, max_atoms: usize) -> FiniteProbabilitySpace {
    let n = rng.gen_range(2..=max_atoms.max(2));
    let levels: Vec<u32> = (0..rng.gen_range(1..=3)).map(|_| rng.gen_range(1..=5)).collect();
    let mut raw: Vec<f64> = (0..n)
        .map(|_| f64::from(*levels.choose(rng).expect("levels")))
        .collect();
    if n > 2 && rng.gen_bool(0.2) {
        let i = rng.gen_range(0..n);
        raw[i] = 0.0;
    }
    let total: f64 = raw.iter().sum();
    let mut masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
    // Keep equal raw masses bit-identical and the total within tolerance.
    let head: f64 = masses[..n - 1].iter().sum();
    if (head + masses[n - 1] - 1.0).abs() > 1e-13 {
        masses[n - 1] = 1.0 - head;
    }
    FiniteProbabilitySpace::from_masses(masses).expect("valid random space")
}

/// A partition with at most `max_blocks` blocks, labels drawn uniformly.
pub fn random_partition<R: Rng>(
    rng: &mut R,
    space: &FiniteProbabilitySpace,
    max_blocks: usize,
) -> Partition {
    let k = rng.gen_range(1..=max_blocks.max(1));
    let labels: Vec<usize> = (0..space.len()).map(|_| rng.gen_range(0..k)).collect();
    Partition::from_labels(space, &labels).expect("labels cover the space")
}

/// A uniformly random permutation within each class of equal mass.
pub fn random_mass_preserving<R: Rng>(rng: &mut R, space: &FiniteProbabilitySpace) -> Permutation {
    let masses = space.masses();
    let mut map = vec![0; masses.len()];
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&a, &b| masses[a].total_cmp(&masses[b]).then(a.cmp(&b)));
    for class in order.chunk_by(|&a, &b| masses[a] == masses[b]) {
        let mut image = class.to_vec();
        image.shuffle(rng);
        for (&from, &to) in class.iter().zip(&image) {
            map[from] = to;
        }
    }
    Permutation::new(map).expect("bijection")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_valid_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let s = random_space(&mut a, 10);
            assert_eq!(s, random_space(&mut b, 10));
            assert!(s.len() <= 10);
            let p = random_partition(&mut a, &s, 4);
            assert!(p.len() <= 4);
            let f = random_mass_preserving(&mut a, &s);
            assert!(f.preserves(&s));
            random_partition(&mut b, &s, 4);
            random_mass_preserving(&mut b, &s);
        }
    }
}
