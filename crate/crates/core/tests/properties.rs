//! Property tests for the measure, group and engine layers.

use amenable_entropy::engine::{Conditioning, EngineOptions, EntropySystem, SubAlgebraSpec};
use amenable_entropy::group::{axis_defect, FolnerSubset, GroupElement};
use amenable_entropy::measure::{conditional_entropy, disintegrate, entropy, FiniteProbabilitySpace, Partition};
use amenable_entropy::sampling::{random_partition, random_space};
use amenable_entropy::systems::{CellPartition, ShiftMixture, ShiftSystem};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn sample(seed: u64) -> (FiniteProbabilitySpace, Partition, Partition, Partition) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_space(&mut rng, 10);
    let a = random_partition(&mut rng, &s, 4);
    let b = random_partition(&mut rng, &s, 4);
    let c = random_partition(&mut rng, &s, 4);
    (s, a, b, c)
}

fn markov() -> ShiftSystem {
    ShiftSystem::markov(vec![2.0 / 3.0, 1.0 / 3.0], vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap()
}

fn subset(mask: u16) -> FolnerSubset {
    FolnerSubset::from_ints((0..10).filter(|i| mask >> i & 1 == 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chain_rule(seed in any::<u64>()) {
        let (s, a, b, c) = sample(seed);
        let lhs = conditional_entropy(&a.join(&b).unwrap(), &c, &s).unwrap();
        let rhs = conditional_entropy(&b, &c, &s).unwrap()
            + conditional_entropy(&a, &b.join(&c).unwrap(), &s).unwrap();
        prop_assert!((lhs - rhs).abs() < TOL);
    }

    #[test]
    fn conditioning_reduces_entropy(seed in any::<u64>()) {
        let (s, a, b, c) = sample(seed);
        let coarse = conditional_entropy(&a, &c, &s).unwrap();
        let fine = conditional_entropy(&a, &b.join(&c).unwrap(), &s).unwrap();
        prop_assert!(fine <= coarse + TOL);
        prop_assert!(coarse <= entropy(&a, &s).unwrap() + TOL);
        prop_assert!(fine >= 0.0);
    }

    #[test]
    fn subadditivity_of_joins(seed in any::<u64>()) {
        let (s, a, b, c) = sample(seed);
        let joint = conditional_entropy(&a.join(&b).unwrap(), &c, &s).unwrap();
        let split = conditional_entropy(&a, &c, &s).unwrap() + conditional_entropy(&b, &c, &s).unwrap();
        prop_assert!(joint <= split + TOL);
    }

    #[test]
    fn join_laws(seed in any::<u64>()) {
        let (s, a, b, c) = sample(seed);
        prop_assert_eq!(a.join(&b).unwrap(), b.join(&a).unwrap());
        prop_assert_eq!(a.join(&a).unwrap(), a.clone());
        prop_assert_eq!(
            a.join(&b).unwrap().join(&c).unwrap(),
            a.join(&b.join(&c).unwrap()).unwrap()
        );
        prop_assert!(a.is_coarser(&a.join(&b).unwrap(), &s).unwrap());
        prop_assert_eq!(a.join(&Partition::trivial(&s)).unwrap(), a.clone());
    }

    #[test]
    fn disintegration_reconstructs(seed in any::<u64>(), mask in any::<u16>()) {
        let (s, a, _, c) = sample(seed);
        let set: Vec<usize> = s.atom_ids().iter().copied().filter(|i| mask >> (i % 16) & 1 == 1).collect();
        let dis = disintegrate(&s, &c).unwrap();
        prop_assert!((dis.reconstruct(&set) - s.measure(&set).unwrap()).abs() < 1e-12);
        let routed = dis.integrated_entropy(&a).unwrap();
        prop_assert!((routed - conditional_entropy(&a, &c, &s).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn defect_is_symmetric_and_bounded(d in 1usize..=2, side in 1usize..=12, axis in 0usize..2, k in -30i64..=30) {
        let axis = axis % d;
        let f = FolnerSubset::cube(d, side);
        let g = GroupElement::axis(d, axis, k);
        let defect = f.invariance_defect(&g).unwrap();
        prop_assert_eq!(defect, f.invariance_defect(&g.neg()).unwrap());
        prop_assert!((0.0..=2.0).contains(&defect));
        prop_assert_eq!(defect, axis_defect(k, side));
    }

    #[test]
    fn defect_of_translated_set(mask in 1u16..1024, shift in -20i64..=20, k in -5i64..=5) {
        let f = subset(mask);
        let moved = f.translate(&GroupElement::new(vec![shift])).unwrap();
        let g = GroupElement::new(vec![k]);
        prop_assert_eq!(f.invariance_defect(&g).unwrap(), moved.invariance_defect(&g).unwrap());
    }

    #[test]
    fn block_entropy_is_translation_invariant(mask in 1u16..1024, shift in -15i64..=15) {
        let m = markov();
        let alpha = m.base_partition();
        let opts = EngineOptions::default();
        let f = subset(mask);
        let moved = f.translate(&GroupElement::new(vec![shift])).unwrap();
        let here = m.block_entropy(&alpha, &f, &SubAlgebraSpec::Trivial, &opts).unwrap();
        let there = m.block_entropy(&alpha, &moved, &SubAlgebraSpec::Trivial, &opts).unwrap();
        prop_assert!((here - there).abs() < TOL);
    }

    #[test]
    fn block_entropy_is_monotone_and_subadditive(e in any::<u16>(), f in any::<u16>()) {
        let m = markov();
        let alpha = m.base_partition();
        let opts = EngineOptions::default();
        let h = |mask: u16| m.block_entropy(&alpha, &subset(mask & 0x3ff), &SubAlgebraSpec::Trivial, &opts).unwrap();
        prop_assert!(h(e & f) <= h(e) + TOL);
        prop_assert!(h(e | f) <= h(e) + h(f) + TOL);
        prop_assert!(h(e | f) + h(e & f) <= h(e) + h(f) + TOL);
    }

    #[test]
    fn wider_conditioning_windows_lower_entropy(side in 1usize..=4, r in 0usize..=2) {
        let mix = ShiftMixture::new(
            vec![
                ShiftSystem::bernoulli(1, vec![0.5, 0.3, 0.2]).unwrap(),
                ShiftSystem::markov_stationary(vec![
                    vec![0.8, 0.1, 0.1],
                    vec![0.2, 0.7, 0.1],
                    vec![0.3, 0.3, 0.4],
                ])
                .unwrap(),
            ],
            vec![0.4, 0.6],
        )
        .unwrap();
        let alpha = CellPartition::symbols(3);
        let factor = SubAlgebraSpec::symbol_factor(&[0, 0, 1]).unwrap();
        let f = FolnerSubset::cube(1, side);
        let at = |r| {
            let opts = EngineOptions { conditioning: Conditioning::Margin(r), ..EngineOptions::default() };
            mix.block_entropy(&alpha, &f, &factor, &opts).unwrap()
        };
        prop_assert!(at(r + 1) <= at(r) + TOL);
        let unconditioned = mix.block_entropy(&alpha, &f, &SubAlgebraSpec::Trivial, &EngineOptions::default()).unwrap();
        prop_assert!(at(r) <= unconditioned + TOL);
    }
}
