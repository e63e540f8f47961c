mod common;

use common::{companion, random_set};
use hel::energy::{energy, energy_moment_int, energy_moment_pair_int, energy_pair, sigma_k, t_energy};
use hel::FiniteSet;
use proptest::prelude::*;

#[test]
fn energy_of_small_integer_sets() {
    let a = FiniteSet::integers([0, 1, 3]);
    assert_eq!(energy(&a), 15);
    assert_eq!(common::energy_pair_quadruples(&a, &a), 15);
    let ap = FiniteSet::integers(0..10);
    assert_eq!(energy(&ap), common::energy_pair_quadruples(&ap, &ap));
    assert_eq!(energy(&ap), (2 * 1000 + 10) / 3);
}

#[test]
fn moments_against_pair_counts() {
    for seed in 0..60 {
        let a = random_set(seed, 20);
        let b = companion(seed, &a, 20);
        for k in 1..=4 {
            assert_eq!(energy_moment_int(&a, k), common::moment(&a, k), "seed {seed}, k {k}");
        }
        for k in 1..=3 {
            assert_eq!(energy_moment_pair_int(&a, &b, k).unwrap(), common::moment_pair(&a, &b, k), "seed {seed}");
        }
    }
}

#[test]
fn tuple_energies_against_enumeration() {
    for seed in 0..40 {
        let a = random_set(seed, 14);
        for k in 2..=3 {
            assert_eq!(t_energy(&a, k).unwrap(), common::t_energy(&a, k), "seed {seed}");
            assert_eq!(sigma_k(&a, k).unwrap(), common::sigma(&a, k), "seed {seed}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pair_energy_matches_quadruples(seed in 0u64..10_000) {
        let a = random_set(seed, 12);
        let b = companion(seed, &a, 12);
        prop_assert_eq!(energy_pair(&a, &b).unwrap(), common::energy_pair_quadruples(&a, &b));
    }

    #[test]
    fn energy_bounds(seed in 0u64..10_000) {
        let a = random_set(seed, 24);
        let n = a.len() as i128;
        let e = energy(&a);
        prop_assert!(n * n <= e && e <= n * n * n);
        prop_assert!(n.pow(4) <= e * a.diffset(&a).unwrap().len() as i128);
        prop_assert!(n.pow(4) <= e * a.sumset(&a).unwrap().len() as i128);
        prop_assert!(energy_moment_int(&a, 3) <= e * n);
        let t3 = t_energy(&a, 3).unwrap();
        prop_assert!(n.pow(6) <= t3 * a.iterated_sumset(3, 0).len() as i128);
    }

    #[test]
    fn energy_is_translation_and_reflection_invariant(seed in 0u64..10_000) {
        let a = random_set(seed, 20);
        let x = a.elements()[a.len() / 2].clone();
        let moved = a.translate(&x);
        prop_assert_eq!(energy(&moved), energy(&a));
        prop_assert_eq!(energy_moment_int(&a.negate(), 3), energy_moment_int(&a, 3));
        prop_assert_eq!(t_energy(&moved, 2).unwrap(), energy(&a));
    }

    #[test]
    fn pair_energy_cauchy_schwarz(seed in 0u64..10_000) {
        let a = random_set(seed, 20);
        let b = companion(seed, &a, 20);
        let eab = energy_pair(&a, &b).unwrap();
        prop_assert!(eab * eab <= energy(&a) * energy(&b));
    }
}
