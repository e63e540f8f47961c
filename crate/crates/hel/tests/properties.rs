mod common;

use hel::convolution::{autocorrelation, convolve, correlate, set_convolution};
use hel::energy::{energy, energy_moment_int, t_energy};
use hel::generators::{self, FamilySpec};
use hel::harness::{self, Input, Suite};
use hel::identities;
use hel::spectral::{self, build_symmetric, OperatorKind};
use hel::structure;
use hel::FiniteSet;
use proptest::prelude::*;

fn ok(r: &hel::relation::Relation) -> Result<(), TestCaseError> {
    prop_assert_eq!(r.passes(), Some(true), "{:?}", r);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convolution_laws(seed in 0u64..10_000) {
        let a = common::random_set(seed, 16);
        let b = common::companion(seed, &a, 16);
        let (fa, fb) = (a.indicator(), b.indicator());
        prop_assert_eq!(convolve(&fa, &fb).unwrap(), convolve(&fb, &fa).unwrap());
        prop_assert_eq!(correlate(&fa, &fb).unwrap(), correlate(&fb, &fa).unwrap().reflect());
        prop_assert_eq!(set_convolution(&a, &b).unwrap().total(), (a.len() * b.len()) as i128);
        prop_assert_eq!(autocorrelation(&a).get(&a.group().zero()), a.len() as i128);
        for r in identities::energy_convolution_relations(&a, &b).unwrap() {
            ok(&r)?;
        }
    }

    #[test]
    fn generalized_convolution_identities(seed in 0u64..10_000) {
        let a = common::random_set(seed, 9);
        let b = common::companion(seed, &a, 9);
        let fs = vec![a.indicator(), b.indicator(), a.indicator()];
        for l in 2..=3 {
            ok(&identities::scalar_product_relation(&fs[..l], &fs[..l]).unwrap())?;
            ok(&identities::multi_scalar_relation(&fs[..l], 2).unwrap())?;
            ok(&identities::sigma_c_relation(&fs[..l], l).unwrap())?;
        }
        ok(&identities::ek_identity_relation(&a, 1, 2).unwrap())?;
        ok(&identities::ek_identity_relation(&a, 2, 2).unwrap())?;
    }

    #[test]
    fn spectral_trace_laws(seed in 0u64..10_000) {
        let a = common::random_set(seed, 20);
        let w = autocorrelation(&a).to_real();
        let op = build_symmetric(OperatorKind::SymDifference, &a, &w).unwrap();
        let dec = op.decompose().unwrap();
        for r in spectral::audit(&op, &dec) {
            ok(&r)?;
        }
        let mu0 = dec.main_value();
        prop_assert!(mu0 * a.len() as f64 >= energy(&a) as f64 * (1.0 - 1e-12));
        prop_assert!(dec.values.iter().all(|v| v.abs() <= mu0 * (1.0 + 1e-12)));
    }

    #[test]
    fn level_buckets_cover_popular_differences(seed in 0u64..10_000) {
        let a = common::random_set(seed, 30);
        let d = structure::level_decompose(&a, 2.0).unwrap();
        let total: usize = d.buckets.iter().map(|b| b.len()).sum();
        let r = autocorrelation(&a);
        let n2 = (a.len() * a.len()) as i128;
        let popular = r.iter().filter(|(_, v)| 2 * **v * n2 > energy(&a)).count();
        prop_assert_eq!(total, popular);
        prop_assert!(d.buckets.iter().any(|b| b.contains(&a.group().zero())));
        for r in d.relations(&a) {
            if r.cmp != hel::relation::Comparison::Report {
                ok(&r)?;
            }
        }
    }

    #[test]
    fn isolated_rerun_matches_batch(seed in 0u64..10_000) {
        let input = Input::from_set(format!("seed {seed}"), common::random_set(seed, 10));
        let batch = harness::run_suite(Suite::All, std::slice::from_ref(&input), Some("energy.*"), false).unwrap();
        for d in harness::registry().iter().filter(|d| d.check_id.starts_with("energy.")) {
            let alone = harness::run_check(d, &input, false);
            let from_batch: Vec<_> = batch.iter().filter(|r| r.check_id == d.check_id).cloned().collect();
            prop_assert_eq!(alone, from_batch);
        }
    }

    #[test]
    fn family_spec_round_trip(n in 4usize..40, seed in 0u64..100) {
        for text in [
            format!("convex:kind=random-gaps:n={n}:seed={seed}"),
            format!("random:group=Z/97:n={}:seed={seed}", n.min(97)),
            format!("ap:n={n}:start=3:step=5:group=Z:seed={seed}"),
        ] {
            let spec = FamilySpec::parse(&text).unwrap();
            prop_assert_eq!(spec.to_string(), text);
            let g = spec.generate().unwrap();
            prop_assert_eq!(g.set.len(), n.min(97));
            prop_assert_eq!(spec.generate().unwrap().set, g.set);
        }
    }
}

#[test]
fn random_gap_sets_are_convex() {
    for seed in 0..20 {
        let g = FamilySpec::parse(&format!("convex:kind=random-gaps:n=30:seed={seed}")).unwrap().generate().unwrap();
        let xs: Vec<i64> = g.set.iter().map(|e| e.coords()[0]).collect();
        assert!(generators::is_convex(&xs));
        assert!(Input::from_set("x", g.set.clone()).has_tag("convex"));
    }
}

#[test]
fn subgroup_energies_are_extremal() {
    for d in 1..=5u32 {
        let h = FamilySpec::parse(&format!("h-plus-dissociated:n={}:hdim={d}:lambda=0", d + 1)).unwrap().generate().unwrap();
        let n = h.set.len() as i128;
        assert_eq!(energy(&h.set), n.pow(3));
        assert_eq!(energy_moment_int(&h.set, 4), n.pow(5));
        assert_eq!(t_energy(&h.set, 3).unwrap(), n.pow(5));
        assert!(Input::from_set("h", h.set.clone()).has_tag("subgroup"));
    }
}

#[test]
fn set_json_round_trip_keeps_digest() {
    let a = FiniteSet::integers([5, -2, 9, 0]);
    let (b, warnings) = FiniteSet::from_json(&a.to_json()).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(a.digest(), b.digest());
}
