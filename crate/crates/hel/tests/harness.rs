use hel::generators::FamilySpec;
use hel::harness::{self, CheckKind, Input, Suite};
use hel::FiniteSet;

fn family(text: &str) -> Input {
    Input::from_spec(&FamilySpec::parse(text).unwrap()).unwrap()
}

/// Displays of the method and the check that evaluates each of them.
const COVERAGE: &[(&str, &str)] = &[
    ("energy as sums of squared convolutions", "energy.convolution_forms"),
    ("higher energies E_k and T_k", "energy.basic"),
    ("sigma_k of symmetric sets", "energy.symmetric_sigma"),
    ("E_{k+1}(A,B) through the diagonal", "energy.delta"),
    ("scalar product of generalized convolutions", "convolution.scalar_product"),
    ("multi-scalar product of generalized convolutions", "convolution.multi_scalar"),
    ("sigma of iterated correlations", "convolution.sigma_c"),
    ("tensor powers of convolutions", "convolution.tensor"),
    ("tensor powers of generalized convolutions", "convolution.tensor_c"),
    ("rectangular singular decomposition and norm of M", "spectral.audit"),
    ("Perron–Frobenius", "spectral.perron"),
    ("diagonal convexity consequence", "spectral.mean_bounds"),
    ("shift-set energy identity", "energy.ek_identity"),
    ("Balog–Szemerédi–Gowers extraction", "structure.bsg"),
    ("third energy of convex sets", "structure.convex_e3"),
    ("arranging under small multiplicative doubling", "structure.mult_doubling"),
    ("products of rectangular operators", "spectral.audit"),
    ("rectangular trace formulas", "spectral.audit"),
    ("rank-one rectangular operators", "spectral.rank_one"),
    ("rank-one symmetric operators", "spectral.rank_one"),
    ("three-halves energy with differences", "spectral.three_halves"),
    ("three-halves energy with sums", "spectral.three_halves"),
    ("Li's inequality", "spectral.li"),
    ("ss2 inequality", "spectral.ss2"),
    ("symmetric trace formulas", "spectral.audit"),
    ("eigenfunction mean identities", "spectral.mean_identities"),
    ("cubic eigenfunction mean bound and Carbery", "spectral.mean_bounds"),
    ("tensor operator spectrum", "spectral.tensor_operator"),
    ("main eigenfunction bounds", "spectral.eigenfunction_bounds"),
    ("sup norm of the main eigenfunction for g = g_1∘g_1", "spectral.l_infty_factor"),
    ("main eigenvalue against the energy operator", "spectral.mu_energy"),
    ("weighted triangles", "spectral.triangles"),
    ("convex energy machinery", "structure.convex_trace"),
    ("convex energy conclusion", "structure.convex_energy"),
    ("energy under small multiplicative doubling", "structure.mult_doubling"),
    ("multiplicative energy of shifted products", "structure.shifted_product"),
    ("pigeonholed dyadic levels", "structure.levels"),
    ("third energy structure theorem", "structure.pipeline_e3"),
    ("fourth energy structure theorem", "structure.pipeline_e4m"),
    ("fourth energy against T_4", "structure.pipeline_e4t4"),
    ("extremal examples", "family.shape"),
    ("E_k, T_k and sigma", "energy.ek_tk_sigma"),
    ("popular dual pair constructions", "dual.popular_pair"),
    ("duality for k = 2", "dual.duality_k2"),
    ("hermitian dual operator", "dual.operator"),
    ("dual bounds for k = 2", "dual.bounds.k2"),
    ("dual bounds for k = 3", "dual.bounds.k3"),
    ("regularized subset certificates", "dual.regularized"),
    ("connected sets", "dual.connected"),
    ("E_s for connected sets", "dual.e_s_connected"),
    ("difference-set corollary", "structure.difference_corollary"),
    ("fourth energy lower bound", "dual.e4_energy"),
    ("third energy dual example", "dual.e3_pair"),
];

#[test]
fn registry_covers_every_display() {
    assert!(harness::registry().len() >= 30);
    for (display, id) in COVERAGE {
        let d = harness::find_check(id).unwrap_or_else(|_| panic!("{display}: no check `{id}`"));
        assert!(!d.paper_ref.is_empty());
    }
    for d in harness::registry() {
        assert!(COVERAGE.iter().any(|(_, id)| *id == d.check_id) || d.check_id == "structure.bucket_energy"
            || d.check_id == "structure.decay_convex", "{} is not mapped", d.check_id);
    }
    assert!(harness::find_check("no.such.check").is_err());
}

#[test]
fn explicit_suite_on_cube_subgroup() {
    let h = family("h-plus-dissociated:n=3:hdim=3:lambda=0");
    let res = harness::run_suite(Suite::Explicit, &[h], None, false).unwrap();
    assert!(res.iter().all(|r| !r.failed()));
    let evaluated = res.iter().filter(|r| r.pass.is_some()).count();
    assert!(evaluated > 100);
    let equalities = res.iter().filter(|r| r.pass == Some(true) && r.ratio.is_some_and(|q| (q - 1.0).abs() < 1e-9)).count();
    assert!(equalities >= 10, "{equalities}");
    let skipped: Vec<_> = res.iter().filter_map(|r| r.skipped.as_ref().map(|s| (&r.check_id, s))).collect();
    assert_eq!(skipped.len(), 1, "{skipped:?}");
}

#[test]
fn asymptotic_rows_carry_no_verdict() {
    let sq = family("convex:kind=squares:n=128");
    let res = harness::run_suite(Suite::Asymptotic, &[sq], None, false).unwrap();
    let ratios = res.iter().filter(|r| r.ratio.is_some()).count();
    assert!(ratios >= 5);
    assert!(res.iter().all(|r| r.pass.is_none() && r.kind == CheckKind::Asymptotic));
    let json = harness::report_json(&res);
    assert!(!json.contains("\"pass\""));
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    let inputs = [
        Input::from_set("0,1,3", FiniteSet::integers([0, 1, 3])),
        family("random:group=Z/31:n=9:seed=4"),
        family("convex:kind=squares:n=12"),
    ];
    let first = harness::run_suite(Suite::All, &inputs, None, false).unwrap();
    let again = harness::run_suite(Suite::All, &inputs, None, false).unwrap();
    let text = harness::report_json(&first);
    assert_eq!(text, harness::report_json(&again));
    let keys: Vec<_> = first.iter().map(|r| (r.check_id.clone(), r.input_digest.clone())).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);

    let parsed = harness::parse_report_json(&text).unwrap();
    let csv = harness::report_csv(&parsed).unwrap();
    let back = harness::parse_report_csv(&csv).unwrap();
    assert_eq!(harness::report_json(&back), text);
    assert_eq!(harness::exit_code(&first), 0);

    let mut broken = first.clone();
    broken[0].pass = Some(false);
    assert_eq!(harness::exit_code(&broken), 1);
}

#[test]
fn empty_report_is_valid() {
    let text = harness::report_json(&[]);
    assert!(harness::parse_report_json(&text).unwrap().is_empty());
    let csv = harness::report_csv(&[]).unwrap();
    assert!(harness::parse_report_csv(&csv).unwrap().is_empty());
    assert!(harness::run_suite(Suite::All, &[], None, false).unwrap().is_empty());
}

#[test]
fn inapplicable_checks_are_skipped_with_reasons() {
    let big = family("ap:n=40:start=0:step=1:group=Z");
    let res = harness::run_suite(Suite::All, &[big], Some("convolution.tensor_c"), false).unwrap();
    assert_eq!(res.len(), 1);
    assert!(res[0].skipped.as_deref().unwrap().contains("≤ 11"));
    assert_eq!(res[0].pass, None);
}

#[test]
fn inputs_are_left_untouched() {
    let input = family("disjoint-subgroups:n=6:k=2:hdim=3");
    let before = input.set.clone();
    harness::run_suite(Suite::All, std::slice::from_ref(&input), Some("structure.*"), false).unwrap();
    assert_eq!(input.set, before);
}

#[test]
fn main_eigenfunction_of_a_degenerate_operator_is_nonnegative() {
    let a = family("h-plus-dissociated:n=4:hdim=3:lambda=1:mode=direct:seed=3");
    let g = a.weight().to_real();
    let dec = hel::spectral::build_symmetric(hel::spectral::OperatorKind::SymDifference, &a.set, &g)
        .unwrap()
        .decompose()
        .unwrap();
    assert!(dec.values[0] > 0.0);
    assert!(dec.main_vector().iter().all(|&x| x >= -1e-12));
    assert!(hel::spectral::g_bound_relations(&a.set, &g).unwrap().iter().all(|r| r.passes() == Some(true)));
}
