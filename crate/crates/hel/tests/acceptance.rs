//! Acceptance criteria. Prints one PASS or FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use hel::convolution::autocorrelation;
use hel::energy::{energy, energy_moment_int, energy_moment_pair_int, energy_pair, sigma_k, t_energy};
use hel::generators::{f2_span, family_prediction_relations, FamilySpec};
use hel::harness::{self, CheckResult, Input, Suite};
use hel::relation::Relation;
use hel::spectral;
use hel::structure;
use hel::Group;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(elapsed: Duration, budget_s: u64) -> bool {
    elapsed.as_secs() < budget_s
}

fn family(text: &str) -> Input {
    Input::from_spec(&FamilySpec::parse(text).unwrap()).unwrap()
}

fn run_checks(ids: &[&str], inputs: &[Input]) -> Vec<CheckResult> {
    let checks: Vec<_> = ids.iter().map(|id| harness::find_check(id).unwrap()).collect();
    let pairs: Vec<_> = checks.iter().flat_map(|d| inputs.iter().map(move |i| (*d, i))).collect();
    pairs.par_iter().flat_map_iter(|(d, i)| harness::run_check(d, i, false)).collect()
}

struct Tally {
    evaluated: usize,
    failed: Vec<String>,
    skipped: Vec<String>,
}

fn tally(rows: &[CheckResult]) -> Tally {
    Tally {
        evaluated: rows.iter().filter(|r| r.pass.is_some()).count(),
        failed: rows
            .iter()
            .filter(|r| r.failed())
            .map(|r| format!("{} on {}: {} ({:?} vs {:?})", r.check_id, r.input, r.label, r.lhs, r.rhs))
            .collect(),
        skipped: rows
            .iter()
            .filter_map(|r| r.skipped.as_ref().map(|s| format!("{} on {}: {s}", r.check_id, r.input)))
            .collect(),
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mismatches: Vec<String> = (0..200u64)
        .into_par_iter()
        .flat_map_iter(|seed| {
            let a = common::random_set(seed, 32);
            let b = common::companion(seed, &a, 32);
            let mut bad = Vec::new();
            let mut cmp = |what: String, got: i128, want: i128| {
                if got != want {
                    bad.push(format!("seed {seed}: {what} {got} != {want}"));
                }
            };
            cmp("E(A,B)".into(), energy_pair(&a, &b).unwrap(), common::energy_pair_quadruples(&a, &b));
            for s in 1..=4 {
                cmp(format!("E_{s}"), energy_moment_int(&a, s), common::moment(&a, s));
            }
            for k in 2..=3 {
                cmp(format!("T_{k}"), t_energy(&a, k).unwrap(), common::t_energy(&a, k));
                cmp(format!("sigma_{k}"), sigma_k(&a, k).unwrap(), common::sigma(&a, k));
            }
            for k in 1..=3 {
                cmp(format!("E_{k}(A,B)"), energy_moment_pair_int(&a, &b, k).unwrap(), common::moment_pair(&a, &b, k));
            }
            bad
        })
        .collect();
    let kinds: std::collections::BTreeSet<&str> = (0..200u64)
        .map(|s| hel::generators::group_kind_tag(common::random_set(s, 32).group().descriptor()))
        .collect();
    let el = start.elapsed();
    outcome(
        mismatches.is_empty() && kinds.len() == 4 && within(el, 60),
        format!("200 sets over {} group kinds, {} mismatches, {:.1}s {}", kinds.len(), mismatches.len(), el.as_secs_f64(),
            mismatches.first().cloned().unwrap_or_default()),
    )
}

fn identity_inputs(count: u64, max_size: usize) -> Vec<Input> {
    (0..count).map(|s| Input::from_set(format!("seed {s}"), common::random_set(1000 + s, max_size))).collect()
}

fn exact_identities() -> Outcome {
    let start = Instant::now();
    let ids = [
        "energy.convolution_forms",
        "convolution.scalar_product",
        "convolution.multi_scalar",
        "convolution.sigma_c",
        "energy.ek_identity",
        "energy.delta",
        "convolution.tensor",
        "convolution.tensor_c",
        "dual.duality_k2",
        "spectral.triangles",
        "spectral.mean_identities",
    ];
    let rows = run_checks(&ids, &identity_inputs(50, 11));
    let t = tally(&rows);
    let el = start.elapsed();
    outcome(
        t.failed.is_empty() && t.skipped.is_empty() && within(el, 300),
        format!("{} rows over 50 inputs, {} failed, {} skipped, {:.1}s {}", t.evaluated, t.failed.len(), t.skipped.len(),
            el.as_secs_f64(), t.failed.first().or(t.skipped.first()).cloned().unwrap_or_default()),
    )
}

fn spectral_invariants() -> Outcome {
    let start = Instant::now();
    let rows = run_checks(&["spectral.audit", "spectral.rank_one"], &identity_inputs(50, 24));
    let t = tally(&rows);
    outcome(
        t.failed.is_empty() && t.skipped.is_empty(),
        format!("{} rows over 50 (A, B, D, S) instances, {} failed, {} skipped, {:.1}s {}", t.evaluated, t.failed.len(),
            t.skipped.len(), start.elapsed().as_secs_f64(), t.failed.first().or(t.skipped.first()).cloned().unwrap_or_default()),
    )
}

fn random_subspace(seed: u64) -> Input {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(5..=8u32);
    let d = rng.gen_range(2..=4u32);
    let g = Group::cube(n).unwrap();
    let mut basis: Vec<u64> = Vec::new();
    while basis.len() < d as usize {
        let v = rng.gen_range(1..1u64 << n);
        let mut trial = basis.clone();
        trial.push(v);
        if hel::generators::f2_rank(&trial) == trial.len() {
            basis = trial;
        }
    }
    Input::from_set(format!("span seed {seed}"), f2_span(&g, &basis).unwrap())
}

fn explicit_families() -> Vec<(&'static str, Vec<Input>)> {
    let convex = (0..100u64)
        .map(|s| match s % 4 {
            0 => family(&format!("convex:kind=squares:n={}", 6 + s % 11)),
            1 => family(&format!("convex:kind=power:alpha=1.5:n={}", 6 + s % 11)),
            _ => family(&format!("convex:kind=random-gaps:n={}:seed={s}", 6 + s % 11)),
        })
        .collect();
    let subgroup = (0..100u64)
        .map(|s| match s % 4 {
            0 => family(&format!("cyclic-subgroup:modulus={}:order={}", 4 * (2 + s % 5), 2 + s % 5)),
            1 => family(&format!("mult-subgroup:p={}:d=2", [13u64, 17, 29, 31][(s / 4 % 4) as usize])),
            _ => random_subspace(s),
        })
        .collect();
    let h_plus = (0..100u64)
        .map(|s| {
            let hdim = 2 + s % 2;
            let lambda = 1 + s % 3;
            let mode = if s % 2 == 0 { "union" } else { "direct" };
            if mode == "direct" && hdim + lambda > 4 {
                family(&format!("h-plus-dissociated:n={}:hdim=2:lambda=2:mode=direct:seed={s}", 4 + s % 3))
            } else {
                family(&format!("h-plus-dissociated:n={}:hdim={hdim}:lambda={lambda}:mode={mode}:seed={s}", hdim + lambda + s % 3))
            }
        })
        .collect();
    let unions = (0..100u64)
        .map(|s| {
            let k = 2 + s % 2;
            family(&format!("disjoint-subgroups:n={}:k={k}:hdim=2:seed={s}", 2 * k + s % 3))
        })
        .collect();
    let pool = ["Z", "Z/29", "Z/64", "F2^6", "Z/3xF2^3"];
    let random = (0..100u64)
        .map(|s| {
            let g = pool[(s % 5) as usize];
            family(&format!("random:group={g}:n={}:seed={s}", 5 + s % 12))
        })
        .collect();
    vec![("convex", convex), ("subgroup", subgroup), ("H+Lambda", h_plus), ("union of H_j", unions), ("random", random)]
}

fn explicit_inequalities() -> Outcome {
    let start = Instant::now();
    let ids = [
        "spectral.three_halves",
        "spectral.li",
        "spectral.ss2",
        "spectral.eigenfunction_bounds",
        "spectral.l_infty_factor",
        "spectral.mu_energy",
        "spectral.mean_bounds",
        "energy.ek_tk_sigma",
        "dual.bounds.k2",
        "dual.bounds.k3",
        "dual.e4_energy",
        "dual.regularized",
        "dual.popular_pair",
        "dual.connected",
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut first = String::new();
    for (name, inputs) in explicit_families() {
        let t = tally(&run_checks(&ids, &inputs));
        pass &= t.failed.is_empty();
        if first.is_empty() {
            first = t.failed.first().cloned().unwrap_or_default();
        }
        parts.push(format!("{name}: {} rows, {} failed, {} skipped", t.evaluated, t.failed.len(), t.skipped.len()));
    }
    let el = start.elapsed();
    outcome(pass && within(el, 900), format!("{}; {:.1}s {first}", parts.join("; "), el.as_secs_f64()))
}

fn ratio_one(r: &Relation) -> bool {
    r.ratio().is_some_and(|q| (q - 1.0).abs() <= 1e-9)
}

fn subgroup_calibration() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for m in 2..=4u32 {
        let h = f2_span(&Group::cube(m).unwrap(), &(0..m).map(|i| 1u64 << i).collect::<Vec<_>>()).unwrap();
        let n = h.len() as f64;
        let ind = h.indicator_real();
        let mut rel = spectral::three_halves_relations(&h, &h, &ind).unwrap();
        rel.extend(spectral::li_relations(&h, &h).unwrap());
        rel.push(spectral::mu_energy_relation(&h, &autocorrelation(&h).to_real()).unwrap());
        let tri = spectral::triangle_relation(&h, &ind, &ind).unwrap();
        let tri_value = (tri.lhs.as_f64() - n.powi(3)).abs() <= 1e-9 * n.powi(3);
        rel.push(tri.clone());
        let all_one = rel.iter().all(ratio_one);
        pass &= all_one && tri_value;
        lines.push(format!("|H| = {}: {} relations at ratio 1, triangles {}", h.len(),
            rel.iter().filter(|r| ratio_one(r)).count(), tri.lhs.as_f64()));
        if !all_one {
            lines.extend(rel.iter().filter(|r| !ratio_one(r)).map(|r| format!("{} ratio {:?}", r.label, r.ratio())));
        }
    }
    outcome(pass, lines.join("; "))
}

fn structure_recovery() -> Outcome {
    let spec = "h-plus-dissociated:n=12:hdim=6:lambda=6:mode=union";
    let a = family(spec).set;
    let h = 64usize;
    let start = Instant::now();
    let e3 = structure::pipeline_e3(&a).unwrap();
    let e3_time = start.elapsed();
    let e3_again = structure::pipeline_e3(&a).unwrap();
    let diff = e3.subset.diffset(&e3.subset).unwrap().len();
    let e3_ok = e3.subset.len() * 2 >= h && diff <= 4 * h && e3.subset == e3_again.subset && within(e3_time, 120);

    let start = Instant::now();
    let t4 = structure::pipeline_e4t4(&a).unwrap();
    let t4_time = start.elapsed();
    let t4_again = structure::pipeline_e4t4(&a).unwrap();
    let m = t4.subset.len() as i128;
    let e = energy(&t4.subset);
    let t4_ok = 8 * e >= m.pow(3) && t4.subset == t4_again.subset && within(t4_time, 120);
    outcome(
        e3_ok && t4_ok && e3.to_json() == e3_again.to_json(),
        format!("|A| = {}; E_3 pipeline |A'| = {}, |A'-A'| = {diff}, {:.2}s; E_4/T_4 pipeline |A'| = {m}, E(A') = {e} vs |A'|^3/8 = {}, {:.2}s",
            a.len(), e3.subset.len(), e3_time.as_secs_f64(), m.pow(3) / 8, t4_time.as_secs_f64()),
    )
}

fn family_statistics() -> Outcome {
    let mut worst_direct = 1f64;
    let mut worst_union = 1f64;
    for (hdim, lambda) in [(4, 3), (5, 4), (6, 4), (4, 6)] {
        let g = FamilySpec::parse(&format!("h-plus-dissociated:n={}:hdim={hdim}:lambda={lambda}:mode=direct", hdim + lambda))
            .unwrap()
            .generate()
            .unwrap();
        for r in family_prediction_relations(&g).unwrap() {
            let q = r.ratio().unwrap();
            worst_direct = worst_direct.max(q.max(1.0 / q));
        }
    }
    for k in 2..=4u32 {
        let g = FamilySpec::parse(&format!("disjoint-subgroups:n={}:k={k}:hdim=4", 4 * k)).unwrap().generate().unwrap();
        for r in family_prediction_relations(&g).unwrap() {
            let q = r.ratio().unwrap();
            worst_union = worst_union.max(q.max(1.0 / q));
        }
    }
    outcome(
        worst_direct <= 4.0 && worst_union <= 8.0,
        format!("H+Lambda worst factor {worst_direct:.3} (limit 4); union of H_j worst factor {worst_union:.3} (limit 8)"),
    )
}

fn asymptotic_reports() -> Outcome {
    let start = Instant::now();
    let sizes = [64usize, 128, 256];
    let inputs: Vec<Input> = sizes.iter().map(|n| family(&format!("convex:kind=squares:n={n}"))).collect();
    let res = harness::run_suite(Suite::Asymptotic, &inputs, None, false).unwrap();
    let no_verdicts = res.iter().all(|r| r.pass.is_none());
    let series = |label: &str| -> Vec<f64> {
        inputs
            .iter()
            .map(|i| {
                res.iter()
                    .find(|r| r.input_digest == i.digest && r.label == label)
                    .and_then(|r| r.ratio)
                    .unwrap_or(f64::NAN)
            })
            .collect()
    };
    let drift = |s: &[f64]| {
        let hi = s.iter().copied().fold(f64::MIN, f64::max);
        let lo = s.iter().copied().fold(f64::MAX, f64::min);
        (hi - lo) / hi
    };
    let sane = |s: &[f64]| s.iter().all(|x| x.is_finite() && *x > 0.0) && s.windows(2).all(|w| w[1] <= w[0] * 1.5);
    let c3 = series("E_3 over |A|^3 log|A|");
    let ce = series("E over |A|^{32/13}");
    let (d3, de) = (drift(&c3), drift(&ce));
    let el = start.elapsed();
    let fmt = |s: &[f64]| s.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    outcome(
        no_verdicts && sane(&c3) && sane(&ce) && d3 < 0.2 && de < 0.2 && within(el, 300),
        format!("|A| = 64, 128, 256; E_3/(|A|^3 log|A|) = [{}] drift {:.1}%; E/|A|^(32/13) = [{}] drift {:.1}%; {} rows, no verdicts: {no_verdicts}; {:.1}s",
            fmt(&c3), 100.0 * d3, fmt(&ce), 100.0 * de, res.len(), el.as_secs_f64()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("exact identity suite", exact_identities),
        ("spectral invariants", spectral_invariants),
        ("explicit inequality suite", explicit_inequalities),
        ("subgroup equality calibration", subgroup_calibration),
        ("structure recovery", structure_recovery),
        ("example family statistics", family_statistics),
        ("asymptotic ratio reports", asymptotic_reports),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("acceptance {} [{}] {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
