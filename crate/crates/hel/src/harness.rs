//! Check registry, batch execution and JSON/CSV reports.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::convolution::autocorrelation;
use crate::dual::{self, ConnectivityMode};
use crate::energy::{energy, energy_moment_int, sigma_k, t_energy};
use crate::error::{Error, Result};
use crate::generators::{self, FamilySpec};
use crate::group::{FiniteSet, GroupDescriptor, GroupFunction};
use crate::identities;
use crate::relation::{Comparison, Quantity, Relation};
use crate::spectral::{self, build_operator, build_symmetric, OperatorKind};
use crate::structure::{self, DecayKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Exact,
    Explicit,
    Asymptotic,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Exact => "exact",
            CheckKind::Explicit => "explicit",
            CheckKind::Asymptotic => "asymptotic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CheckKind::Exact),
            "explicit" => Ok(CheckKind::Explicit),
            "asymptotic" => Ok(CheckKind::Asymptotic),
            _ => Err(Error::Parse(format!("unknown check kind `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Explicit,
    Asymptotic,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "identities" => Ok(Suite::Identities),
            "explicit" => Ok(Suite::Explicit),
            "asymptotic" => Ok(Suite::Asymptotic),
            "all" => Ok(Suite::All),
            _ => Err(Error::Parse(format!("unknown suite `{s}`"))),
        }
    }

    pub fn includes(self, kind: CheckKind) -> bool {
        match self {
            Suite::Identities => kind == CheckKind::Exact,
            Suite::Explicit => kind == CheckKind::Explicit,
            Suite::Asymptotic => kind == CheckKind::Asymptotic,
            Suite::All => true,
        }
    }
}

/// What an input must satisfy for a check to apply.
#[derive(Clone, Copy, Debug)]
pub struct Requirements {
    /// The input must carry at least one of these tags; empty means any input.
    pub any_tag: &'static [&'static str],
    pub min_size: usize,
    pub max_size: usize,
}

const ANY: Requirements = Requirements { any_tag: &[], min_size: 1, max_size: 128 };

const fn upto(max_size: usize) -> Requirements {
    Requirements { any_tag: &[], min_size: 1, max_size }
}

const fn tagged(any_tag: &'static [&'static str], max_size: usize) -> Requirements {
    Requirements { any_tag, min_size: 3, max_size }
}

pub type Evaluator = fn(&Input) -> Result<Vec<Relation>>;

#[derive(Clone, Copy)]
pub struct CheckDescriptor {
    pub check_id: &'static str,
    /// The statement being checked, as a formula.
    pub paper_ref: &'static str,
    pub kind: CheckKind,
    pub requires: Requirements,
    pub evaluate: Evaluator,
}

impl std::fmt::Debug for CheckDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CheckDescriptor")
            .field("check_id", &self.check_id)
            .field("kind", &self.kind)
            .field("requires", &self.requires)
            .finish()
    }
}

impl CheckDescriptor {
    /// `Err(reason)` when the input does not meet the requirements.
    pub fn applicable(&self, input: &Input) -> std::result::Result<(), String> {
        let r = &self.requires;
        let n = input.set.len();
        if n < r.min_size {
            return Err(format!("needs |A| ≥ {}, got {n}", r.min_size));
        }
        if n > r.max_size {
            return Err(format!("needs |A| ≤ {}, got {n}", r.max_size));
        }
        if !r.any_tag.is_empty() && !r.any_tag.iter().any(|t| input.has_tag(t)) {
            return Err(format!("needs one of the tags {:?}", r.any_tag));
        }
        Ok(())
    }
}

/// A set together with its provenance and property tags.
#[derive(Clone, Debug)]
pub struct Input {
    pub label: String,
    pub set: FiniteSet,
    pub tags: Vec<String>,
    pub components: Vec<(String, FiniteSet)>,
    pub spec: Option<FamilySpec>,
    pub digest: String,
}

impl Input {
    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let g = spec.generate()?;
        let digest = g.set.digest();
        Ok(Input {
            label: spec.to_string(),
            tags: g.tags.iter().map(|t| t.to_string()).collect(),
            components: g.components.clone(),
            spec: Some(spec.clone()),
            set: g.set,
            digest,
        })
    }

    /// Tags for a bare set are detected: group kind, convexity and subgroup closure.
    pub fn from_set(label: impl Into<String>, set: FiniteSet) -> Self {
        let mut tags = vec![generators::group_kind_tag(set.group().descriptor()).to_string()];
        if *set.group().descriptor() == GroupDescriptor::Integers {
            let xs: Vec<i64> = set.iter().map(|e| e.coords()[0]).collect();
            if xs.len() >= 3 && generators::is_convex(&xs) {
                tags.push("convex".into());
            }
        }
        if set.group().is_finite()
            && set.contains(&set.group().zero())
            && set.len() <= 1024
            && set.sumset(&set).map(|s| s.len() == set.len()).unwrap_or(false)
        {
            tags.push("subgroup".into());
        }
        tags.sort();
        let digest = set.digest();
        Input { label: label.into(), set, tags, components: Vec::new(), spec: None, digest }
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }

    /// Seed derived from the digest, so an isolated rerun sees the same auxiliary data.
    pub fn seed(&self) -> u64 {
        u64::from_str_radix(&self.digest[..16], 16).unwrap_or(0)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed() ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    /// A deterministic subset of `A + A` of size `⌈|A|/2⌉`.
    pub fn companion(&self) -> FiniteSet {
        let a = &self.set;
        let pool = a.sumset(a).expect("same group");
        let m = a.len().div_ceil(2).min(pool.len()).max(1);
        let mut rng = self.rng(1);
        let picks = rand::seq::index::sample(&mut rng, pool.len(), m);
        FiniteSet::new(a.group().clone(), picks.into_iter().map(|i| pool.elements()[i].clone()).collect())
            .expect("canonical")
    }

    /// A deterministic even weight on `A - A` with values in `0..=3`.
    pub fn weight(&self) -> GroupFunction<i128> {
        let a = &self.set;
        let grp = a.group();
        let d = a.diffset(a).expect("same group");
        let mut rng = self.rng(2);
        let mut w = GroupFunction::zero(grp.clone());
        for x in d.iter() {
            let nx = grp.neg(x);
            if w.get(&nx) != 0 || nx < *x {
                continue;
            }
            let v: i128 = rng.gen_range(0..=3);
            if v != 0 {
                w.set(x.clone(), v);
                w.set(nx, v);
            }
        }
        w
    }
}

/// One evaluated relation, or a skipped (check, input) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub check_id: String,
    pub paper_ref: String,
    pub kind: CheckKind,
    pub input_digest: String,
    pub input: String,
    pub label: String,
    pub lhs: Option<Quantity>,
    pub rhs: Option<Quantity>,
    pub ratio: Option<f64>,
    pub pass: Option<bool>,
    pub runtime_ms: u64,
    pub skipped: Option<String>,
}

impl CheckResult {
    fn from_relation(d: &CheckDescriptor, input: &Input, r: &Relation, runtime_ms: u64) -> Self {
        let asymptotic = d.kind == CheckKind::Asymptotic || r.cmp == Comparison::Report;
        CheckResult {
            check_id: d.check_id.into(),
            paper_ref: d.paper_ref.into(),
            kind: if asymptotic { CheckKind::Asymptotic } else { d.kind },
            input_digest: input.digest.clone(),
            input: input.label.clone(),
            label: r.label.clone(),
            lhs: Some(r.lhs),
            rhs: Some(r.rhs),
            ratio: r.ratio(),
            pass: if asymptotic { None } else { r.passes() },
            runtime_ms,
            skipped: None,
        }
    }

    fn skipped(d: &CheckDescriptor, input: &Input, reason: String) -> Self {
        CheckResult {
            check_id: d.check_id.into(),
            paper_ref: d.paper_ref.into(),
            kind: d.kind,
            input_digest: input.digest.clone(),
            input: input.label.clone(),
            label: String::new(),
            lhs: None,
            rhs: None,
            ratio: None,
            pass: None,
            runtime_ms: 0,
            skipped: Some(reason),
        }
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }

    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("check_id".into(), self.check_id.clone().into());
        m.insert("paper_ref".into(), self.paper_ref.clone().into());
        m.insert("kind".into(), self.kind.as_str().into());
        m.insert("input_digest".into(), self.input_digest.clone().into());
        m.insert("input".into(), self.input.clone().into());
        m.insert("label".into(), self.label.clone().into());
        m.insert("lhs".into(), self.lhs.map_or(Value::Null, Quantity::to_json));
        m.insert("rhs".into(), self.rhs.map_or(Value::Null, Quantity::to_json));
        m.insert("ratio".into(), json!(self.ratio));
        if let Some(p) = self.pass {
            m.insert("pass".into(), p.into());
        }
        m.insert("runtime_ms".into(), self.runtime_ms.into());
        if let Some(s) = &self.skipped {
            m.insert("skipped".into(), s.clone().into());
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |k: &str| Error::Parse(format!("result field `{k}` missing or malformed"));
        let text = |k: &str| v.get(k).and_then(Value::as_str).map(str::to_string).ok_or_else(|| bad(k));
        let quantity = |k: &str| -> Result<Option<Quantity>> {
            match v.get(k) {
                None | Some(Value::Null) => Ok(None),
                Some(x) => Quantity::from_json(x).map(Some).ok_or_else(|| bad(k)),
            }
        };
        Ok(CheckResult {
            check_id: text("check_id")?,
            paper_ref: text("paper_ref")?,
            kind: CheckKind::parse(&text("kind")?)?,
            input_digest: text("input_digest")?,
            input: text("input")?,
            label: text("label")?,
            lhs: quantity("lhs")?,
            rhs: quantity("rhs")?,
            ratio: v.get("ratio").and_then(Value::as_f64),
            pass: v.get("pass").and_then(Value::as_bool),
            runtime_ms: v.get("runtime_ms").and_then(Value::as_u64).ok_or_else(|| bad("runtime_ms"))?,
            skipped: v.get("skipped").and_then(Value::as_str).map(str::to_string),
        })
    }
}

/// Runs every applicable (check, input) pair. Results are sorted by `(check_id, input digest)`.
pub fn run_suite(suite: Suite, inputs: &[Input], filter: Option<&str>, timing: bool) -> Result<Vec<CheckResult>> {
    let pattern = filter
        .map(|f| glob::Pattern::new(f).map_err(|e| Error::Parse(format!("bad filter: {e}"))))
        .transpose()?;
    let checks: Vec<&CheckDescriptor> = registry()
        .iter()
        .filter(|d| suite.includes(d.kind))
        .filter(|d| pattern.as_ref().map_or(true, |p| p.matches(d.check_id)))
        .collect();
    if let Some(f) = filter {
        if checks.is_empty() {
            return Err(Error::Precondition(format!("no check matches `{f}`")));
        }
    }
    let pairs: Vec<(&CheckDescriptor, &Input)> =
        checks.iter().flat_map(|d| inputs.iter().map(move |i| (*d, i))).collect();
    let mut results: Vec<CheckResult> = pairs
        .par_iter()
        .flat_map_iter(|(d, input)| run_check(d, input, timing))
        .collect();
    results.sort_by(|x, y| (&x.check_id, &x.input_digest).cmp(&(&y.check_id, &y.input_digest)));
    Ok(results)
}

/// Evaluates one check on one input.
pub fn run_check(d: &CheckDescriptor, input: &Input, timing: bool) -> Vec<CheckResult> {
    if let Err(reason) = d.applicable(input) {
        return vec![CheckResult::skipped(d, input, reason)];
    }
    let start = Instant::now();
    let out = (d.evaluate)(input);
    let ms = if timing { start.elapsed().as_millis() as u64 } else { 0 };
    match out {
        Ok(rel) if rel.is_empty() => vec![CheckResult::skipped(d, input, "no relation applies to this input".into())],
        Ok(rel) => rel.iter().map(|r| CheckResult::from_relation(d, input, r, ms)).collect(),
        Err(e) => vec![CheckResult::skipped(d, input, e.to_string())],
    }
}

pub fn find_check(check_id: &str) -> Result<&'static CheckDescriptor> {
    registry()
        .iter()
        .find(|d| d.check_id == check_id)
        .ok_or_else(|| Error::Precondition(format!("unknown check `{check_id}`")))
}

/// Zero iff no exact or explicit relation failed.
pub fn exit_code(results: &[CheckResult]) -> i32 {
    i32::from(results.iter().any(CheckResult::failed))
}

pub fn report_json(results: &[CheckResult]) -> String {
    let v = json!({
        "version": 1,
        "results": results.iter().map(CheckResult::to_json).collect::<Vec<_>>(),
    });
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

pub fn parse_report_json(text: &str) -> Result<Vec<CheckResult>> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if v.get("version").and_then(Value::as_u64) != Some(1) {
        return Err(Error::Parse("unsupported report version".into()));
    }
    v.get("results")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing `results`".into()))?
        .iter()
        .map(CheckResult::from_json)
        .collect()
}

const CSV_HEADER: [&str; 12] = [
    "check_id", "paper_ref", "kind", "input_digest", "input", "label", "lhs", "rhs", "ratio", "pass", "runtime_ms", "skipped",
];

fn quantity_cell(q: Option<Quantity>) -> String {
    match q {
        None => String::new(),
        Some(Quantity::Exact(v)) => v.to_string(),
        Some(Quantity::Real(v)) => format!("{v:?}"),
    }
}

fn parse_quantity_cell(s: &str) -> Result<Option<Quantity>> {
    if s.is_empty() {
        return Ok(None);
    }
    if let Ok(v) = s.parse::<i128>() {
        return Ok(Some(Quantity::Exact(v)));
    }
    s.parse::<f64>().map(|v| Some(Quantity::Real(v))).map_err(|_| Error::Parse(format!("bad quantity `{s}`")))
}

pub fn report_csv(results: &[CheckResult]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Parse(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in results {
        w.write_record([
            r.check_id.clone(),
            r.paper_ref.clone(),
            r.kind.as_str().to_string(),
            r.input_digest.clone(),
            r.input.clone(),
            r.label.clone(),
            quantity_cell(r.lhs),
            quantity_cell(r.rhs),
            r.ratio.map(|x| format!("{x:?}")).unwrap_or_default(),
            r.pass.map(|p| p.to_string()).unwrap_or_default(),
            r.runtime_ms.to_string(),
            r.skipped.clone().unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_report_csv(text: &str) -> Result<Vec<CheckResult>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let cell = |i: usize| row.get(i).unwrap_or_default().to_string();
        let opt = |i: usize| Some(cell(i)).filter(|s| !s.is_empty());
        out.push(CheckResult {
            check_id: cell(0),
            paper_ref: cell(1),
            kind: CheckKind::parse(&cell(2))?,
            input_digest: cell(3),
            input: cell(4),
            label: cell(5),
            lhs: parse_quantity_cell(&cell(6))?,
            rhs: parse_quantity_cell(&cell(7))?,
            ratio: opt(8).map(|s| s.parse().map_err(|_| Error::Parse("bad ratio".into()))).transpose()?,
            pass: opt(9).map(|s| s == "true"),
            runtime_ms: cell(10).parse().map_err(|_| Error::Parse("bad runtime".into()))?,
            skipped: opt(11),
        });
    }
    Ok(out)
}

fn real(f: &GroupFunction<i128>) -> GroupFunction<f64> {
    f.to_real()
}

fn only(rel: Vec<Relation>, cmp: Comparison) -> Vec<Relation> {
    rel.into_iter().filter(|r| r.cmp == cmp).collect()
}

fn ev_energy_forms(i: &Input) -> Result<Vec<Relation>> {
    let mut out = identities::energy_convolution_relations(&i.set, &i.set)?;
    out.extend(identities::energy_convolution_relations(&i.set, &i.companion())?);
    Ok(out)
}

fn families(i: &Input) -> (Vec<GroupFunction<i128>>, Vec<GroupFunction<i128>>) {
    let (a, b) = (i.set.indicator(), i.companion().indicator());
    (vec![a.clone(), b.clone(), a.clone()], vec![b.clone(), b, a])
}

fn ev_scalar(i: &Input) -> Result<Vec<Relation>> {
    let (fs, gs) = families(i);
    (2..=3).map(|l| identities::scalar_product_relation(&fs[..l], &gs[..l])).collect()
}

fn ev_multi_scalar(i: &Input) -> Result<Vec<Relation>> {
    let (fs, _) = families(i);
    let mut out = Vec::new();
    for l in 2..=3 {
        for k in 2..=3 {
            out.push(identities::multi_scalar_relation(&fs[..k], l)?);
        }
    }
    Ok(out)
}

fn ev_sigma_c(i: &Input) -> Result<Vec<Relation>> {
    let (fs, _) = families(i);
    let mut out = Vec::new();
    for l in 2..=3 {
        for k in 2..=3 {
            out.push(identities::sigma_c_relation(&fs[..k], l)?);
        }
    }
    Ok(out)
}

fn ev_ek_identity(i: &Input) -> Result<Vec<Relation>> {
    [(1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1)]
        .iter()
        .map(|&(k, l)| identities::ek_identity_relation(&i.set, k, l))
        .collect()
}

fn ev_delta(i: &Input) -> Result<Vec<Relation>> {
    let mut out = identities::energy_delta_relations(&i.set, &i.set, 2)?;
    out.extend(identities::energy_delta_relations(&i.set, &i.companion(), 2)?);
    Ok(out)
}

fn ev_tensor(i: &Input) -> Result<Vec<Relation>> {
    identities::tensor_convolution_relations(&i.set.indicator(), &i.companion().indicator(), 2)
}

fn ev_tensor_c(i: &Input) -> Result<Vec<Relation>> {
    let (fs, _) = families(i);
    Ok(vec![identities::tensor_c_relation(&fs[..2], 2)?, identities::tensor_c_relation(&fs[..3], 2)?])
}

fn ev_duality(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    Ok(vec![
        dual::duality_identity(a, &autocorrelation(a), &i.weight()),
        dual::duality_identity(a, &i.weight(), &i.companion().indicator()),
    ])
}

fn ev_triangle(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let d = a.diffset(a)?.indicator_real();
    Ok(vec![
        spectral::triangle_relation(a, &d, &d)?,
        spectral::triangle_relation(a, &real(&autocorrelation(a)), &real(&i.weight()))?,
    ])
}

fn ev_mean_identities(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let mut out = only(spectral::mean_identities(a, &real(&autocorrelation(a)))?, Comparison::Equal);
    out.extend(only(spectral::mean_identities(a, &real(&i.weight()))?, Comparison::Equal));
    Ok(out)
}

fn ev_mean_bounds(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let mut out = only(spectral::mean_identities(a, &real(&autocorrelation(a)))?, Comparison::AtMost);
    out.extend(only(spectral::mean_identities(a, &real(&i.weight()))?, Comparison::AtMost));
    Ok(out)
}

fn ev_spectral_audit(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let b = i.companion();
    let w = real(&i.weight());
    let conv = crate::convolution::set_convolution(a, a)?.to_real();
    let ops = [
        build_symmetric(OperatorKind::SymDifference, a, &real(&autocorrelation(a)))?,
        build_symmetric(OperatorKind::SymDifference, a, &w)?,
        build_symmetric(OperatorKind::SymSum, a, &conv)?,
        build_operator(OperatorKind::Difference, a, &b, &w)?,
        build_operator(OperatorKind::Sum, a, &b, &conv)?,
    ];
    let mut out = Vec::new();
    for op in &ops {
        let dec = op.decompose()?;
        out.extend(spectral::audit(op, &dec));
        if !op.kind.is_symmetric() {
            out.extend(spectral::gram_identities(op));
        }
    }
    out.push(spectral::rect_vs_symmetric(a, &w)?);
    Ok(out)
}

fn ev_rank_one(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let b = i.companion();
    let mut out = Vec::new();
    for sum in [false, true] {
        out.extend(spectral::rank_one_relations(a, &b, sum)?);
        out.extend(spectral::symmetric_rank_one_relations(a, sum)?);
    }
    Ok(out)
}

fn ev_tensor_operator(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    Ok(vec![
        spectral::tensor_operator_relation(a, &real(&autocorrelation(a)), 2)?,
        spectral::tensor_operator_relation(a, &real(&i.weight()), 2)?,
    ])
}

fn ev_perron(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let op = build_symmetric(OperatorKind::SymDifference, a, &real(&autocorrelation(a)))?;
    let mut out = spectral::perron_frobenius_relations(&op.matrix)?;
    out.push(spectral::rayleigh_relation(a)?);
    Ok(out)
}

fn ev_symmetric_sigma(i: &Input) -> Result<Vec<Relation>> {
    let s = i.set.union(&i.set.negate())?;
    Ok(vec![
        Relation::equal("sigma_2 of a symmetric set", sigma_k(&s, 2)?, s.len() as i128),
        Relation::equal("sigma_4 of a symmetric set", sigma_k(&s, 4)?, t_energy(&s, 2)?),
        Relation::equal("sigma_6 of a symmetric set", sigma_k(&s, 6)?, t_energy(&s, 3)?),
    ])
}

fn ev_energy_basic(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let n = a.len() as i128;
    let e = energy(a);
    let mut out = vec![
        Relation::equal("first moment", energy_moment_int(a, 1), n * n),
        Relation::at_most("energy at least |A|^2", n * n, e),
        Relation::at_most("energy at most |A|^3", e, n.pow(3)),
        Relation::at_most("Cauchy–Schwarz with the difference set", n.pow(4), e * a.diffset(a)?.len() as i128),
    ];
    for k in 2..=3usize {
        let ka = a.iterated_sumset(k, 0).len() as i128;
        out.push(Relation::at_most(format!("T_{k} against |{k}A|"), n.pow(2 * k as u32), t_energy(a, k)? * ka));
    }
    for (s1, s2) in [(1u32, 2u32), (2, 3), (3, 4), (2, 4)] {
        out.push(Relation::at_most(
            format!("E_{s2} against E_{s1}"),
            energy_moment_int(a, s2),
            energy_moment_int(a, s1) * n.pow(s2 - s1),
        ));
    }
    Ok(out)
}

fn ev_three_halves(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let mut out = spectral::three_halves_relations(a, a, &a.indicator_real())?;
    out.extend(spectral::three_halves_relations(a, &i.companion(), &real(&i.weight()))?);
    Ok(out)
}

fn ev_li(i: &Input) -> Result<Vec<Relation>> {
    let mut out = spectral::li_relations(&i.set, &i.set)?;
    out.extend(spectral::li_relations(&i.set, &i.companion())?);
    Ok(out)
}

fn ev_ss2(i: &Input) -> Result<Vec<Relation>> {
    spectral::ss2_relations(&i.set)
}

fn ev_g_bound(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let mut out = spectral::g_bound_relations(a, &real(&autocorrelation(a)))?;
    out.extend(spectral::g_bound_relations(a, &real(&i.weight()))?);
    Ok(out)
}

fn ev_l_infty(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    Ok(vec![
        spectral::l_infty_factor_relation(a, &a.indicator_real())?,
        spectral::l_infty_factor_relation(a, &i.companion().indicator_real())?,
    ])
}

fn ev_mu_energy(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    Ok(vec![
        spectral::mu_energy_relation(a, &real(&autocorrelation(a)))?,
        spectral::mu_energy_relation(a, &real(&i.weight()))?,
    ])
}

fn ev_ek_tk_sigma(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let mut out = Vec::new();
    for d in [dual::popular_difference_set(a, 2)?, a.diffset(a)?, i.companion()] {
        for k in [2, 4] {
            out.extend(structure::ek_tk_sigma_relations(a, &d, k)?);
        }
    }
    Ok(out)
}

fn ev_dual_bounds(k: usize) -> impl Fn(&Input) -> Result<Vec<Relation>> {
    move |i| Ok(dual::dual_bounds_check(&i.set, k)?.1)
}

fn ev_dual_bounds_2(i: &Input) -> Result<Vec<Relation>> {
    ev_dual_bounds(2)(i)
}

fn ev_dual_bounds_3(i: &Input) -> Result<Vec<Relation>> {
    ev_dual_bounds(3)(i)
}

fn ev_popular_pair(i: &Input) -> Result<Vec<Relation>> {
    [2, 3].iter().map(|&k| Ok(dual::pair_relation(&dual::popular_dual_pair(&i.set, k)?))).collect()
}

fn ev_dual_operator(i: &Input) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for k in [2, 3] {
        out.extend(dual::dual_operator_relations(&i.set, &dual::popular_tuple_set(&i.set, k)?)?);
    }
    Ok(out)
}

fn ev_e4_energy(i: &Input) -> Result<Vec<Relation>> {
    Ok(vec![dual::e4_energy_relation(&i.set)?])
}

fn ev_e3_dual(i: &Input) -> Result<Vec<Relation>> {
    dual::e3_dual_check(&i.set)
}

fn ev_regularized(i: &Input) -> Result<Vec<Relation>> {
    dual::regularized_certificates(&i.set, 16)
}

fn profile(i: &Input, alpha: f64) -> Result<dual::ConnectivityProfile> {
    let trials = (i.set.len() > dual::EXHAUSTIVE_CAP).then_some((64, i.seed()));
    dual::connectivity_profile(&i.set, alpha, 0.5, trials)
}

fn ev_connected(i: &Input) -> Result<Vec<Relation>> {
    let p = profile(i, 2.0)?;
    let mut out = dual::connected_corollary_check(&i.set, &p)?;
    if p.mode == ConnectivityMode::Sampled {
        for r in &mut out {
            r.label.push_str(" (sampled connectivity)");
        }
    }
    Ok(out)
}

fn ev_e_s_proposition(i: &Input) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for s in [1.5, 2.0] {
        out.extend(dual::e_s_proposition_check(&i.set, &profile(i, s)?)?);
    }
    Ok(out)
}

fn ev_levels(i: &Input) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    for s in [1.5, 2.0, 3.0] {
        out.extend(structure::level_decompose(&i.set, s)?.relations(&i.set));
    }
    Ok(out)
}

fn ev_bsg(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let b = i.companion();
    let mut out = Vec::new();
    for other in [a.clone(), b] {
        let x = structure::bsg_extract(a, &other)?;
        out.extend(structure::bsg_relations(a, &other, &x));
    }
    Ok(out)
}

fn ev_pipeline_e3(i: &Input) -> Result<Vec<Relation>> {
    Ok(structure::pipeline_e3(&i.set)?.relations)
}

fn ev_pipeline_e4m(i: &Input) -> Result<Vec<Relation>> {
    let mut out = structure::pipeline_e4m(&i.set, 2.0)?.relations;
    out.extend(structure::pipeline_e4m(&i.set, 1.5)?.relations);
    Ok(out)
}

fn ev_pipeline_e4t4(i: &Input) -> Result<Vec<Relation>> {
    Ok(structure::pipeline_e4t4(&i.set)?.relations)
}

fn ev_convex_trace(i: &Input) -> Result<Vec<Relation>> {
    Ok(structure::convex_pipeline_trace(&i.set)?.relations)
}

fn ev_convex_decay(i: &Input) -> Result<Vec<Relation>> {
    structure::decay_profile_check(&i.set, DecayKind::Convex)
}

fn ev_convex_e3(i: &Input) -> Result<Vec<Relation>> {
    let n = i.set.len() as f64;
    Ok(vec![Relation::report("E_3 over |A|^3 log|A|", energy_moment_int(&i.set, 3) as f64, n.powi(3) * n.log2())])
}

fn ev_convex_energy(i: &Input) -> Result<Vec<Relation>> {
    let n = i.set.len() as f64;
    let e = energy(&i.set) as f64;
    Ok(vec![
        Relation::report("E over |A|^{32/13}", e, n.powf(32.0 / 13.0)),
        Relation::report("E over |A|^{32/13} log^{71/65}|A|", e, n.powf(32.0 / 13.0) * n.log2().powf(71.0 / 65.0)),
        Relation::report("E over |A|^{5/2}", e, n.powf(2.5)),
    ])
}

fn nonzero_integers(i: &Input) -> Result<()> {
    if *i.set.group().descriptor() != GroupDescriptor::Integers || i.set.iter().any(|e| e.coords()[0] <= 0) {
        return Err(Error::Precondition("needs positive integers".into()));
    }
    Ok(())
}

fn ev_mult_doubling(i: &Input) -> Result<Vec<Relation>> {
    nonzero_integers(i)?;
    structure::decay_profile_check(&i.set, DecayKind::MultiplicativeDoubling)
}

fn ev_shifted_product(i: &Input) -> Result<Vec<Relation>> {
    nonzero_integers(i)?;
    structure::decay_profile_check(&i.set, DecayKind::ShiftedProduct)
}

fn ev_difference_corollary(i: &Input) -> Result<Vec<Relation>> {
    let mut out = dual::difference_corollary_ratios(&i.set, 1.5)?;
    out.extend(dual::difference_corollary_ratios(&i.set, 2.0)?);
    Ok(out)
}

fn ev_family_shape(i: &Input) -> Result<Vec<Relation>> {
    let spec = i.spec.as_ref().ok_or_else(|| Error::Precondition("needs a generated family".into()))?;
    generators::family_prediction_relations(&spec.generate()?)
}

fn ev_bucket_e3(i: &Input) -> Result<Vec<Relation>> {
    let a = &i.set;
    let d = structure::level_decompose(a, 2.0)?;
    let e3 = energy_moment_int(a, 3) as f64;
    let n = a.len() as f64;
    Ok(vec![Relation::report(
        "energy of the selected bucket",
        n.powi(9) / (e3 * e3),
        energy(d.selected()) as f64 / (d.selected().len() as f64).powi(3).max(1.0) * n.powi(3),
    )])
}

macro_rules! check {
    ($id:expr, $kind:ident, $req:expr, $f:expr, $reference:expr) => {
        CheckDescriptor { check_id: $id, paper_ref: $reference, kind: CheckKind::$kind, requires: $req, evaluate: $f }
    };
}

static REGISTRY: &[CheckDescriptor] = &[
    check!("convolution.multi_scalar", Exact, upto(24), ev_multi_scalar,
        "Σ_x Π_j C_l(f_j)(x) = Σ_y C_k(f_0,…,f_{k-1})(y)^l"),
    check!("convolution.scalar_product", Exact, upto(32), ev_scalar,
        "Σ_x C_l(f_0,…,f_{l-1})(x) C_l(g_0,…,g_{l-1})(x) = Σ_z Π_i (f_i∘g_i)(z)"),
    check!("convolution.sigma_c", Exact, upto(24), ev_sigma_c,
        "Σ_x C_l(f_0)(x) (C_l(f_1)∘…∘C_l(f_{k-1}))(x) = Σ_z (f_0∘…∘f_{k-1})^l(z)"),
    check!("convolution.tensor", Exact, upto(16), ev_tensor,
        "(g∘f)^⊗ = g^⊗∘f^⊗ and (g*f)^⊗ = g^⊗*f^⊗"),
    check!("convolution.tensor_c", Exact, upto(11), ev_tensor_c,
        "C_k(f_0^⊗,…,f_{k-1}^⊗) = C_k(f_0,…,f_{k-1})^⊗"),
    check!("dual.bounds.k2", Explicit, upto(32), ev_dual_bounds_2,
        "(k,c)-dual pair bounds for k = 2: Δ Δ_* ≤ E_k/(c|A|), size and sigma forms, E(A) against E_s(A) on the s-grid"),
    check!("dual.bounds.k3", Explicit, upto(16), ev_dual_bounds_3,
        "(k,c)-dual pair bounds for k = 3: Δ Δ_* ≤ E_k/(c|A|), size, sigma and dual operator forms"),
    check!("dual.connected", Explicit, upto(40), ev_connected,
        "(2,β,γ)-connected A: γE(A)/(32L) ≤ E_{P_1}(A'), c_dd pair bounds, E_s(A) ≥ γ|A|^{1-s/2}E(A)^{s/2}/32"),
    check!("dual.duality_k2", Exact, upto(64), ev_duality,
        "Σ_{x,y} A(x)A(y)g(x-y)C_3(h,A,A)(x,y) = Σ_{x,y} A(x)A(y)h(x-y)C_3(g,A,A)(x,y)"),
    check!("dual.e3_pair", Explicit, upto(48), ev_e3_dual,
        "E_3(A)/2 ≤ Σ_{x∈P} E(A,A_x), E_3(A)/4 ≤ B(P,P_*), E_3(A)^2 ≤ 16 E_3^{P_*}(A) Σ_{x,y∈P} C_3(A)(x,y)^2"),
    check!("dual.e4_energy", Explicit, upto(64), ev_e4_energy,
        "E_4(A) ≥ |A|^5/(2^5 L^{10/3} M^{1/3} K^{7/3}), E(A) = |A|^3/K, T_4(A) = M|A|^7/K^3"),
    check!("dual.e_s_connected", Explicit, upto(40), ev_e_s_proposition,
        "(s,β,γ)-connected A: pair bounds and E_s(A)^2|A|^{s-1} ≤ 2^{6s+1}γ^{-2}L^{s+1}E(A)^{s-1}σ_{P*}^{s-1}σ_P^{3-s}"),
    check!("dual.operator", Exact, upto(32), ev_dual_operator,
        "dual operator entries Σ_{z∈𝒫} A_z(x)A_z(y) ≥ 0, trace σ_𝒫(A), and for k = 2 the factorisation M Mᵀ"),
    check!("dual.popular_pair", Explicit, upto(32), ev_popular_pair,
        "popular pair (P, 𝒫) with c = 1/4: E_k(A)/4 ≤ B_A(P, 𝒫) and E_k(A)/2 ≤ E^P_k(A)"),
    check!("dual.regularized", Explicit, upto(64), ev_regularized,
        "|A'| ≥ |A|/2, μ_0(T^{A∘A}_{A'}) ≤ 2E(A)/|A|, (A'∘A'∘A)(x) on {A∘A ≥ Δ}"),
    check!("energy.basic", Explicit, ANY, ev_energy_basic,
        "E_1 = |A|^2, |A|^2 ≤ E ≤ |A|^3, |A|^4 ≤ E|A-A|, T_k ≥ |A|^{2k}/|kA|, E_{s_2} ≤ E_{s_1}|A|^{s_2-s_1}"),
    check!("energy.convolution_forms", Exact, ANY, ev_energy_forms,
        "E(A,B) = Σ_x (A*B)(x)^2 = Σ_x (A∘B)(x)^2 = Σ_x (A∘A)(x)(B∘B)(x)"),
    check!("energy.delta", Exact, upto(32), ev_delta,
        "E_{k+1}(A,B) = Σ_x (A∘A)(x)(B∘B)(x)^k = Σ C_{k+1}(A,B,…,B)^2 = E(Δ_k(A), B^k)"),
    check!("energy.ek_identity", Exact, upto(16), ev_ek_identity,
        "Σ_{‖s‖=k-1, ‖t‖=l-1} E(A_s, A_t) = E_{k+l}(A)"),
    check!("energy.ek_tk_sigma", Explicit, upto(48), ev_ek_tk_sigma,
        "(σ_D(A)/|A|)^{2k} ≤ E_k(A) T_{k/2}(D) and (E_{3/2}(A)/|A|)^{2k} ≤ E_k(A) T_k(A), k ∈ {2, 4}"),
    check!("energy.symmetric_sigma", Exact, upto(48), ev_symmetric_sigma,
        "A = -A: σ_2(A) = |A|, σ_{2k}(A) = T_k(A)"),
    check!("family.shape", Asymptotic, tagged(&["h-plus-dissociated", "disjoint-subgroup-union"], 256), ev_family_shape,
        "E_s(H∔Λ) ~ |H||A|^s + |A|^2|H|^{s-1}; ⊔H_j: T_t(A) ~ |A|^{2t-1}/K^{t-1}, E_s(A) ~ |A|^{s+1}/K^{s/2}"),
    check!("spectral.audit", Exact, upto(96), ev_spectral_audit,
        "orthonormality, reconstruction, Σμ_j = g(0)|A|, Σμ_j^2 = Σ_x g^2(x)(A∘A)(x), Σ|μ_j|^4 = ‖MMᵀ‖^2, C_3 Gram forms"),
    check!("spectral.eigenfunction_bounds", Explicit, upto(96), ev_g_bound,
        "g ≥ 0: (Σf_0)^2 ≤ |A|, μ_0/‖g‖_∞ ≤ (Σf_0)^2, μ_0^2/‖g‖_2^2 ≤ (Σf_0)^2, ‖f_0‖_∞ ≤ ‖g‖_2/μ_0"),
    check!("spectral.l_infty_factor", Explicit, upto(96), ev_l_infty,
        "g = g_1∘g_1: ‖f_0‖_∞ ≤ ‖g_1‖_2/μ_0^{1/2}"),
    check!("spectral.li", Explicit, upto(64), ev_li,
        "|A|^2 E_{3/2}(B)^2 ≤ E_3(A,B) E(B, A±B) ≤ E_3(A)^{1/3} E_3(B)^{2/3} E(B, A±B)"),
    check!("spectral.mean_bounds", Explicit, upto(96), ev_mean_bounds,
        "g ≥ 0: σ_g(A)^3/|A|^2 ≤ Σ_j μ_j^3⟨f_j,1⟩^2; Carbery: ⟨T1,1⟩^3 ≤ |A|^2 Σ T(x,y)r(x)c(y)"),
    check!("spectral.mean_identities", Exact, upto(96), ev_mean_identities,
        "Σ_j μ_j⟨f_j,1⟩^2 = Σ_x g(x)(A∘A)(x), Σ_j μ_j^2⟨f_j,1⟩^2 = Σ_{x∈A} (g∘A)(x)^2"),
    check!("spectral.mu_energy", Explicit, upto(96), ev_mu_energy,
        "μ_0(T^g_A)^3/(‖g‖_2^2‖g‖_∞) ≤ μ_0(T^{A∘A}_A)"),
    check!("spectral.perron", Explicit, upto(96), ev_perron,
        "nonnegative T^{A∘A}_A: μ_0 ≥ |μ_j|, f_0 ≥ 0; E(A)/|A| ≤ μ_0"),
    check!("spectral.rank_one", Exact, upto(96), ev_rank_one,
        "T^{A-B}_{A,B}, T^{A+B}_{A,B}: λ_0 = (|A||B|)^{1/2}, other singular values zero; T^{A-A}_A: μ_0 = |A|"),
    check!("spectral.ss2", Explicit, upto(64), ev_ss2,
        "|A|^6 ≤ E_3(A) Σ_{x∈A-A} ((A±A)∘(A±A))(x)"),
    check!("spectral.tensor_operator", Exact, upto(22), ev_tensor_operator,
        "spectrum of T^{g^⊗}_{A^t} = t-fold products of the spectrum of T^g_A"),
    check!("spectral.three_halves", Explicit, upto(64), ev_three_halves,
        "|A|^2 σ_ψ(B)^2 ≤ E_3(A,B) σ_{ψ^2}(A-B) and ≤ E_3(A,B) σ_{ψ^2}(A+B)"),
    check!("spectral.triangles", Exact, upto(96), ev_triangle,
        "Σ_{x,y,z∈A} g_1(x-y)g_1(x-z)g_2(y-z) = Σ_j μ_j(T^{g_1}_A)^2 ⟨T^{g_2}_A f_j, f_j⟩"),
    check!("structure.bsg", Explicit, upto(128), ev_bsg,
        "popular-sum graph: |A'| ≥ α|A|/2 for |B| ≤ |A|; |A'+B'| ≪ α^{-5}|A| reported"),
    check!("structure.bucket_energy", Asymptotic, upto(256), ev_bucket_e3,
        "E(D) ≫ |D|^3/M^C for the selected bucket D of A∘A"),
    check!("structure.convex_trace", Explicit, tagged(&["convex"], 256), ev_convex_trace,
        "convex A: E/(4l) ≤ Σ_D|A_s|^2, E/(4l|A|) ≤ μ_0 ≤ ⟨T^{A∘A}f_0,f_0⟩, μ_0^3 ≤ Σ g g (A∘A) C_3, σ ≤ #levels σ_*, σ_* ≤ ΔτE(D,A)"),
    check!("structure.decay_convex", Asymptotic, tagged(&["convex"], 1024), ev_convex_decay,
        "convex A: (A∘A)(x_j) ≪ |A| j^{-1/3}, E_3(A) ≪ |A|^3 log|A|, E(A) ≪ |A|^{5/2}"),
    check!("structure.convex_e3", Asymptotic, tagged(&["convex"], 1024), ev_convex_e3,
        "convex A: E_3(A) ≤ C|A|^3 log|A|"),
    check!("structure.convex_energy", Asymptotic, tagged(&["convex"], 1024), ev_convex_energy,
        "convex A: E(A) ≪ |A|^{32/13} log^{71/65}|A|"),
    check!("structure.difference_corollary", Asymptotic, upto(40), ev_difference_corollary,
        "|A-A| = K|A|: ΔΔ_*^{s-1} ≪ L^{s+1}K^{s-1}E^s/|A|^{2s} and |A|^{3s+1} ≪ K^{2(s-1)}L^{s+1}E^{s-1}σ_P^{s-1}σ_{P*}^{3-s}"),
    check!("structure.levels", Explicit, upto(256), ev_levels,
        "dyadic buckets of A∘A: |D_j|(2^{j-2}|A|/K)^3 ≤ E_3(A), the selected bucket carries 1/l of Σ|A_x|^s"),
    check!("structure.mult_doubling", Asymptotic, tagged(&["integer"], 512), ev_mult_doubling,
        "|AA| = M|A|: (A∘A)(x_j) ≪ (M log M)^{2/3}|A| j^{-1/3}, E(A) ≪ M log M |A|^{5/2}"),
    check!("structure.pipeline_e3", Explicit, upto(256), ev_pipeline_e3,
        "E_3(A) = M|A|^4/K^2 gives A' ⊆ A, |A'| ≫ M^{-10}L^{-15}|A|, |nA'-mA'| ≪ (M^9L^{14})^{6(n+m)}K|A'|"),
    check!("structure.pipeline_e4m", Explicit, upto(128), ev_pipeline_e4m,
        "E_4(A) = M|A|^5/K^3 with E_s(A) = |A|^{s+1}/K^{s-1} gives A' with size and doubling bounds"),
    check!("structure.pipeline_e4t4", Explicit, upto(96), ev_pipeline_e4t4,
        "E_4(A)/2 ≤ νE_{3/2}(A)^2, |A'| ≫ |A|/(MK), E(A') ≫ |A'|^3/M with T_4(A) = M|A|^7/K^3"),
    check!("structure.shifted_product", Asymptotic, tagged(&["integer"], 512), ev_shifted_product,
        "|A(A+1)| = M: popular products |{x : r(x) ≥ τ}| ≪ M^2|A|^2/(|A|τ^3), E^×(A) ≪ M|A|^{3/2}"),
];

pub fn registry() -> &'static [CheckDescriptor] {
    REGISTRY
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_unique_and_sorted() {
        let ids: Vec<&str> = registry().iter().map(|d| d.check_id).collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert!(ids.len() >= 30);
    }

    #[test]
    fn identities_on_0_1_3() {
        let input = Input::from_set("0,1,3", FiniteSet::integers([0, 1, 3]));
        let res = run_suite(Suite::Identities, &[input], None, false).unwrap();
        assert!(res.iter().all(|r| r.pass != Some(false)), "{:?}", res.iter().filter(|r| r.failed()).collect::<Vec<_>>());
        assert!(res.iter().filter(|r| r.pass == Some(true)).count() > 20);
    }

    #[test]
    fn report_round_trips() {
        let input = Input::from_spec(&FamilySpec::parse("h-plus-dissociated:n=3:hdim=3:lambda=0").unwrap()).unwrap();
        let res = run_suite(Suite::All, &[input], Some("spectral.*"), false).unwrap();
        let json = report_json(&res);
        assert_eq!(parse_report_json(&json).unwrap(), res);
        let csv = report_csv(&res).unwrap();
        assert_eq!(parse_report_csv(&csv).unwrap(), res);
        assert_eq!(report_json(&[]), "{\n  \"results\": [],\n  \"version\": 1\n}\n");
        assert!(run_suite(Suite::All, &[], Some("nothing.*"), false).is_err());
    }
}
