//! Dyadic level sets, Balog–Szemerédi–Gowers extraction and the structural pipelines.
//!
//! Logarithms inside asymptotic bound shapes are `lg(x) = max(1, log2 x)`, so that
//! the shapes stay finite when their argument is close to 1.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde_json::{json, Value};

use crate::convolution::{autocorrelation, convolve};
use crate::energy::{energy, energy_moment, energy_moment_int, energy_pair, t_energy};
use crate::error::{cap, Error, Result};
use crate::group::{FiniteSet, GroupDescriptor, GroupElement, GroupFunction};
use crate::linalg::dot;
use crate::relation::Relation;
use crate::spectral::{build_symmetric, OperatorKind};

/// Largest set accepted by [`pipeline_e3`] and [`convex_pipeline_trace`].
pub const E3_PIPELINE_CAP: usize = 512;
/// Largest set accepted by [`pipeline_e4m`].
pub const E4M_PIPELINE_CAP: usize = 256;
/// Largest set accepted by [`pipeline_e4t4`].
pub const E4T4_PIPELINE_CAP: usize = 128;
/// Work limit, in pair additions, for measuring `|nA - mA|`.
pub const GROWTH_WORK_CAP: usize = 40_000_000;

pub(crate) fn lg(x: f64) -> f64 {
    x.log2().max(1.0)
}

/// Dyadic buckets `D_j = {x : 2^{j-2}|A|/K < |A_x| ≤ 2^{j-1}|A|/K}`, with `K`
/// defined by `E_s(A) = |A|^{s+1} / K^{s-1}`.
#[derive(Clone, Debug)]
pub struct LevelDecomposition {
    pub s: f64,
    pub k: f64,
    pub base: f64,
    pub l: usize,
    /// `buckets[j - 1] = D_j`.
    pub buckets: Vec<FiniteSet>,
    /// `Σ_{x ∈ D_j} |A_x|^s`.
    pub masses: Vec<f64>,
    pub j_star: usize,
    pub delta: f64,
    energy_s: f64,
}

impl LevelDecomposition {
    pub fn selected(&self) -> &FiniteSet {
        &self.buckets[self.j_star - 1]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s,
            "K": self.k,
            "base": self.base,
            "l": self.l,
            "j_star": self.j_star,
            "delta": self.delta,
            "bucket_sizes": self.buckets.iter().map(FiniteSet::len).collect::<Vec<_>>(),
            "masses": self.masses,
            "selected": self.selected().to_json(),
        })
    }

    /// Bucket size bounds, the pigeonhole guarantee and the reported size bounds of `D`.
    pub fn relations(&self, a: &FiniteSet) -> Vec<Relation> {
        let n = a.len() as f64;
        let e3 = energy_moment_int(a, 3);
        let mut out = Vec::new();
        let exact = self.s == 2.0;
        let e = energy(a);
        let n2 = (a.len() as i128).pow(2);
        for (idx, d) in self.buckets.iter().enumerate() {
            let j = idx as i32 + 1;
            if exact {
                let lower = (e << j) / 2;
                let lhs = d.len() as i128 * lower.pow(3);
                let rhs = 8 * e3 * n2.pow(3);
                let lhs_exact = (e << (j - 1)).pow(3) * d.len() as i128;
                debug_assert!(lhs <= lhs_exact);
                out.push(Relation::at_most(format!("bucket {j} size"), lhs_exact, rhs));
            } else {
                let lower = 2f64.powi(j - 2) * self.base;
                out.push(Relation::at_most(format!("bucket {j} size"), d.len() as f64 * lower.powi(3), e3 as f64));
            }
        }
        let total: f64 = self.masses.iter().sum();
        out.push(Relation::at_most(
            "selected bucket mass",
            total,
            self.l as f64 * self.masses[self.j_star - 1],
        ));
        out.push(Relation::at_most("buckets carry half the moment", self.energy_s, 2.0 * total));
        let s = self.s;
        if s < 3.0 {
            let m = e3 as f64 * self.k * self.k / n.powi(4);
            let big_l = 2.0 / (3.0 - s) * lg(4.0 * m / (s - 1.0));
            let d = self.selected();
            let r = autocorrelation(a);
            let sig: i128 = d.iter().map(|x| r.get(x)).sum();
            out.push(Relation::report(
                "selected bucket size",
                (s - 1.0) * n * self.k / (big_l * m.powf(s / (3.0 - s))),
                d.len() as f64,
            ));
            out.push(Relation::report(
                "selected bucket autocorrelation mass",
                (s - 1.0) * n * n / (big_l * m.powf((s - 1.0) / (3.0 - s))),
                sig as f64,
            ));
        }
        out
    }
}

/// Buckets of `A ∘ A` for exponent `s > 1`; the selected bucket maximizes `Σ |A_x|^s`.
pub fn level_decompose(a: &FiniteSet, s: f64) -> Result<LevelDecomposition> {
    if a.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    if s <= 1.0 {
        return Err(Error::Precondition("level decomposition needs s > 1".into()));
    }
    let r = autocorrelation(a);
    let n = a.len() as f64;
    let n2 = (a.len() as i128).pow(2);
    let exact = s == 2.0;
    let e = r.sum_of_squares();
    let es = if exact { e as f64 } else { energy_moment(a, s) };
    let k = (n.powf(s + 1.0) / es).powf(1.0 / (s - 1.0));
    let base = if exact { e as f64 / n2 as f64 } else { n / k };
    let bucket_of = |v: i128| -> Option<usize> {
        if exact {
            if 2 * v * n2 <= e {
                return None;
            }
            (1..).find(|&j: &usize| v * n2 <= e << (j - 1))
        } else {
            let v = v as f64;
            if v <= base / 2.0 {
                return None;
            }
            (1..).find(|&j: &usize| v <= base * 2f64.powi(j as i32 - 1))
        }
    };
    let formula_l = (k.log2().ceil().max(0.0) as usize + 1).max(1);
    let entries: Vec<(GroupElement, i128, usize)> =
        r.sorted().into_iter().filter_map(|(x, v)| bucket_of(v).map(|j| (x, v, j))).collect();
    let l = entries.iter().map(|(_, _, j)| *j).max().unwrap_or(1).max(formula_l);
    let mut members = vec![Vec::new(); l];
    let mut masses = vec![0f64; l];
    for (x, v, j) in entries {
        masses[j - 1] += if exact { (v * v) as f64 } else { (v as f64).powf(s) };
        members[j - 1].push(x);
    }
    let mut j_star = 1;
    for j in 1..=l {
        if masses[j - 1] > masses[j_star - 1] {
            j_star = j;
        }
    }
    let buckets = members
        .into_iter()
        .map(|m| FiniteSet::new(a.group().clone(), m))
        .collect::<Result<Vec<_>>>()?;
    Ok(LevelDecomposition {
        s,
        k,
        base,
        l,
        buckets,
        masses,
        j_star,
        delta: base * 2f64.powi(j_star as i32 - 1),
        energy_s: es,
    })
}

/// Output of [`bsg_extract`].
#[derive(Clone, Debug)]
pub struct BsgExtraction {
    pub a: FiniteSet,
    pub b: FiniteSet,
    /// `E(A, B) / |A|^3`.
    pub alpha: f64,
    pub sumset: usize,
    /// The element of `B` whose neighbourhood became `A'`.
    pub anchor: GroupElement,
}

/// Popular-sum graph extraction.
///
/// `a ~ b` when `(A * B)(a + b) ≥ E(A, B) / (2|A||B|)`. `A'` is the neighbourhood of a
/// vertex `b_0 ∈ B` of maximal degree and `B'` the vertices of `B` with at least half the
/// average degree into `A'`. When `|B| ≤ |A|`, `|A'| ≥ α|A|/2`.
pub fn bsg_extract(a: &FiniteSet, b: &FiniteSet) -> Result<BsgExtraction> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    let grp = a.group();
    let r = convolve(&a.indicator(), &b.indicator())?;
    let e = r.sum_of_squares();
    let nab = (a.len() * b.len()) as i128;
    let popular = |x: &GroupElement| 2 * r.get(x) * nab >= e;
    let neighbourhoods: Vec<Vec<GroupElement>> = b
        .elements()
        .par_iter()
        .map(|y| a.iter().filter(|x| popular(&grp.add(x, y))).cloned().collect())
        .collect();
    let mut best = 0;
    for (i, nb) in neighbourhoods.iter().enumerate() {
        if nb.len() > neighbourhoods[best].len() {
            best = i;
        }
    }
    if neighbourhoods[best].is_empty() {
        return Err(Error::Precondition("empty popular graph".into()));
    }
    let a1 = FiniteSet::new(grp.clone(), neighbourhoods[best].clone())?;
    let degrees: Vec<usize> = b
        .iter()
        .map(|y| a1.iter().filter(|x| popular(&grp.add(x, y))).count())
        .collect();
    let edges: usize = degrees.iter().sum();
    let b1 = FiniteSet::new(
        grp.clone(),
        b.iter().zip(&degrees).filter(|(_, &d)| 2 * d * b.len() >= edges).map(|(y, _)| y.clone()).collect(),
    )?;
    let sumset = a1.sumset(&b1)?.len();
    Ok(BsgExtraction {
        a: a1,
        b: b1,
        alpha: e as f64 / (a.len() as f64).powi(3),
        sumset,
        anchor: b.elements()[best].clone(),
    })
}

/// The documented size guarantee and the reported targets of the theorem form.
pub fn bsg_relations(a: &FiniteSet, b: &FiniteSet, out: &BsgExtraction) -> Vec<Relation> {
    let n = a.len() as f64;
    let mut rel = Vec::new();
    if b.len() <= a.len() {
        rel.push(Relation::at_most("half of alpha |A|", out.alpha * n, 2.0 * out.a.len() as f64));
    }
    rel.push(Relation::report("alpha |A|", out.alpha * n, out.a.len() as f64));
    rel.push(Relation::report("alpha |B|", out.alpha * b.len() as f64, out.b.len() as f64));
    rel.push(Relation::report("sumset", out.sumset as f64, out.alpha.powi(-5) * n));
    rel
}

/// `x` maximizing `|(A - x) ∩ D'|` (ties to the smallest `x`) and `A ∩ (D' + x)`.
pub fn translate_intersect(a: &FiniteSet, d1: &FiniteSet) -> Result<(GroupElement, FiniteSet)> {
    let grp = a.group();
    let mut counts: FxHashMap<GroupElement, usize> = FxHashMap::default();
    for x in a.iter() {
        for d in d1.iter() {
            *counts.entry(grp.sub(x, d)).or_default() += 1;
        }
    }
    let (x, _) = counts
        .into_iter()
        .max_by(|(x, c), (y, d)| c.cmp(d).then_with(|| y.cmp(x)))
        .ok_or_else(|| Error::Precondition("empty translate scan".into()))?;
    let shifted = d1.translate(&x);
    let sub = a.intersection(&shifted)?;
    Ok((x, sub))
}

/// A measured `|nA - mA|`, or `None` when the work limit is exceeded.
#[derive(Clone, Debug, PartialEq)]
pub struct Growth {
    pub n: usize,
    pub m: usize,
    pub size: Option<usize>,
}

pub fn measure_growth(a: &FiniteSet, pairs: &[(usize, usize)]) -> Vec<Growth> {
    pairs
        .iter()
        .map(|&(n, m)| {
            let mut acc = FiniteSet::new(a.group().clone(), vec![a.group().zero()]).expect("group zero");
            let neg = a.negate();
            for step in 0..n + m {
                if acc.len() * a.len() > GROWTH_WORK_CAP {
                    return Growth { n, m, size: None };
                }
                acc = acc.sumset(if step < n { a } else { &neg }).expect("same group");
            }
            Growth { n, m, size: Some(acc.len()) }
        })
        .collect()
}

const GROWTH_PAIRS: [(usize, usize); 3] = [(1, 1), (2, 1), (2, 2)];

/// Result of a structural pipeline. Every measured quantity is computed from `A'` itself.
#[derive(Clone, Debug)]
pub struct ExtractionCertificate {
    pub pipeline: &'static str,
    pub input_digest: String,
    pub subset: FiniteSet,
    pub size: usize,
    pub energy: i128,
    pub growth: Vec<Growth>,
    pub parameters: Vec<(&'static str, f64)>,
    pub relations: Vec<Relation>,
}

impl ExtractionCertificate {
    fn new(
        pipeline: &'static str,
        a: &FiniteSet,
        subset: FiniteSet,
        parameters: Vec<(&'static str, f64)>,
    ) -> Self {
        ExtractionCertificate {
            pipeline,
            input_digest: a.digest(),
            size: subset.len(),
            energy: energy(&subset),
            growth: measure_growth(&subset, &GROWTH_PAIRS),
            subset,
            parameters,
            relations: Vec::new(),
        }
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
    }

    pub fn difference_set_size(&self) -> Option<usize> {
        self.growth.iter().find(|g| g.n == 1 && g.m == 1).and_then(|g| g.size)
    }

    fn push_growth_bounds(&mut self, base: f64, k: f64) {
        let size = self.size as f64;
        for g in self.growth.clone() {
            if let Some(v) = g.size {
                self.relations.push(Relation::report(
                    format!("growth {}A'-{}A'", g.n, g.m),
                    v as f64,
                    base.powi(6 * (g.n + g.m) as i32) * k * size,
                ));
            }
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "pipeline": self.pipeline,
            "input_digest": self.input_digest,
            "subset": self.subset.to_json(),
            "size": self.size,
            "energy": self.energy.to_string(),
            "growth": self.growth.iter().map(|g| json!({"n": g.n, "m": g.m, "size": g.size})).collect::<Vec<_>>(),
            "parameters": self.parameters.iter().map(|(k, v)| json!({"name": k, "value": v})).collect::<Vec<_>>(),
            "relations": self.relations.iter().map(Relation::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Shared tail of the `E_3` and `E_4` pipelines: extraction inside `D` and the translate step.
struct BucketExtraction {
    d: FiniteSet,
    d1: FiniteSet,
    mu: f64,
    x: GroupElement,
    subset: FiniteSet,
}

fn extract_from_bucket(a: &FiniteSet, dec: &LevelDecomposition) -> Result<BucketExtraction> {
    let d = dec.selected().clone();
    if d.is_empty() {
        return Err(Error::Precondition("selected bucket is empty".into()));
    }
    let mu = energy(&d) as f64 / (d.len() as f64).powi(3);
    let bsg = bsg_extract(&d, &d)?;
    let d1 = bsg.a;
    let (x, subset) = translate_intersect(a, &d1)?;
    Ok(BucketExtraction { d, d1, mu, x, subset })
}

fn bucket_relations(cert: &mut ExtractionCertificate, ext: &BucketExtraction) {
    let shifted = ext.d1.translate(&ext.x);
    let d_growth = measure_growth(&shifted, &[(1, 1)]);
    if let (Some(a1), Some(d1)) = (cert.difference_set_size(), d_growth[0].size) {
        cert.relations.push(Relation::at_most("difference set inside the extracted bucket", a1 as i128, d1 as i128));
    }
}

/// Skeleton of the `E_3` structure theorem.
pub fn pipeline_e3(a: &FiniteSet) -> Result<ExtractionCertificate> {
    cap("set size", a.len(), E3_PIPELINE_CAP)?;
    let n = a.len() as f64;
    let e = energy(a) as f64;
    let k = n.powi(3) / e;
    let e3 = energy_moment_int(a, 3) as f64;
    let m = e3 * k * k / n.powi(4);
    let dec = level_decompose(a, 2.0)?;
    let ext = extract_from_bucket(a, &dec)?;
    let big_l = lg(m);
    let mut cert = ExtractionCertificate::new(
        "e3",
        a,
        ext.subset.clone(),
        vec![
            ("K", k),
            ("M", m),
            ("mu", ext.mu),
            ("delta", dec.delta),
            ("j_star", dec.j_star as f64),
            ("bucket_size", ext.d.len() as f64),
            ("extracted_size", ext.d1.len() as f64),
        ],
    );
    cert.relations.extend(dec.relations(a));
    bucket_relations(&mut cert, &ext);
    cert.relations.push(Relation::report(
        "bucket energy",
        ext.d.len() as f64 / (m.powi(9) * big_l.powi(14)),
        ext.mu * ext.d.len() as f64,
    ));
    cert.relations.push(Relation::report(
        "translate overlap",
        ext.mu * n / (big_l * m),
        ext.subset.len() as f64,
    ));
    cert.relations.push(Relation::report(
        "size",
        m.powi(-10) * big_l.powi(-15) * n,
        ext.subset.len() as f64,
    ));
    cert.push_growth_bounds(m.powi(9) * big_l.powi(14), k);
    Ok(cert)
}

/// Skeleton of the `E_4` structure theorem, for `s ∈ (1, 4)`.
pub fn pipeline_e4m(a: &FiniteSet, s: f64) -> Result<ExtractionCertificate> {
    cap("set size", a.len(), E4M_PIPELINE_CAP)?;
    if !(s > 1.0 && s < 4.0) {
        return Err(Error::Precondition("needs s ∈ (1, 4)".into()));
    }
    let n = a.len() as f64;
    let dec = level_decompose(a, s)?;
    let k = dec.k;
    let e4 = energy_moment_int(a, 4) as f64;
    let m = e4 * k.powi(3) / n.powi(5);
    let ext = extract_from_bucket(a, &dec)?;
    let mut cert = ExtractionCertificate::new(
        "e4m",
        a,
        ext.subset.clone(),
        vec![
            ("s", s),
            ("K", k),
            ("M", m),
            ("mu", ext.mu),
            ("delta", dec.delta),
            ("j_star", dec.j_star as f64),
            ("bucket_size", ext.d.len() as f64),
            ("extracted_size", ext.d1.len() as f64),
        ],
    );
    cert.relations.extend(dec.relations(a));
    bucket_relations(&mut cert, &ext);
    let size = ext.subset.len() as f64;
    let growth_base = if s >= 1.6 {
        cert.relations.push(Relation::report(
            "size",
            m.powf(-(5.0 * s - 5.0) / (4.0 - s)) * (4.0 - s).powi(6) * lg(m).powi(-6) * n,
            size,
        ));
        m.powf((4.0 * s - 4.0) / (4.0 - s)) * (4.0 - s).powi(-5) * lg(m).powi(5)
    } else {
        let lm = lg(m / (s - 1.0));
        cert.relations.push(Relation::report(
            "size",
            m.powf(-3.0 / (4.0 - s)) * (s - 1.0).powi(6) * lm.powi(-6) * n,
            size,
        ));
        m * (s - 1.0).powi(-5) * lm.powi(5)
    };
    cert.push_growth_bounds(growth_base, k);
    Ok(cert)
}

/// The `E_4`/`T_4` pipeline: shift sets `A_s` with `|A_s| ≥ μ|A|/4`, `E_4 = μ|A|^5`,
/// the pair maximizing `ν = E(A_s, A_t) / (|A_s| |A_t|)^{3/2}`, and the denser of the two.
pub fn pipeline_e4t4(a: &FiniteSet) -> Result<ExtractionCertificate> {
    cap("set size", a.len(), E4T4_PIPELINE_CAP)?;
    if a.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    let r = autocorrelation(a);
    let n = a.len() as f64;
    let n4 = (a.len() as i128).pow(4);
    let e4 = energy_moment_int(a, 4);
    let mu = e4 as f64 / n.powi(5);
    let mut classes: Vec<(FiniteSet, i128)> = Vec::new();
    let mut index: FxHashMap<Vec<GroupElement>, usize> = FxHashMap::default();
    for (x, v) in r.sorted() {
        if 4 * v * n4 < e4 {
            continue;
        }
        let ax = a.shift_intersection(&x);
        match index.get(ax.elements()) {
            Some(&i) => classes[i].1 += 1,
            None => {
                index.insert(ax.elements().to_vec(), classes.len());
                classes.push((ax, 1));
            }
        }
    }
    if classes.is_empty() {
        return Err(Error::Precondition("no qualifying shifts".into()));
    }
    let autos: Vec<GroupFunction<i128>> = classes.par_iter().map(|(s, _)| autocorrelation(s)).collect();
    let pair_energy = |i: usize, j: usize| -> i128 {
        let (x, y) = if autos[i].support_len() <= autos[j].support_len() { (i, j) } else { (j, i) };
        autos[x].iter().map(|(z, v)| v * autos[y].get(z)).sum()
    };
    let rows: Vec<(i128, (f64, usize, usize))> = (0..classes.len())
        .into_par_iter()
        .map(|i| {
            let mut total = 0i128;
            let mut best = (f64::NEG_INFINITY, i, i);
            for j in 0..classes.len() {
                let e = pair_energy(i, j);
                total += classes[i].1 * classes[j].1 * e;
                let size = (classes[i].0.len() * classes[j].0.len()) as f64;
                let nu = e as f64 / size.powf(1.5);
                if nu > best.0 {
                    best = (nu, i, j);
                }
            }
            (total, best)
        })
        .collect();
    let qualifying: i128 = rows.iter().map(|(t, _)| t).sum();
    let mut best = rows[0].1;
    for (_, b) in &rows {
        if b.0 > best.0 {
            best = *b;
        }
    }
    let (nu, i, j) = best;
    let density = |idx: usize| autos[idx].sum_of_squares() as f64 / (classes[idx].0.len() as f64).powi(3);
    let pick = if density(j) > density(i) { j } else { i };
    let subset = classes[pick].0.clone();
    let e32 = energy_moment(a, 1.5);
    let k = (n.powf(2.5) / e32).powi(2);
    let t4 = t_energy(a, 4)? as f64;
    let m = t4 * k.powi(3) / n.powi(7);
    let mut cert = ExtractionCertificate::new(
        "e4t4",
        a,
        subset,
        vec![
            ("K", k),
            ("M", m),
            ("mu", mu),
            ("nu", nu),
            ("qualifying_classes", classes.len() as f64),
        ],
    );
    cert.relations.push(Relation::at_most("qualifying shift pairs carry half of E_4", e4, 2 * qualifying));
    cert.relations.push(Relation::at_most("half of E_4 by nu", e4 as f64, 2.0 * nu * e32 * e32));
    let size = cert.size as f64;
    cert.relations.push(Relation::report("size", n / (m * k), size));
    cert.relations.push(Relation::report("energy", size.powi(3) / m, cert.energy as f64));
    Ok(cert)
}

/// `(E_{3/2}(A)/|A|)^{2k} ≤ E_k(A) T_k(A)` and `(σ_D(A)/|A|)^{2k} ≤ E_k(A) T_{k/2}(D)`, `k` even.
pub fn ek_tk_sigma_relations(a: &FiniteSet, d: &FiniteSet, k: usize) -> Result<Vec<Relation>> {
    if k == 0 || k % 2 == 1 {
        return Err(Error::Precondition("needs an even k".into()));
    }
    let n = a.len() as f64;
    let ek = energy_moment_int(a, k as u32) as f64;
    let tk = t_energy(a, k)? as f64;
    let half = if k == 2 { d.len() as f64 } else { t_energy(d, k / 2)? as f64 };
    let sig = crate::energy::sigma_p(a, d) as f64;
    let kk = 2 * k as i32;
    Ok(vec![
        Relation::at_most("three halves moment", (energy_moment(a, 1.5) / n).powi(kk), ek * tk),
        Relation::at_most("restricted sigma", (sig / n).powi(kk), ek * half),
    ])
}

/// Intermediate quantities of the convex-set energy argument.
#[derive(Clone, Debug)]
pub struct ConvexTrace {
    pub size: usize,
    pub energy: i128,
    pub k: f64,
    pub e3: i128,
    pub log: f64,
    pub levels: LevelDecomposition,
    pub mu0: f64,
    pub d_threshold: f64,
    pub sigma: f64,
    /// `σ_*`, read as the level of `A ∘ A` above `d` carrying the most of `σ`.
    pub sigma_star: f64,
    pub tau: f64,
    pub tau_levels: usize,
    pub relations: Vec<Relation>,
}

impl ConvexTrace {
    pub fn to_json(&self) -> Value {
        json!({
            "size": self.size,
            "energy": self.energy.to_string(),
            "K": self.k,
            "E3": self.e3.to_string(),
            "L": self.log,
            "levels": self.levels.to_json(),
            "mu0": self.mu0,
            "d": self.d_threshold,
            "sigma": self.sigma,
            "sigma_star": self.sigma_star,
            "sigma_star_reading": "level of A∘A above d carrying the most of sigma",
            "tau": self.tau,
            "tau_levels": self.tau_levels,
            "relations": self.relations.iter().map(Relation::to_json).collect::<Vec<_>>(),
        })
    }
}

pub fn convex_pipeline_trace(a: &FiniteSet) -> Result<ConvexTrace> {
    cap("set size", a.len(), E3_PIPELINE_CAP)?;
    if a.len() < 2 {
        return Err(Error::Precondition("trace needs |A| ≥ 2".into()));
    }
    let grp = a.group();
    let n = a.len() as f64;
    let r = autocorrelation(a);
    let e = r.sum_of_squares();
    let ef = e as f64;
    let k = n.powi(3) / ef;
    let e3 = energy_moment_int(a, 3);
    let big_l = n.log2();
    let dec = level_decompose(a, 2.0)?;
    let d = dec.selected().clone();
    let delta = dec.delta;
    let l = dec.l as i128;
    let mass: i128 = d.iter().map(|x| r.get(x).pow(2)).sum();
    let n4 = (a.len() as i128).pow(4);
    let mut rel = vec![
        Relation::at_most("bucket mass lower bound", e, 4 * l * mass),
        Relation::at_most(
            "bucket mass upper bound",
            mass * n4,
            d.len() as i128 * (e << (dec.j_star - 1)).pow(2),
        ),
    ];
    let g = GroupFunction::from_pairs(grp.clone(), d.iter().map(|x| (x.clone(), r.get(x) as f64)));
    let t1 = build_symmetric(OperatorKind::SymDifference, a, &g)?;
    let dec1 = t1.decompose()?;
    let mu0 = dec1.main_value();
    let f0: Vec<f64> = {
        let v = dec1.main_vector();
        let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        v.iter().map(|x| sign * x).collect()
    };
    let t3 = build_symmetric(OperatorKind::SymDifference, a, &r.to_real())?;
    rel.push(Relation::at_most("main eigenvalue lower bound", ef / (4.0 * l as f64 * n), mu0));
    rel.push(Relation::at_most("domination by autocorrelation operator", mu0, dot(&t3.matrix.matvec(&f0), &f0)));
    let xs = a.elements();
    let size = xs.len();
    let d_thr = ef * ef / (32.0 * big_l * big_l * n.powi(3) * (e3 as f64).sqrt());
    let (tri, tri_cut): (f64, f64) = (0..size)
        .into_par_iter()
        .map(|i| {
            let u: Vec<f64> = (0..size).map(|j| t1.matrix[(i, j)]).collect();
            let mut full = 0.0;
            let mut cut = 0.0;
            for y in 0..size {
                if u[y] == 0.0 {
                    continue;
                }
                for z in 0..size {
                    let w = t3.matrix[(y, z)];
                    let term = u[y] * u[z] * w;
                    full += term;
                    if w >= d_thr {
                        cut += term;
                    }
                }
            }
            (full, cut)
        })
        .reduce(|| (0.0, 0.0), |p, q| (p.0 + q.0, p.1 + q.1));
    rel.push(Relation::at_most("triangle bound", mu0.powi(3), tri).with_scale(tri));
    rel.push(Relation::report("triangle sum above d", mu0.powi(3) / 2.0, tri_cut));
    let shifts: Vec<(GroupElement, i128)> = r.sorted().into_iter().filter(|(_, v)| *v as f64 >= d_thr).collect();
    let weights: Vec<f64> = shifts
        .par_iter()
        .map(|(u, _)| {
            d.iter()
                .filter(|al| d.contains(&grp.sub(al, u)))
                .map(|al| r.get(al) as f64)
                .sum()
        })
        .collect();
    let level_of = |v: f64| -> i32 { (v / d_thr).log2().ceil().max(0.0) as i32 };
    let mut per_level: FxHashMap<i32, (f64, Vec<GroupElement>)> = FxHashMap::default();
    let mut sigma = 0.0;
    for ((u, v), w) in shifts.iter().zip(&weights) {
        let term = (*v as f64).powi(2) * w;
        sigma += term;
        let entry = per_level.entry(level_of(*v as f64)).or_default();
        entry.0 += term;
        entry.1.push(u.clone());
    }
    let mut levels: Vec<(i32, f64, Vec<GroupElement>)> =
        per_level.into_iter().map(|(i, (s, m))| (i, s, m)).collect();
    levels.sort_by_key(|x| x.0);
    let nonempty = levels.len();
    let best = levels
        .iter()
        .fold(None::<&(i32, f64, Vec<GroupElement>)>, |b, x| match b {
            Some(bb) if bb.1 >= x.1 => Some(bb),
            _ => Some(x),
        })
        .cloned()
        .unwrap_or((0, 0.0, vec![]));
    let (i_best, sigma_star, s_members) = best;
    let tau = d_thr * 2f64.powi(i_best);
    let s_tau = FiniteSet::new(grp.clone(), s_members)?;
    rel.push(Relation::report("sixth power of main eigenvalue", mu0.powi(6), n.powi(3) * big_l * delta.powi(3) * sigma));
    rel.push(Relation::at_most("sigma by its largest level", sigma, nonempty as f64 * sigma_star));
    let e_da = energy_pair(&d, a)? as f64;
    rel.push(Relation::at_most("sigma star by energy of D and A", sigma_star, delta * tau * e_da));
    let ds: f64 = d.elements()
        .par_iter()
        .map(|y| s_tau.iter().map(|s| r.get(&grp.sub(s, y)) as f64).sum::<f64>())
        .sum();
    rel.push(Relation::at_most("sigma star by correlation with the level set", sigma_star, tau * tau * ds));
    let dn = d.len() as f64;
    rel.push(Relation::report("sigma star, first shape", sigma_star, delta * tau * n * dn.powf(1.5)));
    rel.push(Relation::report("sigma star, second shape", sigma_star, tau.powf(-0.25) * n.powf(3.25) * dn.powf(0.75)));
    rel.push(Relation::report("level set size", s_tau.len() as f64, n.powi(3) / tau.powi(3)));
    rel.push(Relation::report("sigma star, optimized", sigma_star, delta.powf(0.2) * n.powf(2.8) * dn.powf(0.9)));
    rel.push(Relation::report(
        "final exponent form",
        (ef / (n * big_l)).powf(5.1),
        n.powf(29.0 / 5.0 + 0.9) * big_l * big_l * delta.powf(1.4),
    ));
    rel.push(Relation::report("energy", ef, n.powf(32.0 / 13.0) * big_l.powf(71.0 / 65.0)));
    Ok(ConvexTrace {
        size: a.len(),
        energy: e,
        k,
        e3,
        log: big_l,
        levels: dec,
        mu0,
        d_threshold: d_thr,
        sigma,
        sigma_star,
        tau,
        tau_levels: nonempty,
        relations: rel,
    })
}

/// Which decay profile [`decay_profile_check`] fits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayKind {
    Convex,
    MultiplicativeDoubling,
    ShiftedProduct,
}

fn integer_values(a: &FiniteSet) -> Result<Vec<i64>> {
    if *a.group().descriptor() != GroupDescriptor::Integers {
        return Err(Error::Precondition("profile needs a subset of Z".into()));
    }
    Ok(a.iter().map(|x| x.coords()[0]).collect())
}

fn product_counts(xs: &[i64], ys: &[i64]) -> Result<FxHashMap<i128, i128>> {
    let mut out: FxHashMap<i128, i128> = FxHashMap::default();
    for &x in xs {
        for &y in ys {
            *out.entry(x as i128 * y as i128).or_default() += 1;
        }
    }
    Ok(out)
}

/// Sorted-profile constants; ratios only.
pub fn decay_profile_check(a: &FiniteSet, kind: DecayKind) -> Result<Vec<Relation>> {
    let n = a.len() as f64;
    let r = autocorrelation(a);
    let mut vals: Vec<i128> = r.iter().map(|(_, &v)| v).collect();
    vals.sort_unstable_by(|x, y| y.cmp(x));
    let fit = |vals: &[i128], scale: f64| -> f64 {
        vals.iter()
            .enumerate()
            .map(|(j, &v)| v as f64 * ((j + 1) as f64).cbrt() / scale)
            .fold(0.0, f64::max)
    };
    let e = energy(a) as f64;
    match kind {
        DecayKind::Convex => {
            let conv = convolve(&a.indicator(), &a.indicator())?;
            let mut cv: Vec<i128> = conv.iter().map(|(_, &v)| v).collect();
            cv.sort_unstable_by(|x, y| y.cmp(x));
            Ok(vec![
                Relation::report("autocorrelation decay constant", fit(&vals, n), 1.0),
                Relation::report("convolution decay constant", fit(&cv, n), 1.0),
                Relation::report("third moment", energy_moment_int(a, 3) as f64, n.powi(3) * n.log2()),
                Relation::report("energy", e, n.powf(2.5)),
            ])
        }
        DecayKind::MultiplicativeDoubling => {
            let xs = integer_values(a)?;
            let m = product_counts(&xs, &xs)?.len() as f64 / n;
            let ml = m * lg(m);
            Ok(vec![
                Relation::report("autocorrelation decay constant", fit(&vals, ml.powf(2.0 / 3.0) * n), 1.0),
                Relation::report("energy", e, ml * n.powf(2.5)),
            ])
        }
        DecayKind::ShiftedProduct => {
            let xs = integer_values(a)?;
            let shifted: Vec<i64> = xs.iter().map(|x| x.checked_add(1).expect("overflow")).collect();
            let m = product_counts(&xs, &shifted)?.len() as f64;
            let reps = product_counts(&xs, &xs)?;
            let mut counts: Vec<i128> = reps.values().copied().collect();
            counts.sort_unstable_by(|x, y| y.cmp(x));
            let mut constant: f64 = 0.0;
            for (idx, &tau) in counts.iter().enumerate() {
                if idx + 1 < counts.len() && counts[idx + 1] == tau {
                    continue;
                }
                let t = tau as f64;
                constant = constant.max((idx + 1) as f64 * n * t.powi(3) / (m * m * n * n));
            }
            let em = crate::energy::multiplicative_energy_int(a, a)? as f64;
            Ok(vec![
                Relation::report("popular product count constant", constant, 1.0),
                Relation::report("multiplicative energy", em, m * n.powf(1.5)),
            ])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn buckets_of_0_1_3() {
        let a = FiniteSet::integers([0, 1, 3]);
        let dec = level_decompose(&a, 2.0).unwrap();
        assert!((dec.k - 1.8).abs() < 1e-12);
        assert_eq!(dec.buckets[0].len(), 6);
        assert_eq!(dec.buckets[1].len(), 1);
        assert_eq!(dec.j_star, 2);
        assert_eq!(dec.masses, vec![6.0, 9.0]);
        assert!(dec.relations(&a).iter().all(|r| r.passes() != Some(false)));
    }

    #[test]
    fn subgroup_is_a_single_bucket_and_recovered() {
        let g = Group::cube(4).unwrap();
        let h = FiniteSet::from_scalars(g, 0..16).unwrap();
        let dec = level_decompose(&h, 2.0).unwrap();
        assert_eq!(dec.selected(), &h);
        assert_eq!(dec.buckets.iter().filter(|b| !b.is_empty()).count(), 1);
        let bsg = bsg_extract(&h, &h).unwrap();
        assert_eq!(bsg.a, h);
        assert_eq!(bsg.sumset, 16);
        for cert in [pipeline_e3(&h).unwrap(), pipeline_e4t4(&h).unwrap(), pipeline_e4m(&h, 2.0).unwrap()] {
            assert_eq!(cert.subset, h);
            assert_eq!(cert.energy, 4096);
            assert!(cert.relations.iter().all(|r| r.passes() != Some(false)), "{:?}", cert.relations);
        }
    }

    #[test]
    fn translate_picks_best_overlap() {
        let a = FiniteSet::integers([10, 11, 12, 40]);
        let d = FiniteSet::integers([0, 1, 2]);
        let (x, sub) = translate_intersect(&a, &d).unwrap();
        assert_eq!(x, GroupElement::scalar(10));
        assert_eq!(sub, FiniteSet::integers([10, 11, 12]));
    }

    #[test]
    fn growth_of_interval() {
        let a = FiniteSet::integers(0..5);
        let g = measure_growth(&a, &GROWTH_PAIRS);
        assert_eq!(g.iter().map(|g| g.size.unwrap()).collect::<Vec<_>>(), vec![9, 13, 17]);
    }
}
