//! Deterministic example families.
//!
//! A [`FamilySpec`] is written either as JSON or in the compact form
//! `tag:key=value:key=value`, for example `convex:kind=squares:n=64` or
//! `h-plus-dissociated:n=12:hdim=6:lambda=6:mode=union:seed=3`.

use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteSet, Group, GroupDescriptor, GroupElement, GroupRef};

/// Largest prime accepted by [`gen_mult_subgroup`].
pub const PRIME_CAP: u64 = 1_000_000;
/// Largest set checked by [`is_dissociated_cube`].
pub const DISSOCIATED_CHECK_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ConvexKind {
    Squares,
    Power { alpha: f64 },
    RandomGaps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumMode {
    /// `H ⊔ Λ`.
    Union,
    /// `H ∔ Λ = {h + λ}`.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum Family {
    Convex { convex: ConvexKind, n: usize },
    MultSubgroup { p: u64, d: u64 },
    HPlusDissociated { n: u32, hdim: u32, lambda: u32, mode: SumMode },
    DisjointSubgroups { n: u32, k: u32, hdim: u32 },
    CyclicSubgroup { modulus: u64, order: u64 },
    Ap { n: usize, start: i64, step: i64, group: GroupDescriptor },
    Random { group: GroupDescriptor, n: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
}

/// A generated set with its property tags and named components.
#[derive(Clone, Debug)]
pub struct Generated {
    pub spec: FamilySpec,
    pub set: FiniteSet,
    pub tags: Vec<&'static str>,
    pub components: Vec<(String, FiniteSet)>,
}

impl Generated {
    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| *t == tag)
    }

    pub fn component(&self, name: &str) -> Option<&FiniteSet> {
        self.components.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

pub fn group_kind_tag(d: &GroupDescriptor) -> &'static str {
    match d {
        GroupDescriptor::Integers => "integer",
        GroupDescriptor::Cyclic { .. } => "cyclic",
        GroupDescriptor::Cube { .. } => "cube",
        GroupDescriptor::Product { .. } => "product",
    }
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        FamilySpec { family, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            return serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()));
        }
        let mut parts = text.split(':');
        let tag = parts.next().unwrap_or_default();
        let mut kv = Vec::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got `{p}`")))?;
            kv.push((k.trim(), v.trim()));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
        fn num<T: std::str::FromStr>(key: &str, v: Option<&str>) -> Result<T> {
            v.ok_or_else(|| Error::Parse(format!("missing `{key}`")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for `{key}`")))
        }
        let opt = |key: &str, default: &str| -> String { get(key).unwrap_or(default).to_string() };
        let family = match tag {
            "convex" => {
                let convex = match opt("kind", "squares").as_str() {
                    "squares" => ConvexKind::Squares,
                    "power" => ConvexKind::Power { alpha: num("alpha", get("alpha"))? },
                    "random-gaps" => ConvexKind::RandomGaps,
                    other => return Err(Error::Parse(format!("unknown convex kind `{other}`"))),
                };
                Family::Convex { convex, n: num("n", get("n"))? }
            }
            "mult-subgroup" => Family::MultSubgroup { p: num("p", get("p"))?, d: num("d", get("d"))? },
            "h-plus-dissociated" => Family::HPlusDissociated {
                n: num("n", get("n"))?,
                hdim: num("hdim", get("hdim"))?,
                lambda: num("lambda", get("lambda"))?,
                mode: match opt("mode", "union").as_str() {
                    "union" => SumMode::Union,
                    "direct" => SumMode::Direct,
                    other => return Err(Error::Parse(format!("unknown mode `{other}`"))),
                },
            },
            "disjoint-subgroups" => Family::DisjointSubgroups {
                n: num("n", get("n"))?,
                k: num("k", get("k"))?,
                hdim: num("hdim", get("hdim"))?,
            },
            "cyclic-subgroup" => Family::CyclicSubgroup {
                modulus: num("modulus", get("modulus"))?,
                order: num("order", get("order"))?,
            },
            "ap" => Family::Ap {
                n: num("n", get("n"))?,
                start: num("start", Some(get("start").unwrap_or("0")))?,
                step: num("step", Some(get("step").unwrap_or("1")))?,
                group: GroupDescriptor::parse(&opt("group", "Z"))?,
            },
            "random" => Family::Random {
                group: GroupDescriptor::parse(&opt("group", "Z"))?,
                n: num("n", get("n"))?,
            },
            other => return Err(Error::Parse(format!("unknown family `{other}`"))),
        };
        let seed = match get("seed") {
            Some(s) => s.parse().map_err(|_| Error::Parse("bad seed".into()))?,
            None => 0,
        };
        Ok(FamilySpec { family, seed })
    }

    pub fn generate(&self) -> Result<Generated> {
        let seed = self.seed;
        let (set, mut tags, components): (FiniteSet, Vec<&'static str>, Vec<(String, FiniteSet)>) = match &self.family {
            Family::Convex { convex, n } => (gen_convex(*convex, *n, seed)?, vec!["convex"], vec![]),
            Family::MultSubgroup { p, d } => (gen_mult_subgroup(*p, *d)?, vec!["multiplicative-subgroup"], vec![]),
            Family::HPlusDissociated { n, hdim, lambda, mode } => {
                let g = gen_h_plus_dissociated(*n, *hdim, *lambda, *mode)?;
                let mut t = vec!["h-plus-dissociated"];
                if *lambda == 0 {
                    t.push("subgroup");
                }
                (g.set, t, g.components)
            }
            Family::DisjointSubgroups { n, k, hdim } => {
                let g = gen_disjoint_subgroup_union(*n, *k, *hdim)?;
                let mut t = vec!["disjoint-subgroup-union"];
                if *k == 1 {
                    t.push("subgroup");
                }
                (g.set, t, g.components)
            }
            Family::CyclicSubgroup { modulus, order } => {
                (gen_cyclic_subgroup(*modulus, *order)?, vec!["subgroup"], vec![])
            }
            Family::Ap { n, start, step, group } => (gen_ap(group, *n, *start, *step)?, vec!["ap"], vec![]),
            Family::Random { group, n } => (gen_random(group, *n, seed)?, vec!["random"], vec![]),
        };
        tags.push(group_kind_tag(set.group().descriptor()));
        tags.sort_unstable();
        Ok(Generated { spec: self.clone(), set, tags, components })
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Convex { convex, n } => match convex {
                ConvexKind::Squares => write!(f, "convex:kind=squares:n={n}"),
                ConvexKind::Power { alpha } => write!(f, "convex:kind=power:alpha={alpha}:n={n}"),
                ConvexKind::RandomGaps => write!(f, "convex:kind=random-gaps:n={n}"),
            },
            Family::MultSubgroup { p, d } => write!(f, "mult-subgroup:p={p}:d={d}"),
            Family::HPlusDissociated { n, hdim, lambda, mode } => {
                let m = if *mode == SumMode::Union { "union" } else { "direct" };
                write!(f, "h-plus-dissociated:n={n}:hdim={hdim}:lambda={lambda}:mode={m}")
            }
            Family::DisjointSubgroups { n, k, hdim } => write!(f, "disjoint-subgroups:n={n}:k={k}:hdim={hdim}"),
            Family::CyclicSubgroup { modulus, order } => write!(f, "cyclic-subgroup:modulus={modulus}:order={order}"),
            Family::Ap { n, start, step, group } => write!(f, "ap:n={n}:start={start}:step={step}:group={group}"),
            Family::Random { group, n } => write!(f, "random:group={group}:n={n}"),
        }?;
        write!(f, ":seed={}", self.seed)
    }
}

/// Strictly increasing consecutive gaps.
pub fn is_convex(xs: &[i64]) -> bool {
    xs.windows(3).all(|w| w[1] > w[0] && w[1] - w[0] < w[2] - w[1]) && xs.windows(2).all(|w| w[0] < w[1])
}

fn convex_values(kind: ConvexKind, n: usize, seed: u64) -> Result<Vec<i64>> {
    match kind {
        ConvexKind::Squares => (1..=n as i64)
            .map(|i| i.checked_mul(i).ok_or_else(|| Error::Precondition("overflow".into())))
            .collect(),
        ConvexKind::Power { alpha } => {
            if !alpha.is_finite() {
                return Err(Error::Precondition("alpha must be finite".into()));
            }
            for e in 0..40 {
                let scale = (1u64 << e) as f64;
                let xs: Vec<f64> = (1..=n).map(|i| (i as f64).powf(alpha) * scale).collect();
                if xs.iter().any(|x| *x >= 9.0e15) {
                    break;
                }
                let xs: Vec<i64> = xs.iter().map(|x| x.round() as i64).collect();
                if is_convex(&xs) {
                    return Ok(xs);
                }
            }
            Err(Error::Precondition(format!("power {alpha} does not give strictly increasing gaps")))
        }
        ConvexKind::RandomGaps => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut xs = Vec::with_capacity(n);
            let (mut x, mut gap) = (0i64, 0i64);
            for _ in 0..n {
                xs.push(x);
                gap += 1 + rng.gen_range(0..4);
                x += gap;
            }
            Ok(xs)
        }
    }
}

pub fn gen_convex(kind: ConvexKind, n: usize, seed: u64) -> Result<FiniteSet> {
    if n < 3 {
        return Err(Error::Precondition("convex families need n ≥ 3".into()));
    }
    let xs = convex_values(kind, n, seed)?;
    if !is_convex(&xs) {
        return Err(Error::Precondition("generated sequence is not convex".into()));
    }
    Ok(FiniteSet::integers(xs))
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Smallest generator of `(Z/p)^*`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) || p > PRIME_CAP {
        return Err(Error::Precondition(format!("{p} is not a prime ≤ {PRIME_CAP}")));
    }
    if p == 2 {
        return Ok(1);
    }
    let fs = prime_factors(p - 1);
    (2..p)
        .find(|&g| fs.iter().all(|q| pow_mod(g, (p - 1) / q, p) != 1))
        .ok_or_else(|| Error::Precondition("no primitive root".into()))
}

/// The subgroup of index `d` in `(Z/p)^*`, as a subset of `Z/p`.
pub fn gen_mult_subgroup(p: u64, d: u64) -> Result<FiniteSet> {
    let g = primitive_root(p)?;
    if d == 0 || (p - 1) % d != 0 {
        return Err(Error::Precondition(format!("{d} does not divide {}", p - 1)));
    }
    let h = pow_mod(g, d, p);
    let order = (p - 1) / d;
    let mut xs = Vec::with_capacity(order as usize);
    let mut x = 1u64;
    for _ in 0..order {
        xs.push(x as i64);
        x = x * h % p;
    }
    let set = FiniteSet::from_scalars(Group::cyclic(p)?, xs)?;
    let members: FxHashSet<i64> = set.iter().map(|e| e.coords()[0]).collect();
    if set.len() as u64 != order || !members.iter().all(|&y| members.contains(&((y as u64 * h % p) as i64))) {
        return Err(Error::Precondition("multiplicative closure failed".into()));
    }
    Ok(set)
}

/// Rank over `F2` of a list of bit vectors.
pub fn f2_rank(vectors: &[u64]) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for &v in vectors {
        let mut v = v;
        for bit in (0..64).rev() {
            if v >> bit & 1 == 0 {
                continue;
            }
            if basis[bit] == 0 {
                basis[bit] = v;
                rank += 1;
                break;
            }
            v ^= basis[bit];
        }
    }
    rank
}

/// Span of the given bit vectors, in canonical order.
pub fn f2_span(group: &GroupRef, basis: &[u64]) -> Result<FiniteSet> {
    let mut xs = vec![0u64];
    for &b in basis {
        let more: Vec<u64> = xs.iter().map(|x| x ^ b).collect();
        xs.extend(more);
    }
    FiniteSet::new(group.clone(), xs.into_iter().map(|x| GroupElement::scalar(x as i64)).collect())
}

/// All `2^|Λ|` subset sums are distinct. Capped at [`DISSOCIATED_CHECK_CAP`] elements.
pub fn is_dissociated_cube(lambda: &FiniteSet) -> Result<bool> {
    if !matches!(lambda.group().descriptor(), GroupDescriptor::Cube { .. }) {
        return Err(Error::Precondition("dissociativity check needs a boolean cube".into()));
    }
    if lambda.len() > DISSOCIATED_CHECK_CAP {
        return Err(Error::CapExceeded { what: "dissociated set size", limit: DISSOCIATED_CHECK_CAP, actual: lambda.len() });
    }
    let vs: Vec<u64> = lambda.iter().map(|e| e.coords()[0] as u64).collect();
    let mut seen = FxHashSet::default();
    for mask in 0u32..1 << vs.len() {
        let s = vs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0u64, |a, (_, v)| a ^ v);
        if !seen.insert(s) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A cube family with its named components.
pub struct CubeFamily {
    pub set: FiniteSet,
    pub components: Vec<(String, FiniteSet)>,
}

/// `H = span(e_0, …, e_{hdim-1})` and `Λ = {e_hdim, …, e_{hdim+λ-1}}` in `F2^n`.
pub fn gen_h_plus_dissociated(n: u32, hdim: u32, lambda: u32, mode: SumMode) -> Result<CubeFamily> {
    if hdim + lambda > n {
        return Err(Error::Precondition(format!("hdim + lambda = {} exceeds dimension {n}", hdim + lambda)));
    }
    let g = Group::cube(n)?;
    let h_basis: Vec<u64> = (0..hdim).map(|i| 1u64 << i).collect();
    let l_vecs: Vec<u64> = (hdim..hdim + lambda).map(|i| 1u64 << i).collect();
    let h = f2_span(&g, &h_basis)?;
    let l = FiniteSet::new(g.clone(), l_vecs.iter().map(|&v| GroupElement::scalar(v as i64)).collect())?;
    let all: Vec<u64> = h_basis.iter().chain(&l_vecs).copied().collect();
    if f2_rank(&all) != all.len() {
        return Err(Error::Precondition("Λ is not independent of H".into()));
    }
    let set = match mode {
        SumMode::Union => h.union(&l)?,
        SumMode::Direct if lambda == 0 => h.clone(),
        SumMode::Direct => h.sumset(&l)?,
    };
    Ok(CubeFamily { set, components: vec![("H".into(), h), ("Lambda".into(), l)] })
}

/// `A = H_1 ∪ … ∪ H_k` for totally disjoint subspaces of dimension `hdim`.
pub fn gen_disjoint_subgroup_union(n: u32, k: u32, hdim: u32) -> Result<CubeFamily> {
    if k == 0 || k * hdim > n {
        return Err(Error::Precondition(format!("k·hdim = {} exceeds dimension {n}", k * hdim)));
    }
    let bases: Vec<Vec<u64>> =
        (0..k).map(|j| (0..hdim).map(|i| 1u64 << (j * hdim + i)).collect()).collect();
    disjoint_subgroup_union_from(n, &bases)
}

/// Union of the spans of the given bases; rejects families that are not totally disjoint.
pub fn disjoint_subgroup_union_from(n: u32, bases: &[Vec<u64>]) -> Result<CubeFamily> {
    let g = Group::cube(n)?;
    let all: Vec<u64> = bases.iter().flatten().copied().collect();
    if f2_rank(&all) != all.len() {
        return Err(Error::Precondition("subspaces are not totally disjoint".into()));
    }
    let mut set = FiniteSet::empty(g.clone());
    let mut components = Vec::new();
    for (j, b) in bases.iter().enumerate() {
        let h = f2_span(&g, b)?;
        set = set.union(&h)?;
        components.push((format!("H_{}", j + 1), h));
    }
    Ok(CubeFamily { set, components })
}

/// The additive subgroup of `Z/modulus` of the given order.
pub fn gen_cyclic_subgroup(modulus: u64, order: u64) -> Result<FiniteSet> {
    if order == 0 || modulus % order != 0 {
        return Err(Error::Precondition(format!("{order} does not divide {modulus}")));
    }
    let step = (modulus / order) as i64;
    FiniteSet::from_scalars(Group::cyclic(modulus)?, (0..order as i64).map(|i| i * step))
}

pub fn gen_ap(group: &GroupDescriptor, n: usize, start: i64, step: i64) -> Result<FiniteSet> {
    let g = Group::new(group.clone())?;
    if g.rank() != 1 || matches!(group, GroupDescriptor::Cube { .. }) {
        return Err(Error::Precondition("progressions need Z or Z/N".into()));
    }
    let one = |v: i64| -> GroupElement {
        match group {
            GroupDescriptor::Cyclic { modulus } => GroupElement::scalar(v.rem_euclid(*modulus as i64)),
            _ => GroupElement::scalar(v),
        }
    };
    let mut xs = Vec::with_capacity(n);
    let mut x = one(start);
    let d = one(step);
    for _ in 0..n {
        xs.push(x.clone());
        x = g.add(&x, &d);
    }
    FiniteSet::new(g, xs)
}

/// Uniform without replacement; integer coordinates are drawn from `[0, 4n)`.
pub fn gen_random(group: &GroupDescriptor, n: usize, seed: u64) -> Result<FiniteSet> {
    let g = Group::new(group.clone())?;
    let window = (4 * n as u64).max(1);
    let order = g.windowed_order(window);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let els: Vec<GroupElement> = match order {
        Some(total) if total < n as u128 => {
            return Err(Error::Precondition(format!("cannot draw {n} elements from a group of order {total}")))
        }
        Some(total) if total <= 1 << 26 => sample(&mut rng, total as usize, n)
            .into_iter()
            .map(|i| g.element_at(i as u128, window))
            .collect(),
        _ => {
            let mut seen = FxHashSet::default();
            let mut out = Vec::with_capacity(n);
            let bound = order.unwrap_or(u128::MAX);
            while out.len() < n {
                let i = rng.gen_range(0..bound);
                if seen.insert(i) {
                    out.push(g.element_at(i, window));
                }
            }
            out
        }
    };
    FiniteSet::new(g, els)
}

/// Measured statistics against the shapes predicted for the structured cube families.
///
/// `H ∔ Λ`: `E_s(A) ~ |H||A|^s + |A|^2|H|^{s-1}`. `⊔ H_j`: `E_s(A) ~ |A|^{s+1}/K^{s/2}` and
/// `T_t(A) ~ |A|^{2t-1}/K^{t-1}` with `K = k^2`. Other families give no relations.
pub fn family_prediction_relations(g: &Generated) -> Result<Vec<crate::relation::Relation>> {
    use crate::energy::{energy_moment, t_energy};
    use crate::relation::Relation;
    let n = g.set.len() as f64;
    let mut out = Vec::new();
    match g.spec.family {
        Family::HPlusDissociated { hdim, lambda, mode: SumMode::Direct, .. } if lambda > 0 => {
            let h = (1u64 << hdim) as f64;
            for s in [1.5, 2.0, 3.0] {
                let predicted = h * n.powf(s) + n * n * h.powf(s - 1.0);
                out.push(Relation::report(format!("E_{s} against the two-regime shape"), energy_moment(&g.set, s), predicted));
            }
        }
        Family::DisjointSubgroups { k, .. } => {
            let kk = (k * k) as f64;
            for s in [1.5, 2.0, 3.0] {
                out.push(Relation::report(
                    format!("E_{s} against the union shape"),
                    energy_moment(&g.set, s),
                    n.powf(s + 1.0) / kk.powf(s / 2.0),
                ));
            }
            for t in [2usize, 3] {
                out.push(Relation::report(
                    format!("T_{t} against the union shape"),
                    t_energy(&g.set, t)? as f64,
                    n.powi(2 * t as i32 - 1) / kk.powi(t as i32 - 1),
                ));
            }
        }
        _ => {}
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(s: &FiniteSet) -> Vec<i64> {
        s.iter().map(|e| e.coords()[0]).collect()
    }

    #[test]
    fn squares_and_powers() {
        assert_eq!(values(&gen_convex(ConvexKind::Squares, 5, 0).unwrap()), vec![1, 4, 9, 16, 25]);
        assert!(gen_convex(ConvexKind::Power { alpha: 1.0 }, 10, 0).is_err());
        assert!(gen_convex(ConvexKind::Power { alpha: 0.5 }, 10, 0).is_err());
        let p = gen_convex(ConvexKind::Power { alpha: 1.1 }, 40, 0).unwrap();
        assert!(is_convex(&values(&p)));
        let r = gen_convex(ConvexKind::RandomGaps, 50, 9).unwrap();
        assert!(is_convex(&values(&r)));
        assert_eq!(r, gen_convex(ConvexKind::RandomGaps, 50, 9).unwrap());
    }

    #[test]
    fn multiplicative_subgroups() {
        assert_eq!(values(&gen_mult_subgroup(7, 2).unwrap()), vec![1, 2, 4]);
        assert_eq!(values(&gen_mult_subgroup(7, 6).unwrap()), vec![1]);
        assert_eq!(values(&gen_mult_subgroup(13, 3).unwrap()), vec![1, 5, 8, 12]);
        assert_eq!(primitive_root(13).unwrap(), 2);
        assert!(gen_mult_subgroup(15, 2).is_err());
        assert!(gen_mult_subgroup(13, 5).is_err());
    }

    #[test]
    fn cube_families() {
        let h = gen_h_plus_dissociated(4, 2, 0, SumMode::Union).unwrap();
        assert_eq!(values(&h.set), vec![0, 1, 2, 3]);
        let u = gen_h_plus_dissociated(10, 3, 4, SumMode::Union).unwrap();
        assert_eq!(u.set.len(), 12);
        assert!(is_dissociated_cube(&u.components[1].1).unwrap());
        let d = gen_h_plus_dissociated(10, 3, 4, SumMode::Direct).unwrap();
        assert_eq!(d.set.len(), 32);
        assert!(gen_h_plus_dissociated(5, 3, 3, SumMode::Union).is_err());
        let k = gen_disjoint_subgroup_union(9, 3, 3).unwrap();
        assert_eq!(k.set.len(), 3 * 7 + 1);
        let single = gen_disjoint_subgroup_union(3, 1, 3).unwrap();
        assert_eq!(single.set.len(), 8);
        assert!(disjoint_subgroup_union_from(4, &[vec![1, 2], vec![3, 4]]).is_err());
    }

    #[test]
    fn non_dissociated_detected() {
        let g = Group::cube(3).unwrap();
        let s = FiniteSet::from_scalars(g, [1, 2, 3]).unwrap();
        assert!(!is_dissociated_cube(&s).unwrap());
    }

    #[test]
    fn random_sets() {
        let g = GroupDescriptor::cyclic(11);
        assert_eq!(gen_random(&g, 11, 4).unwrap().len(), 11);
        assert!(gen_random(&g, 12, 4).is_err());
        let z = gen_random(&GroupDescriptor::Integers, 30, 1).unwrap();
        assert_eq!(z, gen_random(&GroupDescriptor::Integers, 30, 1).unwrap());
        assert!(z.iter().all(|e| (0..120).contains(&e.coords()[0])));
        let big = gen_random(&GroupDescriptor::cube(40), 20, 2).unwrap();
        assert_eq!(big.len(), 20);
    }

    #[test]
    fn spec_round_trip() {
        for text in [
            "convex:kind=squares:n=64:seed=0",
            "convex:kind=power:alpha=1.5:n=20:seed=0",
            "convex:kind=random-gaps:n=20:seed=7",
            "mult-subgroup:p=13:d=3:seed=0",
            "h-plus-dissociated:n=12:hdim=6:lambda=6:mode=union:seed=0",
            "disjoint-subgroups:n=12:k=3:hdim=4:seed=0",
            "cyclic-subgroup:modulus=12:order=4:seed=0",
            "ap:n=5:start=2:step=3:group=Z/7:seed=0",
            "random:group=Z/97xF2^3:n=20:seed=5",
        ] {
            let spec = FamilySpec::parse(text).unwrap();
            assert_eq!(spec.to_string(), text);
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(FamilySpec::parse(&json).unwrap(), spec);
            let a = spec.generate().unwrap();
            let b = spec.generate().unwrap();
            assert_eq!(a.set.to_json(), b.set.to_json());
        }
        assert!(FamilySpec::parse("nonsense:n=3").is_err());
    }

    #[test]
    fn tags() {
        let g = FamilySpec::parse("h-plus-dissociated:n=4:hdim=4:lambda=0").unwrap().generate().unwrap();
        assert_eq!(g.tags, vec!["cube", "h-plus-dissociated", "subgroup"]);
    }
}
