//! Popular difference sets, dual pairs `(P, 𝒫)`, the regularized subset `A'`
//! and connectedness.
//!
//! The bilinear form of a pair is
//! `B_A(P, 𝒫) = Σ_{x,y} P(x - y) A(x) A(y) Σ_{z ∈ 𝒫} Π_i A(x + z_i) A(y + z_i)`,
//! evaluated as `Σ_{z ∈ 𝒫} Σ_{u ∈ P} (A_z ∘ A_z)(u)` with `A_z = A ∩ (A - z_1) ∩ ...`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};

use crate::convolution::{autocorrelation, set_generalized_convolution, Tuple};
use crate::energy::{dyadic_levels, energy, energy_moment, energy_moment_int, energy_pair, t_energy};
use crate::error::{cap, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupFunction};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::relation::Relation;
use crate::spectral::{main_eigenvalue, raw_operator, OperatorKind, OPERATOR_CAP};

/// Exponents used for the `E(A)` versus `E_s(A)` checks.
pub const S_GRID: [f64; 5] = [1.0, 1.25, 1.5, 1.75, 2.0];
/// Largest set accepted by exhaustive connectivity.
pub const EXHAUSTIVE_CAP: usize = 18;
/// Largest set accepted by [`e3_dual_check`].
pub const E3_DUAL_CAP: usize = 64;

/// A pair `P ⊆ Γ`, `𝒫 ⊆ Γ^{k-1}` with `c E_k(A) ≤ B_A(P, 𝒫)`.
#[derive(Clone, Debug)]
pub struct DualPair {
    pub k: usize,
    pub c: f64,
    pub p: FiniteSet,
    pub tuples: Vec<Tuple>,
    /// Level value of `P`, or the popularity threshold for a popular pair.
    pub delta: f64,
    /// Level value of `𝒫`, or the popularity threshold for a popular pair.
    pub delta_star: f64,
    pub bilinear: i128,
    pub energy: i128,
    /// Number of dyadic levels, and the selected indices (zero for popular pairs).
    pub levels: usize,
    pub i: usize,
    pub j: usize,
}

impl DualPair {
    /// `𝒫` as a subset of `Γ` when `k = 2`.
    pub fn tuple_set(&self) -> Result<FiniteSet> {
        if self.k != 2 {
            return Err(Error::Precondition("tuple set is a subset of Γ only for k = 2".into()));
        }
        FiniteSet::new(self.p.group().clone(), self.tuples.iter().map(|t| t[0].clone()).collect())
    }

    pub fn to_json(&self) -> Value {
        let grp = self.p.group();
        let tuples: Vec<Value> = self
            .tuples
            .iter()
            .map(|t| Value::Array(t.iter().map(|e| grp.element_to_json(e)).collect()))
            .collect();
        json!({
            "k": self.k,
            "c": self.c,
            "P": self.p.to_json(),
            "tuples": tuples,
            "delta": self.delta,
            "delta_star": self.delta_star,
            "bilinear": self.bilinear.to_string(),
            "energy": self.energy.to_string(),
            "levels": self.levels,
            "i": self.i,
            "j": self.j,
        })
    }
}

/// `C_k(A)` on its support, in canonical tuple order.
fn tuple_values(a: &FiniteSet, k: usize) -> Result<Vec<(Tuple, i128)>> {
    match k {
        2 => Ok(autocorrelation(a)
            .sorted()
            .into_iter()
            .map(|(x, v)| (Tuple::from_iter([x]), v))
            .collect()),
        3 => Ok(set_generalized_convolution(a, 3)?.sorted()),
        _ => Err(Error::Precondition("tuple sets are supported for k ∈ {2, 3}".into())),
    }
}

/// `Σ_{x,y ∈ S} P(x - y)` for a set `S`.
fn pairs_in(s: &FiniteSet, p: &FiniteSet) -> i128 {
    let grp = s.group();
    let mut n = 0i128;
    if p.len() < s.len() {
        for x in s.iter() {
            for u in p.iter() {
                if s.contains(&grp.sub(x, u)) {
                    n += 1;
                }
            }
        }
    } else {
        for x in s.iter() {
            for y in s.iter() {
                if p.contains(&grp.sub(x, y)) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// `B_A(P, 𝒫)`.
pub fn bilinear_form(a: &FiniteSet, p: &FiniteSet, tuples: &[Tuple]) -> i128 {
    tuples.par_iter().map(|z| pairs_in(&a.iterated_intersection(z), p)).sum()
}

/// `Σ_{x,y} A(x) A(y) g(x - y) C_3(h, A, A)(x, y)`.
pub fn weighted_bilinear(a: &FiniteSet, g: &GroupFunction<i128>, h: &GroupFunction<i128>) -> i128 {
    let grp = a.group();
    h.sorted()
        .into_iter()
        .map(|(z, hz)| {
            let az = a.shift_intersection(&z);
            let mut s = 0i128;
            for x in az.iter() {
                for y in az.iter() {
                    s += g.get(&grp.sub(x, y));
                }
            }
            hz * s
        })
        .sum()
}

/// Both sides of the `k = 2` duality formula.
pub fn duality_identity(a: &FiniteSet, g: &GroupFunction<i128>, h: &GroupFunction<i128>) -> Relation {
    Relation::equal("duality formula", weighted_bilinear(a, g, h), weighted_bilinear(a, h, g))
}

/// `P = {z : |A_z|^{k-1} ≥ E_k(A) / (2|A|^2)}`.
pub fn popular_difference_set(a: &FiniteSet, k: usize) -> Result<FiniteSet> {
    if k < 2 {
        return Err(Error::Precondition("popular difference sets need k ≥ 2".into()));
    }
    let r = autocorrelation(a);
    let n = a.len() as i128;
    let ek: i128 = r.iter().map(|(_, &v)| v.pow(k as u32)).sum();
    let p = r.level_set(|v| 2 * n * n * v.pow(k as u32 - 1) >= ek);
    let ep: i128 = p.iter().map(|x| r.get(x).pow(k as u32)).sum();
    if 2 * ep < ek {
        return Err(Error::Certificate("popular difference set misses half of E_k".into()));
    }
    Ok(p)
}

/// `𝒫 = {z : C_k(A)(z) ≥ E_k(A) / (4|A|^k)}`.
pub fn popular_tuple_set(a: &FiniteSet, k: usize) -> Result<Vec<Tuple>> {
    let vals = tuple_values(a, k)?;
    let ek: i128 = vals.iter().map(|(_, v)| v * v).sum();
    let threshold = 4 * (a.len() as i128).pow(k as u32);
    Ok(vals.into_iter().filter(|(_, v)| threshold * v >= ek).map(|(z, _)| z).collect())
}

/// The popular pair `(P, 𝒫)`, certified `(k, 1/4)`-popular and `(k, 1/2)`-dual.
pub fn popular_dual_pair(a: &FiniteSet, k: usize) -> Result<DualPair> {
    let p = popular_difference_set(a, k)?;
    let tuples = popular_tuple_set(a, k)?;
    let ek = energy_moment_int(a, k as u32);
    let ep = crate::energy::restricted_moment_int(a, &p, k as u32);
    let b = bilinear_form(a, &p, &tuples);
    if 4 * b < ek || 2 * b < ep {
        return Err(Error::Certificate("popular pair fails its duality constant".into()));
    }
    let n = a.len() as f64;
    Ok(DualPair {
        k,
        c: 0.25,
        p,
        tuples,
        delta: ek as f64 / (2.0 * n * n),
        delta_star: ek as f64 / (4.0 * n.powi(k as i32)),
        bilinear: b,
        energy: ek,
        levels: 0,
        i: 0,
        j: 0,
    })
}

/// Smallest `i ∈ [1, l]` with `v ≤ 2^i num / den`, or `None` when `v ≤ num / den`.
fn level_index(v: i128, num: i128, den: i128, l: usize) -> Option<usize> {
    if v * den <= num {
        return None;
    }
    (1..=l).find(|&i| v * den <= num << i)
}

/// Scans the level grid `P_i × 𝒫_j` and returns the maximizer of the bilinear form.
pub fn level_dual_pair(a: &FiniteSet, k: usize) -> Result<DualPair> {
    if a.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    let vals = tuple_values(a, k)?;
    let r = autocorrelation(a);
    let n = a.len() as i128;
    let ek: i128 = vals.iter().map(|(_, v)| v * v).sum();
    let l = dyadic_levels(a.len(), ek as f64, k as u32);
    let grp = a.group();
    let p_level: FxHashMap<GroupElement, usize> = r
        .sorted()
        .into_iter()
        .filter_map(|(x, v)| level_index(v.pow(k as u32 - 1), ek, 2 * n * n, l).map(|i| (x, i)))
        .collect();
    let tup_levels: Vec<(Tuple, usize)> = vals
        .into_iter()
        .filter_map(|(z, v)| level_index(v, ek, 4 * n.pow(k as u32), l).map(|j| (z, j)))
        .collect();
    let rows: Vec<(usize, Vec<i128>)> = tup_levels
        .par_iter()
        .map(|(z, j)| {
            let az = a.iterated_intersection(z);
            let mut counts = vec![0i128; l + 1];
            for x in az.iter() {
                for y in az.iter() {
                    if let Some(&i) = p_level.get(&grp.sub(x, y)) {
                        counts[i] += 1;
                    }
                }
            }
            (*j, counts)
        })
        .collect();
    let mut grid = vec![vec![0i128; l + 1]; l + 1];
    for (j, counts) in &rows {
        for i in 1..=l {
            grid[i][*j] += counts[i];
        }
    }
    let mut best = (0i128, 1usize, 1usize);
    let mut found = false;
    for (i, row) in grid.iter().enumerate().skip(1) {
        for (j, &b) in row.iter().enumerate().skip(1) {
            if !found || b > best.0 {
                best = (b, i, j);
                found = true;
            }
        }
    }
    let (b, i, j) = best;
    let l2 = (l * l) as i128;
    if 4 * l2 * b < ek {
        return Err(Error::Certificate("no level pair meets the 1/(4L^2) threshold".into()));
    }
    let p = FiniteSet::new(
        grp.clone(),
        p_level.iter().filter(|(_, &li)| li == i).map(|(x, _)| x.clone()).collect(),
    )?;
    let tuples: Vec<Tuple> = tup_levels.into_iter().filter(|(_, lj)| *lj == j).map(|(z, _)| z).collect();
    let nf = a.len() as f64;
    Ok(DualPair {
        k,
        c: 1.0 / (4.0 * (l * l) as f64),
        p,
        tuples,
        delta: 2f64.powi(i as i32) * ek as f64 / (2.0 * nf * nf),
        delta_star: 2f64.powi(j as i32) * ek as f64 / (4.0 * nf.powi(k as i32)),
        bilinear: b,
        energy: ek,
        levels: l,
        i,
        j,
    })
}

/// The defining inequality of a pair, with its recorded constant.
pub fn pair_relation(pair: &DualPair) -> Relation {
    Relation::at_most("duality constant", pair.c * pair.energy as f64, pair.bilinear as f64)
}

/// `T(x, y) = A(x) A(y) Σ_{z ∈ 𝒫} Π_i A(x + z_i) A(y + z_i)`, indexed by `A`.
pub fn dual_hermitian_operator(a: &FiniteSet, tuples: &[Tuple]) -> Result<Matrix> {
    cap("operator rows", a.len(), OPERATOR_CAP)?;
    let index: FxHashMap<&GroupElement, usize> = a.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let mut m = Matrix::zeros(a.len(), a.len());
    for z in tuples {
        let members: Vec<usize> = a.iterated_intersection(z).iter().map(|x| index[x]).collect();
        for &i in &members {
            for &j in &members {
                m[(i, j)] += 1.0;
            }
        }
    }
    Ok(m)
}

/// Positivity and trace of the dual operator, and the product form when `k = 2`.
pub fn dual_operator_relations(a: &FiniteSet, tuples: &[Tuple]) -> Result<Vec<Relation>> {
    let t = dual_hermitian_operator(a, tuples)?;
    let e = symmetric_eigen(&t)?;
    let mu0 = e.values.first().copied().unwrap_or(0.0);
    let min = e.values.iter().copied().fold(f64::INFINITY, f64::min).min(0.0);
    let sigma: i128 = tuples.iter().map(|z| a.iterated_intersection(z).len() as i128).sum();
    let mut out = vec![
        Relation::at_most("dual operator is nonnegative", -min, 1e-9 * mu0.max(1.0)).with_tol(0.0),
        Relation::equal("dual operator trace", t.trace(), sigma as f64),
    ];
    if tuples.iter().all(|z| z.len() == 1) && !tuples.is_empty() {
        let grp = a.group();
        let neg = FiniteSet::new(grp.clone(), tuples.iter().map(|z| grp.neg(&z[0])).collect())?;
        let op = raw_operator(OperatorKind::Difference, a, &neg, &a.indicator_real())?;
        let prod = op.matrix.matmul(&op.matrix.transpose());
        let err = prod.sub(&t).frobenius();
        out.push(Relation::at_most("dual operator as a product", err, 1e-9 * t.frobenius().max(1.0)).with_tol(0.0));
    }
    Ok(out)
}

/// `Σ_{x,y ∈ P} C_3(A)(x, y)^2 = Σ_{a,b ∈ A} |P ∩ (A - a) ∩ (A - b)|^2`.
pub fn c3_square_sum(a: &FiniteSet, p: &FiniteSet) -> i128 {
    let grp = a.group();
    a.elements()
        .par_iter()
        .map(|x| {
            let shifts: Vec<GroupElement> =
                a.iter().map(|c| grp.sub(c, x)).filter(|u| p.contains(u)).collect();
            let mut s = 0i128;
            for y in a.iter() {
                let m = shifts.iter().filter(|u| a.contains(&grp.add(y, u))).count() as i128;
                s += m * m;
            }
            s
        })
        .sum()
}

/// `σ_𝒫(A)`.
fn sigma_tuples(a: &FiniteSet, tuples: &[Tuple]) -> i128 {
    tuples.iter().map(|z| a.iterated_intersection(z).len() as i128).sum()
}

/// The displays for the level pair, the `E(A)` versus `E_s(A)` grid and the
/// `c`-dual bound for constructed pairs.
pub fn dual_bounds_check(a: &FiniteSet, k: usize) -> Result<(DualPair, Vec<Relation>)> {
    let pair = level_dual_pair(a, k)?;
    let r = autocorrelation(a);
    let w = r.map(|v| (v as f64).powi(k as i32 - 1));
    let mu0 = main_eigenvalue(a, &w)?;
    let l = pair.levels as f64;
    let ek = pair.energy as f64;
    let sp = crate::energy::sigma_p(a, &pair.p) as f64;
    let st = sigma_tuples(a, &pair.tuples) as f64;
    let t = dual_hermitian_operator(a, &pair.tuples)?;
    let mu_t = symmetric_eigen(&t)?.values.first().copied().unwrap_or(0.0);
    let mut out = vec![
        pair_relation(&pair),
        Relation::at_most("level product", pair.delta * pair.delta_star, 16.0 * l * mu0),
        Relation::at_most("energy by sigmas", ek * ek, 16.0 * l * l * mu0 * sp * st),
        Relation::at_most(
            "energy by sizes",
            ek * ek,
            256.0 * l.powi(3) * mu0 * mu0 * pair.p.len() as f64 * pair.tuples.len() as f64,
        ),
        Relation::at_most("energy by dual operator", ek * ek, 16.0 * l.powi(4) * sp * st * mu_t),
    ];
    if k == 2 {
        let e = energy(a) as f64;
        for s in S_GRID {
            out.push(Relation::at_most(
                format!("energy at most scaled E_{s}"),
                e,
                mu0.powf(1.0 - s / 2.0) * energy_moment(a, s),
            ));
        }
        let popular = popular_dual_pair(a, 2)?;
        for (tag, pr, c) in [
            ("popular", &popular, 0.5),
            ("level", &pair, {
                let ep = crate::energy::restricted_energy(a, &pair.p) as f64;
                if ep > 0.0 { pair.bilinear as f64 / ep } else { 0.0 }
            }),
        ] {
            let ep = crate::energy::restricted_energy(a, &pr.p) as f64;
            let star = pr.tuple_set()?;
            let rhs = crate::energy::sigma_p(a, &star) as f64 * c3_square_sum(a, &pr.p) as f64;
            out.push(Relation::at_most(format!("{tag} pair: c-dual bound"), c * c * ep * ep, rhs));
        }
    }
    Ok((pair, out))
}

/// `A' = A \ A_1` with `A_1 = {x ∈ A : ((A ∘ A) ∘ A)(x) > 2E(A)/|A|}`.
#[derive(Clone, Debug)]
pub struct RegularizedSubset {
    pub subset: FiniteSet,
    pub removed: FiniteSet,
    pub energy: i128,
}

pub fn regularized_subset(a: &FiniteSet) -> Result<RegularizedSubset> {
    if a.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    let grp = a.group();
    let r = autocorrelation(a);
    let e = r.sum_of_squares();
    let n = a.len() as i128;
    let over = |x: &GroupElement| {
        let t: i128 = a.iter().map(|b| r.get(&grp.sub(b, x))).sum();
        t * n > 2 * e
    };
    let removed = a.filter(over);
    let subset = a.difference(&removed)?;
    if 2 * subset.len() < a.len() {
        return Err(Error::Certificate("regularized subset lost more than half".into()));
    }
    Ok(RegularizedSubset { subset, removed, energy: e })
}

/// Size and eigenvalue certificates of [`regularized_subset`].
///
/// `P` ranges over `{x : |A_x| ≥ Δ}` for up to `samples` distinct values `Δ`.
pub fn regularized_certificates(a: &FiniteSet, samples: usize) -> Result<Vec<Relation>> {
    let reg = regularized_subset(a)?;
    let n = a.len() as f64;
    let e = reg.energy as f64;
    let r = autocorrelation(a);
    let mut out = vec![Relation::at_most("size", a.len() as i128, 2 * reg.subset.len() as i128)];
    let mu = main_eigenvalue(&reg.subset, &r.to_real())?;
    out.push(Relation::at_most("autocorrelation weight", mu, 2.0 * e / n));
    let mut values: Vec<i128> = r.iter().map(|(_, &v)| v).collect();
    values.sort_unstable();
    values.dedup();
    let picks: Vec<i128> = if values.len() <= samples {
        values
    } else {
        (0..samples).map(|i| values[i * (values.len() - 1) / (samples - 1).max(1)]).collect()
    };
    for delta in picks {
        let p = r.level_set(|v| v >= delta);
        let mu = main_eigenvalue(&reg.subset, &p.indicator_real())?;
        out.push(Relation::at_most(
            format!("level weight at {delta}"),
            mu,
            2.0 * e / (delta as f64 * n),
        ));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectivityMode {
    Exhaustive,
    Sampled,
}

/// Measured `(α, β, γ)`-connectedness.
#[derive(Clone, Debug)]
pub struct ConnectivityProfile {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mode: ConnectivityMode,
    pub witness: FiniteSet,
    pub examined: u64,
}

impl ConnectivityProfile {
    pub fn to_json(&self) -> Value {
        json!({
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
            "mode": self.mode,
            "witness": self.witness.to_json(),
            "examined": self.examined,
        })
    }
}

struct DiffTable {
    n: usize,
    ids: Vec<u32>,
    distinct: usize,
    powers: Vec<f64>,
}

impl DiffTable {
    fn new(a: &FiniteSet, alpha: f64) -> Self {
        let grp = a.group();
        let xs = a.elements();
        let n = xs.len();
        let mut map: FxHashMap<GroupElement, u32> = FxHashMap::default();
        let mut ids = vec![0u32; n * n];
        for i in 0..n {
            for j in 0..n {
                let d = grp.sub(&xs[i], &xs[j]);
                let next = map.len() as u32;
                ids[i * n + j] = *map.entry(d).or_insert(next);
            }
        }
        let powers = (0..=n).map(|c| (c as f64).powf(alpha)).collect();
        DiffTable { n, ids, distinct: map.len(), powers }
    }

    fn moment(&self, members: &[usize], counts: &mut [u32]) -> f64 {
        counts.iter_mut().for_each(|c| *c = 0);
        for &i in members {
            for &j in members {
                counts[self.ids[i * self.n + j] as usize] += 1;
            }
        }
        counts.iter().filter(|&&c| c > 0).map(|&c| self.powers[c as usize]).sum()
    }
}

fn ratio_for(table: &DiffTable, members: &[usize], counts: &mut [u32], total: f64, alpha: f64) -> f64 {
    let frac = members.len() as f64 / table.n as f64;
    table.moment(members, counts) / (frac.powf(2.0 * alpha) * total)
}

/// `γ = min_B E_α(B) (|A|/|B|)^{2α} / E_α(A)` over `B ⊆ A`, `|B| ≥ β|A|`, capped at 1.
///
/// `trials = None` enumerates every subset; otherwise subsets are sampled at a few fixed sizes.
pub fn connectivity_profile(
    a: &FiniteSet,
    alpha: f64,
    beta: f64,
    trials: Option<(usize, u64)>,
) -> Result<ConnectivityProfile> {
    if alpha <= 1.0 || !(0.0..=1.0).contains(&beta) {
        return Err(Error::Precondition("connectivity needs α > 1 and β ∈ [0, 1]".into()));
    }
    if a.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    let n = a.len();
    let min_size = ((beta * n as f64 - 1e-12).ceil() as usize).max(1);
    let table = DiffTable::new(a, alpha);
    let total = table.moment(&(0..n).collect::<Vec<_>>(), &mut vec![0; table.distinct]);
    let (best, best_members, examined, mode) = match trials {
        None => {
            cap("exhaustive connectivity set size", n, EXHAUSTIVE_CAP)?;
            let masks: u64 = 1 << n;
            let chunk = 1u64 << n.saturating_sub(6).min(12);
            let starts: Vec<u64> = (0..masks).step_by(chunk as usize).collect();
            let results: Vec<(f64, u64, u64)> = starts
                .par_iter()
                .map(|&start| {
                    let mut counts = vec![0u32; table.distinct];
                    let mut members = Vec::with_capacity(n);
                    let mut best = (f64::INFINITY, u64::MAX, 0u64);
                    for mask in start..(start + chunk).min(masks) {
                        if (mask.count_ones() as usize) < min_size {
                            continue;
                        }
                        members.clear();
                        members.extend((0..n).filter(|i| mask >> i & 1 == 1));
                        let q = ratio_for(&table, &members, &mut counts, total, alpha);
                        best.2 += 1;
                        if q < best.0 {
                            best = (q, mask, best.2);
                        }
                    }
                    best
                })
                .collect();
            let mut best = (f64::INFINITY, u64::MAX);
            let mut examined = 0;
            for (q, m, c) in results {
                examined += c;
                if q < best.0 || (q == best.0 && m < best.1) {
                    best = (q, m);
                }
            }
            let members: Vec<usize> = (0..n).filter(|i| best.1 >> i & 1 == 1).collect();
            (best.0, members, examined, ConnectivityMode::Exhaustive)
        }
        Some((count, seed)) => {
            let mut sizes = vec![min_size, n, (min_size + n) / 2, (3 * min_size + n) / 4, (min_size + 3 * n) / 4];
            sizes.sort_unstable();
            sizes.dedup();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u32; table.distinct];
            let mut best = (f64::INFINITY, vec![]);
            let per = count.div_ceil(sizes.len()).max(1);
            let mut examined = 0;
            for &m in &sizes {
                for _ in 0..per {
                    let mut members = sample(&mut rng, n, m).into_vec();
                    members.sort_unstable();
                    let q = ratio_for(&table, &members, &mut counts, total, alpha);
                    examined += 1;
                    if q < best.0 {
                        best = (q, members);
                    }
                }
            }
            (best.0, best.1, examined, ConnectivityMode::Sampled)
        }
    };
    let xs = a.elements();
    let witness = FiniteSet::new(a.group().clone(), best_members.iter().map(|&i| xs[i].clone()).collect())?;
    Ok(ConnectivityProfile { alpha, beta, gamma: best.min(1.0), mode, witness, examined })
}

/// Level sets of real values `v(x)` on `2^{j-1} θ < v ≤ 2^j θ`, `j ∈ [1, l]`.
fn real_levels(values: &[(GroupElement, f64)], theta: f64, l: usize) -> Vec<Vec<GroupElement>> {
    let mut out = vec![Vec::new(); l + 1];
    for (x, v) in values {
        if *v <= theta {
            continue;
        }
        if let Some(j) = (1..=l).find(|&j| *v <= theta * 2f64.powi(j as i32)) {
            out[j].push(x.clone());
        }
    }
    out
}

/// Levels of `A' ∘ A'` with base `E(A')/(4|A'|^2)`, and the one maximizing `B_{A'}(P, ·)`.
fn best_dual_level(a1: &FiniteSet, p: &FiniteSet) -> Result<(FiniteSet, f64)> {
    let r = autocorrelation(a1);
    let e = r.sum_of_squares() as f64;
    let n = a1.len() as f64;
    let theta = e / (4.0 * n * n);
    let l = dyadic_levels(a1.len(), e, 2);
    let vals: Vec<(GroupElement, f64)> = r.sorted().into_iter().map(|(x, v)| (x, v as f64)).collect();
    let levels = real_levels(&vals, theta, l);
    let mut best: Option<(i128, usize)> = None;
    for (j, lev) in levels.iter().enumerate().skip(1) {
        if lev.is_empty() {
            continue;
        }
        let tuples: Vec<Tuple> = lev.iter().map(|x| Tuple::from_iter([x.clone()])).collect();
        let b = bilinear_form(a1, p, &tuples);
        if best.is_none_or(|(bb, _)| b > bb) {
            best = Some((b, j));
        }
    }
    let (_, j) = best.ok_or_else(|| Error::Certificate("no dual level found".into()))?;
    let star = FiniteSet::new(a1.group().clone(), levels[j].clone())?;
    Ok((star, theta * 2f64.powi(j as i32)))
}

/// Which exponent sets the levels of `P` in the structural corollaries.
struct LevelPlan {
    s: f64,
    theta: f64,
    l: usize,
}

/// `P` maximizing `Σ_{x ∈ P} (A' ∘ A')(x)^s` among the levels of `|A_x|^{s-1}`.
fn best_moment_level(a: &FiniteSet, a1: &FiniteSet, plan: &LevelPlan) -> Result<(FiniteSet, f64, f64)> {
    let r = autocorrelation(a);
    let r1 = autocorrelation(a1);
    let vals: Vec<(GroupElement, f64)> = r
        .sorted()
        .into_iter()
        .map(|(x, v)| (x, if plan.s == 2.0 { v as f64 } else { (v as f64).powf(plan.s - 1.0) }))
        .collect();
    let levels = real_levels(&vals, plan.theta, plan.l);
    let mut best: Option<(f64, usize)> = None;
    for (j, lev) in levels.iter().enumerate().skip(1) {
        if lev.is_empty() {
            continue;
        }
        let m: f64 = lev.iter().map(|x| (r1.get(x) as f64).powf(plan.s)).sum();
        if best.is_none_or(|(bm, _)| m > bm) {
            best = Some((m, j));
        }
    }
    let (m, j) = best.ok_or_else(|| Error::Certificate("no popular level found".into()))?;
    let p = FiniteSet::new(a.group().clone(), levels[j].clone())?;
    let delta = (plan.theta * 2f64.powi(j as i32)).powf(1.0 / (plan.s - 1.0));
    Ok((p, delta, m))
}

fn single_tuples(s: &FiniteSet) -> Vec<Tuple> {
    s.iter().map(|x| Tuple::from_iter([x.clone()])).collect()
}

fn ceil_log2(x: f64) -> usize {
    let v = x.log2().ceil();
    if v.is_finite() && v >= 1.0 {
        v as usize
    } else {
        1
    }
}

/// The pair and displays for a `(2, β, γ)`-connected set, with the measured `γ`.
pub fn connected_corollary_check(a: &FiniteSet, profile: &ConnectivityProfile) -> Result<Vec<Relation>> {
    if profile.alpha != 2.0 || profile.beta > 0.5 {
        return Err(Error::Precondition("needs a (2, β, γ) profile with β ≤ 1/2".into()));
    }
    let gamma = profile.gamma;
    let n = a.len() as f64;
    let e = energy(a) as f64;
    let l = ceil_log2(32.0 * n.powi(3) / (gamma * e));
    let lf = l as f64;
    let reg = regularized_subset(a)?;
    let plan = LevelPlan { s: 2.0, theta: gamma * e / (32.0 * n * n), l };
    let (p, delta, ep1) = best_moment_level(a, &reg.subset, &plan)?;
    let (star, delta_star) = best_dual_level(&reg.subset, &p)?;
    let b = bilinear_form(a, &p, &single_tuples(&star)) as f64;
    let sp = crate::energy::sigma_p(a, &p) as f64;
    let ss = crate::energy::sigma_p(a, &star) as f64;
    let mut out = vec![
        Relation::at_most("popular level of the regularized subset", gamma * e / (32.0 * lf), ep1),
        Relation::at_most("duality constant", gamma * e / (64.0 * lf * lf), b),
        Relation::at_most("level product", delta * delta_star, 256.0 * lf * lf * e / (gamma * n)),
        Relation::at_most(
            "sizes",
            gamma.powi(3) * n * n / (lf.powi(5) * 2f64.powi(21)),
            (p.len() * star.len()) as f64,
        ),
        Relation::at_most("sigmas", gamma * gamma * e * n / (lf.powi(3) * 2f64.powi(13)), sp * ss),
    ];
    for s in S_GRID {
        out.push(Relation::at_most(
            format!("E_{s} lower bound"),
            gamma / 32.0 * n.powf(1.0 - s / 2.0) * e.powf(s / 2.0),
            energy_moment(a, s),
        ));
    }
    Ok(out)
}

/// Displays for an `(s, β, γ)`-connected set, `s ∈ (1, 2]`.
///
/// The sigma bound is checked with exponents `σ_{P*}^{s-1} σ_P^{3-s}`; the form with
/// the exponents exchanged is reported without a verdict.
pub fn e_s_proposition_check(a: &FiniteSet, profile: &ConnectivityProfile) -> Result<Vec<Relation>> {
    let s = profile.alpha;
    if !(s > 1.0 && s <= 2.0) || profile.beta > 0.5 {
        return Err(Error::Precondition("needs an (s, β, γ) profile with s ∈ (1, 2], β ≤ 1/2".into()));
    }
    let gamma = profile.gamma;
    let n = a.len() as f64;
    let e = energy(a) as f64;
    let es = energy_moment(a, s);
    let base = 2f64.powf(1.0 + 2.0 * s);
    let l = ceil_log2(base * n.powf(s + 1.0) / (gamma * es));
    let lf = l as f64;
    let reg = regularized_subset(a)?;
    let plan = LevelPlan { s, theta: gamma * es / (base * n * n), l };
    let (p, delta, eps1) = best_moment_level(a, &reg.subset, &plan)?;
    let (star, delta_star) = best_dual_level(&reg.subset, &p)?;
    let b = bilinear_form(a, &p, &single_tuples(&star)) as f64;
    let sp = crate::energy::sigma_p(a, &p) as f64;
    let ss = crate::energy::sigma_p(a, &star) as f64;
    let c = (2f64.powf(3.0 * s) / gamma * lf.powf(s)).powf(-1.0 / (s - 1.0))
        * es.powf(1.0 / (s - 1.0))
        * n.powf(-(4.0 - 2.0 * s) / (s - 1.0))
        / e;
    let rhs_ss = 2f64.powf(6.0 * s + 1.0) / (gamma * gamma) * lf.powf(s + 1.0) * e.powf(s - 1.0);
    Ok(vec![
        Relation::at_most("popular level of the regularized subset", gamma * es / (base * lf), eps1),
        Relation::at_most("duality constant", c * e, b),
        Relation::at_most(
            "level product",
            es * n.powf(s - 1.0) * delta * delta_star.powf(s - 1.0),
            2f64.powf(4.0 * s + 3.0) / gamma * lf.powf(s + 1.0) * e.powf(s),
        ),
        Relation::at_most(
            "sigmas",
            es * es * n.powf(s - 1.0),
            rhs_ss * ss.powf(s - 1.0) * sp.powf(3.0 - s),
        ),
        Relation::report(
            "sigmas, exchanged exponents",
            es * es * n.powf(s - 1.0),
            rhs_ss * sp.powf(s - 1.0) * ss.powf(3.0 - s),
        ),
    ])
}

/// Ratios for the small-doubling corollary, without constants.
pub fn difference_corollary_ratios(a: &FiniteSet, s: f64) -> Result<Vec<Relation>> {
    if !(s > 1.0 && s <= 2.0) {
        return Err(Error::Precondition("needs s ∈ (1, 2]".into()));
    }
    let n = a.len() as f64;
    let k = a.diffset(a)?.len() as f64 / n;
    let e = energy(a) as f64;
    let base = 2f64.powf(2.0 * s + 1.0) * k.powf(s - 1.0);
    let l = ceil_log2(base);
    let lf = l as f64;
    let reg = regularized_subset(a)?;
    let plan = LevelPlan { s, theta: n.powf(s - 1.0) / base, l };
    let (p, delta, _) = best_moment_level(a, &reg.subset, &plan)?;
    let (star, delta_star) = best_dual_level(&reg.subset, &p)?;
    let sp = crate::energy::sigma_p(a, &p) as f64;
    let ss = crate::energy::sigma_p(a, &star) as f64;
    Ok(vec![
        Relation::report(
            "level product",
            delta * delta_star.powf(s - 1.0),
            lf.powf(s + 1.0) * k.powf(s - 1.0) * e.powf(s) / n.powf(2.0 * s),
        ),
        Relation::report(
            "sigmas",
            n.powf(3.0 * s + 1.0),
            k.powf(2.0 * (s - 1.0)) * lf.powf(s + 1.0) * e.powf(s - 1.0) * sp.powf(s - 1.0) * ss.powf(3.0 - s),
        ),
    ])
}

/// `E_4(A) ≥ |A|^5 / (2^5 L^{10/3} M^{1/3} K^{7/3})` with `K = |A|^3/E(A)`, `M = T_4(A) K^3/|A|^7`.
pub fn e4_energy_relation(a: &FiniteSet) -> Result<Relation> {
    let n = a.len() as f64;
    let e = energy(a) as f64;
    let k = n.powi(3) / e;
    let m = t_energy(a, 4)? as f64 * k.powi(3) / n.powi(7);
    let l = dyadic_levels(a.len(), e, 2) as f64;
    let rhs = n.powi(5) / (32.0 * l.powf(10.0 / 3.0) * m.cbrt() * k.powf(7.0 / 3.0));
    Ok(Relation::at_most("fourth moment lower bound", rhs, energy_moment_int(a, 4) as f64))
}

/// The pair built from `E(A, A_x)` and its consequences for `E_3(A)`.
pub fn e3_dual_check(a: &FiniteSet) -> Result<Vec<Relation>> {
    cap("set size", a.len(), E3_DUAL_CAP)?;
    let grp = a.group();
    let r = autocorrelation(a);
    let e = r.sum_of_squares();
    let e3 = energy_moment_int(a, 3);
    let shifts = r.sorted();
    let per_shift: Vec<(GroupElement, i128, i128)> = shifts
        .par_iter()
        .map(|(x, v)| {
            let ax = a.shift_intersection(x);
            (x.clone(), *v, energy_pair(a, &ax).expect("same group"))
        })
        .collect();
    let p = FiniteSet::new(
        grp.clone(),
        per_shift.iter().filter(|(_, v, ex)| 2 * e * ex >= v * v * e3).map(|(x, _, _)| x.clone()).collect(),
    )?;
    let p_mass: i128 = per_shift.iter().filter(|(x, _, _)| p.contains(x)).map(|(_, _, ex)| ex).sum();
    let star = r.level_set(|v| 4 * e * v >= e3);
    let w = GroupFunction::from_pairs(grp.clone(), star.iter().map(|x| (x.clone(), r.get(x))));
    let form = weighted_bilinear(a, &w, &p.indicator());
    let e3_star = crate::energy::restricted_moment_int(a, &star, 3);
    Ok(vec![
        Relation::at_most("half of E_3 on P", e3, 2 * p_mass),
        Relation::at_most("quarter of E_3 on the pair", e3, 4 * form),
        Relation::at_most("Cauchy–Schwarz consequence", e3 * e3, 16 * e3_star * c3_square_sum(a, &p)),
    ])
}
