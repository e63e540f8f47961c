//! Exact additive energies and their moments, plus multiplicative energy.

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::convolution::{autocorrelation, convolve_kfold, set_generalized_convolution, Tuple, TupleFunction};
use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupDescriptor, GroupElement, GroupFunction};

fn int_pow(v: i128, k: u32) -> i128 {
    v.checked_pow(k).expect("energy overflow")
}

/// `E(A, B) = Σ_x (A ∘ A)(x) (B ∘ B)(x)`, the number of solutions of `a - a' = b - b'`.
pub fn energy_pair(a: &FiniteSet, b: &FiniteSet) -> Result<i128> {
    energy_moment_pair_int(a, b, 2)
}

/// `E(A) = E(A, A)`.
pub fn energy(a: &FiniteSet) -> i128 {
    energy_moment_int(a, 2)
}

/// `E_k(A) = Σ_x (A ∘ A)(x)^k` for integral `k ≥ 1`.
pub fn energy_moment_int(a: &FiniteSet, k: u32) -> i128 {
    let r = autocorrelation(a);
    r.sorted().into_iter().map(|(_, v)| int_pow(v, k)).sum()
}

/// `E_s(A) = Σ_x (A ∘ A)(x)^s` for real `s`.
pub fn energy_moment(a: &FiniteSet, s: f64) -> f64 {
    moment_of(&autocorrelation(a), s)
}

/// `Σ_x r(x)^s` over the support of `r`.
pub fn moment_of(r: &GroupFunction<i128>, s: f64) -> f64 {
    r.sorted().into_iter().map(|(_, v)| (v as f64).powf(s)).sum()
}

/// `E_k(A, B) = Σ_x (A ∘ A)(x) (B ∘ B)(x)^{k-1}`.
pub fn energy_moment_pair_int(a: &FiniteSet, b: &FiniteSet, k: u32) -> Result<i128> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch);
    }
    if k == 0 {
        return Err(Error::Precondition("E_k(A, B) needs k ≥ 1".into()));
    }
    let ra = autocorrelation(a);
    let rb = autocorrelation(b);
    Ok(ra.sorted().into_iter().map(|(x, v)| v * int_pow(rb.get(&x), k - 1)).sum())
}

/// `E_s(A, B) = Σ_x (A ∘ A)(x) (B ∘ B)(x)^{s-1}` for real `s ≥ 1`.
pub fn energy_moment_pair(a: &FiniteSet, b: &FiniteSet, s: f64) -> Result<f64> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch);
    }
    let ra = autocorrelation(a);
    let rb = autocorrelation(b);
    Ok(ra
        .sorted()
        .into_iter()
        .map(|(x, v)| {
            let w = rb.get(&x);
            if w == 0 {
                0.0
            } else {
                v as f64 * (w as f64).powf(s - 1.0)
            }
        })
        .sum())
}

/// `T_k(A) = Σ_x ((A * ... * A)(x))^2` with `k` summands.
pub fn t_energy(a: &FiniteSet, k: usize) -> Result<i128> {
    let c = convolve_kfold(&a.indicator(), k)?;
    Ok(c.sum_of_squares())
}

/// `σ_k(A)`, the number of `k`-tuples of `A` summing to zero.
pub fn sigma_k(a: &FiniteSet, k: usize) -> Result<i128> {
    let c = convolve_kfold(&a.indicator(), k)?;
    Ok(c.get(&a.group().zero()))
}

/// `E_P(A) = Σ_{x ∈ P} (A ∘ A)(x)^2`.
pub fn restricted_energy(a: &FiniteSet, p: &FiniteSet) -> i128 {
    restricted_moment_int(a, p, 2)
}

/// `E^P_k(A) = Σ_{x ∈ P} |A ∩ (A - x)|^k`.
pub fn restricted_moment_int(a: &FiniteSet, p: &FiniteSet, k: u32) -> i128 {
    let r = autocorrelation(a);
    p.iter().map(|x| int_pow(r.get(x), k)).sum()
}

/// Real-exponent version of [`restricted_moment_int`].
pub fn restricted_moment(a: &FiniteSet, p: &FiniteSet, s: f64) -> f64 {
    let r = autocorrelation(a);
    p.iter()
        .map(|x| r.get(x))
        .filter(|&v| v > 0)
        .map(|v| (v as f64).powf(s))
        .sum()
}

/// `σ_P(A) = Σ_{x ∈ P} (A ∘ A)(x)`.
pub fn sigma_p(a: &FiniteSet, p: &FiniteSet) -> i128 {
    let r = autocorrelation(a);
    p.iter().map(|x| r.get(x)).sum()
}

/// `σ(ψ, A) = Σ_x ψ(x) (A ∘ A)(x)`.
pub fn sigma_psi(psi: &GroupFunction<f64>, a: &FiniteSet) -> f64 {
    autocorrelation(a).to_real().inner(psi)
}

/// `σ_𝒫(A) = Σ_{z ∈ 𝒫} C_k(A)(z)` for a set of `(k-1)`-tuples.
pub fn sigma_tuple(ck: &TupleFunction<i128>, tuples: &[Tuple]) -> i128 {
    tuples.iter().map(|z| ck.get(z)).sum()
}

/// `Σ_s |A ∩ (B - s_1) ∩ ... ∩ (B - s_{k-1})|^2` over `(k-1)`-tuples of shifts.
/// Equal to `E_k(A, B)`.
pub fn tuple_shift_energy(a: &FiniteSet, b: &FiniteSet, k: usize) -> Result<i128> {
    if k < 2 {
        return Err(Error::Precondition("tuple form needs k ≥ 2".into()));
    }
    let diffs = b.diffset(a)?;
    let shifts: Vec<GroupElement> = diffs.elements().to_vec();
    let mut total = 0i128;
    let mut idx = vec![0usize; k - 1];
    let g = a.group();
    loop {
        let s: Vec<GroupElement> = idx.iter().map(|&i| shifts[i].clone()).collect();
        let n = a.iter().filter(|x| s.iter().all(|t| b.contains(&g.add(x, t)))).count() as i128;
        total += n * n;
        let mut pos = 0;
        while pos < k - 1 {
            idx[pos] += 1;
            if idx[pos] < shifts.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == k - 1 {
            break;
        }
    }
    Ok(total)
}

/// `C_k(A)` together with `E_k(A) = Σ C_k(A)^2`.
pub fn tuple_energy(a: &FiniteSet, k: usize) -> Result<(TupleFunction<i128>, i128)> {
    let c = set_generalized_convolution(a, k)?;
    let e = c.sum_of_squares();
    Ok((c, e))
}

/// Quotient keys for multiplicative energy.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Ratio {
    Fraction(i128, i128),
    Residue(i128),
}

fn gcd(a: i128, b: i128) -> i128 {
    num_integer::Integer::gcd(&a, &b)
}

fn ratio_counts(a: &FiniteSet) -> Result<FxHashMap<Ratio, i128>> {
    let mut counts: FxHashMap<Ratio, i128> = FxHashMap::default();
    match a.group().descriptor() {
        GroupDescriptor::Integers => {
            for x in a.iter() {
                for y in a.iter() {
                    let (p, q) = (x.coords()[0] as i128, y.coords()[0] as i128);
                    if p == 0 || q == 0 {
                        return Err(Error::Precondition("multiplicative energy needs nonzero elements".into()));
                    }
                    let d = gcd(p, q) * q.signum();
                    *counts.entry(Ratio::Fraction(p / d, q / d)).or_default() += 1;
                }
            }
        }
        GroupDescriptor::Cyclic { modulus } => {
            let n = *modulus as i128;
            for x in a.iter() {
                for y in a.iter() {
                    let (p, q) = (x.coords()[0] as i128, y.coords()[0] as i128);
                    let inv = mod_inverse(q, n).ok_or_else(|| {
                        Error::Precondition("multiplicative energy needs units modulo n".into())
                    })?;
                    if gcd(p, n) != 1 {
                        return Err(Error::Precondition("multiplicative energy needs units modulo n".into()));
                    }
                    *counts.entry(Ratio::Residue(p * inv % n)).or_default() += 1;
                }
            }
        }
        _ => {
            return Err(Error::Precondition(
                "multiplicative energy is defined for subsets of Z or Z/n".into(),
            ))
        }
    }
    Ok(counts)
}

pub(crate) fn mod_inverse(a: i128, n: i128) -> Option<i128> {
    let e = num_integer::Integer::extended_gcd(&a.rem_euclid(n), &n);
    if e.gcd != 1 {
        None
    } else {
        Some(e.x.rem_euclid(n))
    }
}

/// `E^×(A, B)`, the number of solutions of `a_1 / a_2 = b_1 / b_2`.
pub fn multiplicative_energy_int(a: &FiniteSet, b: &FiniteSet) -> Result<i128> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch);
    }
    let ra = ratio_counts(a)?;
    let rb = ratio_counts(b)?;
    let mut keys: Vec<_> = ra.keys().copied().collect();
    keys.sort();
    Ok(keys.into_iter().map(|k| ra[&k] * rb.get(&k).copied().unwrap_or(0)).sum())
}

/// `E^×_s(A, B) = Σ_x r_{A/A}(x) r_{B/B}(x)^{s-1}`.
pub fn multiplicative_energy(a: &FiniteSet, b: &FiniteSet, s: f64) -> Result<f64> {
    if a.group() != b.group() {
        return Err(Error::GroupMismatch);
    }
    let ra = ratio_counts(a)?;
    let rb = ratio_counts(b)?;
    let mut keys: Vec<_> = ra.keys().copied().collect();
    keys.sort();
    Ok(keys
        .into_iter()
        .map(|k| {
            let w = rb.get(&k).copied().unwrap_or(0);
            if w == 0 {
                0.0
            } else {
                ra[&k] as f64 * (w as f64).powf(s - 1.0)
            }
        })
        .sum())
}

/// Number of dyadic levels `⌈log2(4|A|^{k+1} / E_k(A))⌉`, at least 1.
pub fn dyadic_levels(n: usize, ek: f64, k: u32) -> usize {
    let raw = (4.0 * (n as f64).powi(k as i32 + 1) / ek).log2().ceil();
    if raw.is_finite() && raw >= 1.0 {
        raw as usize
    } else {
        1
    }
}

/// Summary statistics of a set.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub size: usize,
    pub doubling: f64,
    pub difference: usize,
    pub sumset: usize,
    pub e1: i128,
    pub e: i128,
    pub e_three_halves: f64,
    pub e3: i128,
    pub e4: i128,
    pub t2: i128,
    pub t3: i128,
    pub t4: Option<i128>,
    pub sigma2: i128,
    pub sigma3: i128,
    /// `K = |A|^3 / E(A)`.
    pub k: f64,
    /// `M = E_3(A) K^2 / |A|^4`.
    pub m: f64,
    /// `T_4(A) K^3 / |A|^7`.
    pub m_t4: Option<f64>,
    pub l: usize,
    pub extra_moments: Vec<(f64, f64)>,
}

/// Computes the [`EnergyReport`]. `T_4` is skipped above 256 elements.
pub fn energy_report(a: &FiniteSet, extra_s: &[f64]) -> Result<EnergyReport> {
    if a.is_empty() {
        return Err(Error::Precondition("empty set".into()));
    }
    let n = a.len() as f64;
    let r = autocorrelation(a);
    let e = r.sum_of_squares();
    let e3: i128 = r.sorted().into_iter().map(|(_, v)| v * v * v).sum();
    let e4: i128 = r.sorted().into_iter().map(|(_, v)| v * v * v * v).sum();
    let k = n.powi(3) / e as f64;
    let t4 = if a.len() <= 256 { Some(t_energy(a, 4)?) } else { None };
    Ok(EnergyReport {
        size: a.len(),
        doubling: a.sumset(a)?.len() as f64 / n,
        difference: r.support_len(),
        sumset: a.sumset(a)?.len(),
        e1: (a.len() * a.len()) as i128,
        e,
        e_three_halves: moment_of(&r, 1.5),
        e3,
        e4,
        t2: e,
        t3: t_energy(a, 3)?,
        t4,
        sigma2: sigma_k(a, 2)?,
        sigma3: sigma_k(a, 3)?,
        k,
        m: e3 as f64 * k * k / n.powi(4),
        m_t4: t4.map(|t| t as f64 * k.powi(3) / n.powi(7)),
        l: dyadic_levels(a.len(), e as f64, 2),
        extra_moments: extra_s.iter().map(|&s| (s, moment_of(&r, s))).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn frozen_small_values() {
        let a = FiniteSet::integers([0, 1, 3]);
        assert_eq!(energy(&a), 15);
        assert_eq!(energy(&FiniteSet::integers([0, 1])), 6);
        assert_eq!(energy_moment_int(&a, 3), 33);
        assert_eq!(energy_moment_int(&a, 4), 87);
        assert!((energy_moment(&a, 1.5) - (3f64.powf(1.5) + 6.0)).abs() < 1e-12);
        assert_eq!(t_energy(&FiniteSet::integers([0, 1]), 3).unwrap(), 20);
        assert_eq!(t_energy(&a, 3).unwrap(), 99);
        let p = FiniteSet::integers([1, 2]);
        assert_eq!(restricted_energy(&a, &p), 2);
        let b = FiniteSet::integers([0, 2]);
        assert_eq!(energy_moment_pair_int(&FiniteSet::integers([0, 1]), &b, 3).unwrap(), 8);
    }

    #[test]
    fn cube_energy() {
        let g = Group::cube(2).unwrap();
        let h = FiniteSet::from_scalars(g, 0..4).unwrap();
        assert_eq!(energy(&h), 64);
    }

    #[test]
    fn multiplicative_energy_of_1_2_4() {
        let a = FiniteSet::integers([1, 2, 4]);
        assert_eq!(multiplicative_energy_int(&a, &a).unwrap(), 19);
        assert!((multiplicative_energy(&a, &a, 2.0).unwrap() - 19.0).abs() < 1e-12);
    }

    #[test]
    fn multiplicative_energy_modular() {
        let g = Group::cyclic(7).unwrap();
        let a = FiniteSet::from_scalars(g, [1, 2, 4]).unwrap();
        assert_eq!(multiplicative_energy_int(&a, &a).unwrap(), 27);
    }

    #[test]
    fn tuple_form_matches_moment() {
        let a = FiniteSet::integers([0, 1, 3, 7]);
        for k in 2..=3 {
            assert_eq!(tuple_shift_energy(&a, &a, k).unwrap(), energy_moment_int(&a, k as u32));
        }
        let (x, y) = (FiniteSet::integers([0, 1]), FiniteSet::integers([0, 2, 3]));
        assert_eq!(tuple_shift_energy(&x, &y, 3).unwrap(), energy_moment_pair_int(&x, &y, 3).unwrap());
    }
}
