//! Convolutions, correlations and the generalized convolution `C_k`.
//!
//! Conventions, for functions on an abelian group:
//!
//! * `(f * g)(x) = Σ_y f(y) g(x - y)`
//! * `(f ∘ g)(x) = Σ_y f(y) g(y + x)`
//! * `C_k(f_0, ..., f_{k-1})(x_1, ..., x_{k-1}) = Σ_z f_0(z) f_1(z + x_1) ... f_{k-1}(z + x_{k-1})`

use std::collections::hash_map::Entry;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{cap, Error, Result};
use crate::group::{FiniteSet, Group, GroupDescriptor, GroupElement, GroupFunction, GroupRef, Weight};

/// Largest support allowed for each argument of a materialised `C_k`.
pub const TUPLE_SUPPORT_CAP: usize = 128;
/// Largest arity `k` of a materialised `C_k`.
pub const TUPLE_ARITY_CAP: usize = 4;
/// Largest number of support tuples a tensor power may have.
pub const TENSOR_SUPPORT_CAP: usize = 1 << 20;

pub type Tuple = SmallVec<[GroupElement; 3]>;

/// A finitely supported function on `Γ^arity`.
#[derive(Clone)]
pub struct TupleFunction<V: Weight> {
    group: GroupRef,
    arity: usize,
    values: FxHashMap<Tuple, V>,
}

impl<V: Weight> PartialEq for TupleFunction<V> {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.arity == other.arity && self.values == other.values
    }
}

impl<V: Weight> std::fmt::Debug for TupleFunction<V> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.sorted()).finish()
    }
}

impl<V: Weight> TupleFunction<V> {
    pub fn zero(group: GroupRef, arity: usize) -> Self {
        TupleFunction { group, arity, values: FxHashMap::default() }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn get(&self, x: &[GroupElement]) -> V {
        self.values.get(x).copied().unwrap_or_else(V::zero)
    }

    pub fn add_at(&mut self, x: Tuple, v: V) {
        if v == V::zero() {
            return;
        }
        match self.values.entry(x) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += v;
                if *o.get() == V::zero() {
                    o.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(v);
            }
        }
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tuple, &V)> {
        self.values.iter()
    }

    pub fn sorted(&self) -> Vec<(Tuple, V)> {
        let mut v: Vec<_> = self.values.iter().map(|(k, v)| (k.clone(), *v)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn total(&self) -> V {
        self.sorted().into_iter().fold(V::zero(), |s, (_, v)| s + v)
    }

    /// `Σ F(x)^l`.
    pub fn power_sum(&self, l: u32) -> V {
        self.sorted().into_iter().fold(V::zero(), |s, (_, v)| {
            let mut p = V::one();
            for _ in 0..l {
                p = p * v;
            }
            s + p
        })
    }

    pub fn sum_of_squares(&self) -> V {
        self.power_sum(2)
    }

    /// `Σ F(x) G(x)`.
    pub fn inner(&self, other: &TupleFunction<V>) -> V {
        let mut s = V::zero();
        for (k, v) in self.sorted() {
            s += v * other.get(&k);
        }
        s
    }

    /// Correlation on `Γ^arity`: `(F ∘ G)(x) = Σ_y F(y) G(y + x)`.
    pub fn correlate(&self, other: &TupleFunction<V>) -> Result<TupleFunction<V>> {
        if self.group != other.group || self.arity != other.arity {
            return Err(Error::GroupMismatch);
        }
        let g = &self.group;
        let mut out = TupleFunction::zero(g.clone(), self.arity);
        for (y, fy) in self.values.iter() {
            for (w, gw) in other.values.iter() {
                let x: Tuple = w.iter().zip(y.iter()).map(|(a, b)| g.sub(a, b)).collect();
                out.add_at(x, *fy * *gw);
            }
        }
        Ok(out)
    }

    /// Reads the function as a function on the product group `Γ^arity`.
    pub fn flatten(&self) -> Result<GroupFunction<V>> {
        let group = Group::new(GroupDescriptor::product(vec![self.group.descriptor().clone(); self.arity]))?;
        Ok(GroupFunction::from_pairs(
            group,
            self.values.iter().map(|(k, v)| {
                let mut c = SmallVec::new();
                for e in k {
                    c.extend_from_slice(e.coords());
                }
                (GroupElement(c), *v)
            }),
        ))
    }
}

fn check_group<V: Weight>(f: &GroupFunction<V>, g: &GroupFunction<V>) -> Result<()> {
    if f.group() != g.group() {
        Err(Error::GroupMismatch)
    } else {
        Ok(())
    }
}

/// `(f * g)(x) = Σ_y f(y) g(x - y)`.
pub fn convolve<V: Weight>(f: &GroupFunction<V>, g: &GroupFunction<V>) -> Result<GroupFunction<V>> {
    check_group(f, g)?;
    let grp = f.group();
    let mut out = GroupFunction::zero(grp.clone());
    for (y, fy) in f.iter() {
        for (z, gz) in g.iter() {
            out.add_at(grp.add(y, z), *fy * *gz);
        }
    }
    Ok(out)
}

/// `(f ∘ g)(x) = Σ_y f(y) g(y + x)`.
pub fn correlate<V: Weight>(f: &GroupFunction<V>, g: &GroupFunction<V>) -> Result<GroupFunction<V>> {
    check_group(f, g)?;
    let grp = f.group();
    let mut out = GroupFunction::zero(grp.clone());
    for (y, fy) in f.iter() {
        for (z, gz) in g.iter() {
            out.add_at(grp.sub(z, y), *fy * *gz);
        }
    }
    Ok(out)
}

/// `f * f * ... * f` with `k` factors (`k ≥ 1`).
pub fn convolve_kfold<V: Weight>(f: &GroupFunction<V>, k: usize) -> Result<GroupFunction<V>> {
    if k == 0 {
        return Err(Error::Precondition("k-fold convolution needs k ≥ 1".into()));
    }
    let mut acc = f.clone();
    for _ in 1..k {
        acc = convolve(&acc, f)?;
    }
    Ok(acc)
}

/// `(A ∘ A)(x) = |A ∩ (A - x)|`.
pub fn autocorrelation(a: &FiniteSet) -> GroupFunction<i128> {
    let g = a.group();
    let mut out = GroupFunction::zero(g.clone());
    for x in a.iter() {
        for y in a.iter() {
            out.add_at(g.sub(y, x), 1);
        }
    }
    out
}

/// `(A ∘ B)(x) = |A ∩ (B - x)|`.
pub fn set_correlation(a: &FiniteSet, b: &FiniteSet) -> Result<GroupFunction<i128>> {
    correlate(&a.indicator(), &b.indicator())
}

/// `(A * B)(x)`, the number of representations `x = a + b`.
pub fn set_convolution(a: &FiniteSet, b: &FiniteSet) -> Result<GroupFunction<i128>> {
    convolve(&a.indicator(), &b.indicator())
}

/// Materialises `C_k(f_0, ..., f_{k-1})` as a function of `k - 1` shifts.
pub fn generalized_convolution<V: Weight>(fs: &[&GroupFunction<V>]) -> Result<TupleFunction<V>> {
    let k = fs.len();
    if k < 2 {
        return Err(Error::Precondition("generalized convolution needs k ≥ 2".into()));
    }
    cap("generalized convolution arity", k, TUPLE_ARITY_CAP)?;
    for f in fs {
        check_group(fs[0], f)?;
        cap("generalized convolution support", f.support_len(), TUPLE_SUPPORT_CAP)?;
    }
    let grp = fs[0].group().clone();
    let rest: Vec<Vec<(GroupElement, V)>> = fs[1..].iter().map(|f| f.sorted()).collect();
    let mut out = TupleFunction::zero(grp.clone(), k - 1);
    for (z, fz) in fs[0].sorted() {
        let mut idx = vec![0usize; k - 1];
        if rest.iter().any(|r| r.is_empty()) {
            break;
        }
        loop {
            let mut w = fz;
            let mut key: Tuple = SmallVec::with_capacity(k - 1);
            for (i, r) in rest.iter().enumerate() {
                let (e, v) = &r[idx[i]];
                w = w * *v;
                key.push(grp.sub(e, &z));
            }
            out.add_at(key, w);
            let mut pos = 0;
            loop {
                if pos == k - 1 {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < rest[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == k - 1 {
                break;
            }
        }
    }
    Ok(out)
}

/// Evaluates `C_k(f_0, ..., f_{k-1})` at a single tuple of shifts.
pub fn generalized_convolution_at<V: Weight>(fs: &[&GroupFunction<V>], shifts: &[GroupElement]) -> V {
    debug_assert_eq!(fs.len(), shifts.len() + 1);
    let grp = fs[0].group();
    let mut s = V::zero();
    for (z, fz) in fs[0].sorted() {
        let mut w = fz;
        for (f, x) in fs[1..].iter().zip(shifts) {
            if w == V::zero() {
                break;
            }
            w = w * f.get(&grp.add(&z, x));
        }
        s += w;
    }
    s
}

/// `C_l(A, ..., A)` for a set.
pub fn set_generalized_convolution(a: &FiniteSet, l: usize) -> Result<TupleFunction<i128>> {
    let ind = a.indicator();
    let fs: Vec<&GroupFunction<i128>> = vec![&ind; l];
    generalized_convolution(&fs)
}

/// `C_3(h, A, B)(x, y) = Σ_z h(z) A(z + x) B(z + y)`.
pub fn triple_correlation_mixed<V: Weight>(
    h: &GroupFunction<V>,
    a: &GroupFunction<V>,
    b: &GroupFunction<V>,
) -> Result<TupleFunction<V>> {
    generalized_convolution(&[h, a, b])
}

/// `f^{⊗t}` on the product group `Γ^t`.
pub fn tensor_power<V: Weight>(f: &GroupFunction<V>, t: usize) -> Result<GroupFunction<V>> {
    if t == 0 {
        return Err(Error::Precondition("tensor power needs t ≥ 1".into()));
    }
    let total = (f.support_len() as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    cap("tensor power support", total.min(usize::MAX as u128) as usize, TENSOR_SUPPORT_CAP)?;
    let group = Group::new(GroupDescriptor::product(vec![f.group().descriptor().clone(); t]))?;
    let base = f.sorted();
    let mut tuples: Vec<(SmallVec<[i64; 2]>, V)> = vec![(SmallVec::new(), V::one())];
    for _ in 0..t {
        let mut next = Vec::with_capacity(tuples.len() * base.len());
        for (c, v) in &tuples {
            for (e, w) in &base {
                let mut c2 = c.clone();
                c2.extend_from_slice(e.coords());
                next.push((c2, *v * *w));
            }
        }
        tuples = next;
    }
    Ok(GroupFunction::from_pairs(group, tuples.into_iter().map(|(c, v)| (GroupElement(c), v))))
}

/// Tensor power of a set, `A^t ⊆ Γ^t`.
pub fn tensor_power_set(a: &FiniteSet, t: usize) -> Result<FiniteSet> {
    let total = (a.len() as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    cap("tensor power support", total.min(usize::MAX as u128) as usize, TENSOR_SUPPORT_CAP)?;
    a.cartesian_power(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn s(v: i64) -> GroupElement {
        GroupElement::scalar(v)
    }

    #[test]
    fn autocorrelation_of_0_1_3() {
        let a = FiniteSet::integers([0, 1, 3]);
        let r = autocorrelation(&a);
        assert_eq!(r.get(&s(0)), 3);
        for x in [1, 2, 3, -1, -2, -3] {
            assert_eq!(r.get(&s(x)), 1);
        }
        assert_eq!(r.support_len(), 7);
        assert_eq!(r, set_correlation(&a, &a).unwrap());
    }

    #[test]
    fn threefold_convolution_coefficient() {
        let a = FiniteSet::integers([0, 1, 3]);
        let c = convolve_kfold(&a.indicator(), 3).unwrap();
        assert_eq!(c.get(&s(4)), 6);
    }

    #[test]
    fn triple_correlation_of_0_1() {
        let a = FiniteSet::integers([0, 1]);
        let c = set_generalized_convolution(&a, 3).unwrap();
        assert_eq!(c.get(&[s(0), s(0)]), 2);
        assert_eq!(c.get(&[s(1), s(1)]), 1);
        assert_eq!(c.sum_of_squares(), 10);
    }

    #[test]
    fn pointwise_evaluation_matches_materialised() {
        let g = Group::cyclic(11).unwrap();
        let a = FiniteSet::from_scalars(g, [0, 2, 3, 7]).unwrap();
        let ind = a.indicator();
        let c = generalized_convolution(&[&ind, &ind, &ind]).unwrap();
        for x in 0..11 {
            for y in 0..11 {
                assert_eq!(c.get(&[s(x), s(y)]), generalized_convolution_at(&[&ind, &ind, &ind], &[s(x), s(y)]));
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let a = FiniteSet::integers(0..200);
        assert!(matches!(set_generalized_convolution(&a, 3), Err(Error::CapExceeded { .. })));
    }
}
