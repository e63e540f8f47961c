//! Finite abelian groups, their elements, finite subsets and functions on them.
//!
//! Elements are stored as flat coordinate vectors. A product group is flattened
//! into its leaves, so `Z/4 x F2^3 x Z` has three coordinates. Boolean-cube
//! coordinates pack all bits into one word with XOR as the group law.

use std::collections::hash_map::Entry;
use std::fmt;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Largest supported boolean-cube dimension (bits of one coordinate word).
pub const MAX_CUBE_DIM: u32 = 62;

/// Serialisable description of a group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum GroupDescriptor {
    #[serde(rename = "Z")]
    Integers,
    #[serde(rename = "ZmodN")]
    Cyclic { modulus: u64 },
    #[serde(rename = "F2n")]
    Cube { dimension: u32 },
    #[serde(rename = "product")]
    Product { factors: Vec<GroupDescriptor> },
}

impl GroupDescriptor {
    pub fn cyclic(modulus: u64) -> Self {
        GroupDescriptor::Cyclic { modulus }
    }

    pub fn cube(dimension: u32) -> Self {
        GroupDescriptor::Cube { dimension }
    }

    pub fn product(factors: Vec<GroupDescriptor>) -> Self {
        GroupDescriptor::Product { factors }
    }

    /// Parses the compact notation `Z`, `Z/12`, `F2^5` and `x`-separated products.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split('x').map(str::trim).collect();
        if parts.len() > 1 {
            let factors = parts
                .iter()
                .map(|p| Self::parse_leaf(p))
                .collect::<Result<Vec<_>>>()?;
            return Ok(GroupDescriptor::Product { factors });
        }
        Self::parse_leaf(parts[0])
    }

    fn parse_leaf(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognised group `{text}`"));
        if text == "Z" {
            Ok(GroupDescriptor::Integers)
        } else if let Some(n) = text.strip_prefix("Z/") {
            Ok(GroupDescriptor::Cyclic { modulus: n.parse().map_err(|_| bad())? })
        } else if let Some(n) = text.strip_prefix("F2^") {
            Ok(GroupDescriptor::Cube { dimension: n.parse().map_err(|_| bad())? })
        } else {
            Err(bad())
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            GroupDescriptor::Integers => Ok(()),
            GroupDescriptor::Cyclic { modulus } => {
                if *modulus == 0 || *modulus > i64::MAX as u64 {
                    Err(Error::InvalidGroup(format!("modulus {modulus} out of range")))
                } else {
                    Ok(())
                }
            }
            GroupDescriptor::Cube { dimension } => {
                if *dimension > MAX_CUBE_DIM {
                    Err(Error::InvalidGroup(format!(
                        "cube dimension {dimension} exceeds {MAX_CUBE_DIM}"
                    )))
                } else {
                    Ok(())
                }
            }
            GroupDescriptor::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidGroup("empty product".into()));
                }
                factors.iter().try_for_each(|f| f.validate())
            }
        }
    }

    fn push_leaves(&self, out: &mut Vec<Leaf>) {
        match self {
            GroupDescriptor::Integers => out.push(Leaf::Int),
            GroupDescriptor::Cyclic { modulus } => out.push(Leaf::Mod(*modulus as i64)),
            GroupDescriptor::Cube { dimension } => out.push(Leaf::Xor(*dimension)),
            GroupDescriptor::Product { factors } => {
                factors.iter().for_each(|f| f.push_leaves(out))
            }
        }
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupDescriptor::Integers => write!(f, "Z"),
            GroupDescriptor::Cyclic { modulus } => write!(f, "Z/{modulus}"),
            GroupDescriptor::Cube { dimension } => write!(f, "F2^{dimension}"),
            GroupDescriptor::Product { factors } => {
                let parts: Vec<String> = factors.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join("x"))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Leaf {
    Int,
    Mod(i64),
    Xor(u32),
}

impl Leaf {
    fn order(self) -> Option<u128> {
        match self {
            Leaf::Int => None,
            Leaf::Mod(n) => Some(n as u128),
            Leaf::Xor(d) => Some(1u128 << d),
        }
    }
}

/// A group element: one exact coordinate per leaf of the descriptor.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GroupElement(pub SmallVec<[i64; 2]>);

impl GroupElement {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn from_coords(coords: &[i64]) -> Self {
        GroupElement(SmallVec::from_slice(coords))
    }

    /// Single-coordinate element.
    pub fn scalar(v: i64) -> Self {
        let mut s = SmallVec::new();
        s.push(v);
        GroupElement(s)
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0[0])
        } else {
            write!(f, "{:?}", self.0.as_slice())
        }
    }
}

/// A group together with its flattened coordinate layout.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct Group {
    descriptor: GroupDescriptor,
    leaves: Vec<Leaf>,
}

pub type GroupRef = Arc<Group>;

impl Group {
    pub fn new(descriptor: GroupDescriptor) -> Result<GroupRef> {
        descriptor.validate()?;
        let mut leaves = Vec::new();
        descriptor.push_leaves(&mut leaves);
        Ok(Arc::new(Group { descriptor, leaves }))
    }

    pub fn integers() -> GroupRef {
        Self::new(GroupDescriptor::Integers).expect("valid")
    }

    pub fn cyclic(modulus: u64) -> Result<GroupRef> {
        Self::new(GroupDescriptor::cyclic(modulus))
    }

    pub fn cube(dimension: u32) -> Result<GroupRef> {
        Self::new(GroupDescriptor::cube(dimension))
    }

    pub fn descriptor(&self) -> &GroupDescriptor {
        &self.descriptor
    }

    pub fn rank(&self) -> usize {
        self.leaves.len()
    }

    /// Group order, `None` when a factor is the integers.
    pub fn order(&self) -> Option<u128> {
        self.leaves
            .iter()
            .try_fold(1u128, |acc, l| l.order().and_then(|o| acc.checked_mul(o)))
    }

    pub fn is_finite(&self) -> bool {
        self.leaves.iter().all(|l| !matches!(l, Leaf::Int))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(SmallVec::from_elem(0, self.leaves.len()))
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut out = SmallVec::with_capacity(self.leaves.len());
        for ((leaf, x), y) in self.leaves.iter().zip(&a.0).zip(&b.0) {
            out.push(match *leaf {
                Leaf::Int => x.checked_add(*y).expect("integer coordinate overflow"),
                Leaf::Mod(n) => ((*x as i128 + *y as i128) % n as i128) as i64,
                Leaf::Xor(_) => x ^ y,
            });
        }
        GroupElement(out)
    }

    pub fn sub(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut out = SmallVec::with_capacity(self.leaves.len());
        for ((leaf, x), y) in self.leaves.iter().zip(&a.0).zip(&b.0) {
            out.push(match *leaf {
                Leaf::Int => x.checked_sub(*y).expect("integer coordinate overflow"),
                Leaf::Mod(n) => (*x as i128 - *y as i128).rem_euclid(n as i128) as i64,
                Leaf::Xor(_) => x ^ y,
            });
        }
        GroupElement(out)
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        self.sub(&self.zero(), a)
    }

    /// `k * a` for a non-negative integer `k`.
    pub fn scale(&self, a: &GroupElement, k: u64) -> GroupElement {
        let mut out = SmallVec::with_capacity(self.leaves.len());
        for (leaf, x) in self.leaves.iter().zip(&a.0) {
            out.push(match *leaf {
                Leaf::Int => x.checked_mul(k as i64).expect("integer coordinate overflow"),
                Leaf::Mod(n) => ((*x as i128 * k as i128) % n as i128) as i64,
                Leaf::Xor(_) => {
                    if k % 2 == 0 {
                        0
                    } else {
                        *x
                    }
                }
            });
        }
        GroupElement(out)
    }

    pub fn contains(&self, a: &GroupElement) -> bool {
        a.0.len() == self.leaves.len()
            && self.leaves.iter().zip(&a.0).all(|(leaf, x)| match *leaf {
                Leaf::Int => true,
                Leaf::Mod(n) => (0..n).contains(x),
                Leaf::Xor(d) => *x >= 0 && (*x as u64) >> d == 0,
            })
    }

    /// Decodes a mixed-radix index. Integer coordinates use the window `[0, window)`.
    pub fn element_at(&self, mut index: u128, window: u64) -> GroupElement {
        let mut coords = SmallVec::with_capacity(self.leaves.len());
        for leaf in self.leaves.iter().rev() {
            let radix = leaf.order().unwrap_or(window as u128);
            coords.push((index % radix) as i64);
            index /= radix;
        }
        coords.reverse();
        GroupElement(coords)
    }

    /// Number of elements reachable by `element_at` for the given integer window.
    pub fn windowed_order(&self, window: u64) -> Option<u128> {
        self.leaves.iter().try_fold(1u128, |acc, l| {
            acc.checked_mul(l.order().unwrap_or(window as u128))
        })
    }

    /// All elements of a finite group in canonical order.
    pub fn elements(&self) -> Result<Vec<GroupElement>> {
        let n = self
            .order()
            .filter(|&n| n <= 1 << 24)
            .ok_or_else(|| Error::Precondition("group too large to enumerate".into()))?;
        Ok((0..n).map(|i| self.element_at(i, 1)).collect())
    }

    /// Reads an element from its JSON encoding.
    pub fn element_from_json(&self, v: &Value) -> Result<GroupElement> {
        let mut coords = SmallVec::new();
        read_element(&self.descriptor, v, &mut coords)?;
        let e = GroupElement(coords);
        if !self.contains(&e) {
            return Err(Error::NonCanonical(format!("{v} is not a canonical element of {}", self.descriptor)));
        }
        Ok(e)
    }

    pub fn element_to_json(&self, e: &GroupElement) -> Value {
        let mut i = 0;
        write_element(&self.descriptor, &e.0, &mut i)
    }
}

fn read_element(d: &GroupDescriptor, v: &Value, out: &mut SmallVec<[i64; 2]>) -> Result<()> {
    let bad = || Error::NonCanonical(format!("cannot read `{v}` as an element of {d}"));
    match d {
        GroupDescriptor::Product { factors } => {
            let arr = v.as_array().ok_or_else(bad)?;
            if arr.len() != factors.len() {
                return Err(bad());
            }
            for (f, x) in factors.iter().zip(arr) {
                read_element(f, x, out)?;
            }
            Ok(())
        }
        _ => {
            out.push(v.as_i64().ok_or_else(bad)?);
            Ok(())
        }
    }
}

fn write_element(d: &GroupDescriptor, coords: &[i64], i: &mut usize) -> Value {
    match d {
        GroupDescriptor::Product { factors } => {
            Value::Array(factors.iter().map(|f| write_element(f, coords, i)).collect())
        }
        _ => {
            let v = coords[*i];
            *i += 1;
            Value::from(v)
        }
    }
}

/// A finite subset of a group, kept sorted and duplicate free.
#[derive(Clone)]
pub struct FiniteSet {
    group: GroupRef,
    elements: Vec<GroupElement>,
    members: FxHashSet<GroupElement>,
}

impl PartialEq for FiniteSet {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.elements == other.elements
    }
}

impl fmt::Debug for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}", self.group.descriptor, self.elements)
    }
}

impl FiniteSet {
    /// Builds a set, sorting and removing duplicates. Elements must belong to the group.
    pub fn new(group: GroupRef, mut elements: Vec<GroupElement>) -> Result<Self> {
        if let Some(bad) = elements.iter().find(|e| !group.contains(e)) {
            return Err(Error::NonCanonical(format!("{bad:?} is not an element of {}", group.descriptor)));
        }
        elements.sort();
        elements.dedup();
        let members = elements.iter().cloned().collect();
        Ok(FiniteSet { group, elements, members })
    }

    /// Integer set in `Z`.
    pub fn integers<I: IntoIterator<Item = i64>>(values: I) -> Self {
        let els = values.into_iter().map(GroupElement::scalar).collect();
        Self::new(Group::integers(), els).expect("integers always valid")
    }

    /// Subset of a single-coordinate group given by its coordinate values.
    pub fn from_scalars<I: IntoIterator<Item = i64>>(group: GroupRef, values: I) -> Result<Self> {
        let els = values.into_iter().map(GroupElement::scalar).collect();
        Self::new(group, els)
    }

    pub fn empty(group: GroupRef) -> Self {
        FiniteSet { group, elements: Vec::new(), members: FxHashSet::default() }
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn iter(&self) -> std::slice::Iter<'_, GroupElement> {
        self.elements.iter()
    }

    pub fn contains(&self, e: &GroupElement) -> bool {
        self.members.contains(e)
    }

    fn same_group(&self, other: &FiniteSet) -> Result<()> {
        if self.group != other.group {
            Err(Error::GroupMismatch)
        } else {
            Ok(())
        }
    }

    fn collect(&self, els: impl IntoIterator<Item = GroupElement>) -> Self {
        let mut elements: Vec<GroupElement> = els.into_iter().collect();
        elements.sort();
        elements.dedup();
        let members = elements.iter().cloned().collect();
        FiniteSet { group: self.group.clone(), elements, members }
    }

    pub fn filter(&self, mut keep: impl FnMut(&GroupElement) -> bool) -> Self {
        self.collect(self.elements.iter().filter(|e| keep(e)).cloned())
    }

    pub fn union(&self, other: &FiniteSet) -> Result<Self> {
        self.same_group(other)?;
        Ok(self.collect(self.elements.iter().chain(other.iter()).cloned()))
    }

    pub fn intersection(&self, other: &FiniteSet) -> Result<Self> {
        self.same_group(other)?;
        Ok(self.filter(|e| other.contains(e)))
    }

    pub fn difference(&self, other: &FiniteSet) -> Result<Self> {
        self.same_group(other)?;
        Ok(self.filter(|e| !other.contains(e)))
    }

    /// `A + x`.
    pub fn translate(&self, x: &GroupElement) -> Self {
        self.collect(self.elements.iter().map(|a| self.group.add(a, x)))
    }

    /// `-A`.
    pub fn negate(&self) -> Self {
        self.collect(self.elements.iter().map(|a| self.group.neg(a)))
    }

    /// `A ∩ (A - x)`, the set of `a` with `a + x` in `A`.
    pub fn shift_intersection(&self, x: &GroupElement) -> Self {
        self.filter(|a| self.contains(&self.group.add(a, x)))
    }

    /// `A ∩ (A - s_1) ∩ ... ∩ (A - s_r)`.
    pub fn iterated_intersection(&self, shifts: &[GroupElement]) -> Self {
        self.filter(|a| shifts.iter().all(|s| self.contains(&self.group.add(a, s))))
    }

    pub fn sumset(&self, other: &FiniteSet) -> Result<Self> {
        self.same_group(other)?;
        let g = &self.group;
        Ok(self.collect(
            self.elements.iter().flat_map(|a| other.iter().map(move |b| g.add(a, b))),
        ))
    }

    pub fn diffset(&self, other: &FiniteSet) -> Result<Self> {
        self.same_group(other)?;
        let g = &self.group;
        Ok(self.collect(
            self.elements.iter().flat_map(|a| other.iter().map(move |b| g.sub(a, b))),
        ))
    }

    /// `nA - mA`.
    pub fn iterated_sumset(&self, n: usize, m: usize) -> Self {
        let mut acc = self.collect(std::iter::once(self.group.zero()));
        for _ in 0..n {
            acc = acc.sumset(self).expect("same group");
        }
        let neg = self.negate();
        for _ in 0..m {
            acc = acc.sumset(&neg).expect("same group");
        }
        acc
    }

    /// Cartesian power `A^k` inside the k-fold product group.
    pub fn cartesian_power(&self, k: usize) -> Result<Self> {
        let group = Group::new(GroupDescriptor::product(vec![self.group.descriptor.clone(); k]))?;
        let mut tuples: Vec<GroupElement> = vec![GroupElement::default()];
        for _ in 0..k {
            let mut next = Vec::with_capacity(tuples.len() * self.len());
            for t in &tuples {
                for a in &self.elements {
                    let mut c = t.0.clone();
                    c.extend_from_slice(&a.0);
                    next.push(GroupElement(c));
                }
            }
            tuples = next;
        }
        FiniteSet::new(group, tuples)
    }

    /// Diagonal `{(a, ..., a)}` of `A` in the k-fold product group.
    pub fn diagonal(&self, k: usize) -> Result<Self> {
        let group = Group::new(GroupDescriptor::product(vec![self.group.descriptor.clone(); k]))?;
        let els = self
            .elements
            .iter()
            .map(|a| {
                let mut c = SmallVec::new();
                for _ in 0..k {
                    c.extend_from_slice(&a.0);
                }
                GroupElement(c)
            })
            .collect();
        FiniteSet::new(group, els)
    }

    pub fn indicator(&self) -> GroupFunction<i128> {
        GroupFunction::from_pairs(self.group.clone(), self.elements.iter().map(|e| (e.clone(), 1)))
    }

    pub fn indicator_real(&self) -> GroupFunction<f64> {
        GroupFunction::from_pairs(self.group.clone(), self.elements.iter().map(|e| (e.clone(), 1.0)))
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "group": self.group.descriptor,
            "elements": self.elements.iter().map(|e| self.group.element_to_json(e)).collect::<Vec<_>>(),
        })
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let bytes = serde_json::to_vec(&self.to_json()).expect("serializable");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Reads the set file format; returns the set and loader warnings.
    pub fn from_json(v: &Value) -> Result<(Self, Vec<String>)> {
        let desc: GroupDescriptor = serde_json::from_value(
            v.get("group").cloned().ok_or_else(|| Error::Parse("missing `group`".into()))?,
        )
        .map_err(|e| Error::Parse(e.to_string()))?;
        let group = Group::new(desc)?;
        let raw = v
            .get("elements")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `elements` array".into()))?;
        let els = raw.iter().map(|x| group.element_from_json(x)).collect::<Result<Vec<_>>>()?;
        let mut warnings = Vec::new();
        if els.windows(2).any(|w| w[0] >= w[1]) {
            warnings.push("elements were not in canonical order or contained duplicates".into());
        }
        let set = FiniteSet::new(group, els)?;
        if set.len() != raw.len() {
            warnings.push(format!("removed {} duplicate elements", raw.len() - set.len()));
        }
        Ok((set, warnings))
    }
}

/// Values a group function may take.
pub trait Weight:
    num_traits::Num + Copy + Send + Sync + std::ops::AddAssign + fmt::Debug + PartialOrd + 'static
{
    fn to_f64(self) -> f64;
    fn abs_val(self) -> Self;
}

impl Weight for i128 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn abs_val(self) -> Self {
        self.abs()
    }
}

impl Weight for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn abs_val(self) -> Self {
        self.abs()
    }
}

/// A finitely supported function on a group. Zero values are never stored.
#[derive(Clone)]
pub struct GroupFunction<V: Weight> {
    group: GroupRef,
    values: FxHashMap<GroupElement, V>,
}

impl<V: Weight> fmt::Debug for GroupFunction<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.sorted()).finish()
    }
}

impl<V: Weight> PartialEq for GroupFunction<V> {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.values == other.values
    }
}

impl<V: Weight> GroupFunction<V> {
    pub fn zero(group: GroupRef) -> Self {
        GroupFunction { group, values: FxHashMap::default() }
    }

    pub fn from_pairs(group: GroupRef, pairs: impl IntoIterator<Item = (GroupElement, V)>) -> Self {
        let mut f = Self::zero(group);
        for (x, v) in pairs {
            f.add_at(x, v);
        }
        f
    }

    pub fn group(&self) -> &GroupRef {
        &self.group
    }

    pub fn get(&self, x: &GroupElement) -> V {
        self.values.get(x).copied().unwrap_or_else(V::zero)
    }

    pub fn add_at(&mut self, x: GroupElement, v: V) {
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

    pub fn set(&mut self, x: GroupElement, v: V) {
        if v == V::zero() {
            self.values.remove(&x);
        } else {
            self.values.insert(x, v);
        }
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &V)> {
        self.values.iter()
    }

    /// Entries in canonical element order.
    pub fn sorted(&self) -> Vec<(GroupElement, V)> {
        let mut v: Vec<_> = self.values.iter().map(|(k, v)| (k.clone(), *v)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn support(&self) -> FiniteSet {
        FiniteSet::new(self.group.clone(), self.values.keys().cloned().collect()).expect("valid")
    }

    pub fn total(&self) -> V {
        let mut s = V::zero();
        for (_, v) in self.sorted() {
            s += v;
        }
        s
    }

    pub fn map<W: Weight>(&self, f: impl Fn(V) -> W) -> GroupFunction<W> {
        GroupFunction::from_pairs(self.group.clone(), self.values.iter().map(|(k, v)| (k.clone(), f(*v))))
    }

    pub fn to_real(&self) -> GroupFunction<f64> {
        self.map(|v| v.to_f64())
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        GroupFunction {
            group: self.group.clone(),
            values: self.values.iter().map(|(k, v)| (self.group.neg(k), *v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn pointwise(&self, other: &GroupFunction<V>) -> Self {
        let (small, big) = if self.values.len() <= other.values.len() { (self, other) } else { (other, self) };
        GroupFunction::from_pairs(
            self.group.clone(),
            small.values.iter().map(|(k, v)| (k.clone(), *v * big.get(k))),
        )
    }

    /// Restriction to a set.
    pub fn restrict(&self, s: &FiniteSet) -> Self {
        GroupFunction::from_pairs(
            self.group.clone(),
            self.values.iter().filter(|(k, _)| s.contains(k)).map(|(k, v)| (k.clone(), *v)),
        )
    }

    /// `Σ f(x) g(x)`.
    pub fn inner(&self, other: &GroupFunction<V>) -> V {
        let (small, big) = if self.values.len() <= other.values.len() { (self, other) } else { (other, self) };
        let mut entries: Vec<_> = small.values.iter().collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        let mut s = V::zero();
        for (k, v) in entries {
            s += *v * big.get(k);
        }
        s
    }

    pub fn sum_of_squares(&self) -> V {
        self.inner(self)
    }

    pub fn max_abs(&self) -> V {
        self.values.values().fold(V::zero(), |m, v| {
            let a = v.abs_val();
            if a > m {
                a
            } else {
                m
            }
        })
    }

    /// The level set `{x : keep(f(x))}` within the support.
    pub fn level_set(&self, keep: impl Fn(V) -> bool) -> FiniteSet {
        let els = self.values.iter().filter(|(_, v)| keep(**v)).map(|(k, _)| k.clone()).collect();
        FiniteSet::new(self.group.clone(), els).expect("valid")
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "group": self.group.descriptor,
            "values": self.sorted().into_iter().map(|(k, v)| {
                serde_json::json!([self.group.element_to_json(&k), v.to_f64()])
            }).collect::<Vec<_>>(),
        })
    }
}

impl GroupFunction<f64> {
    /// Reads `{"group": ..., "values": [[element, value], ...]}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        let desc: GroupDescriptor = serde_json::from_value(
            v.get("group").cloned().ok_or_else(|| Error::Parse("missing `group`".into()))?,
        )
        .map_err(|e| Error::Parse(e.to_string()))?;
        let group = Group::new(desc)?;
        let raw = v
            .get("values")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing `values` array".into()))?;
        let mut f = GroupFunction::zero(group.clone());
        for pair in raw {
            let (e, w) = match pair.as_array().map(|a| a.as_slice()) {
                Some([e, w]) => (e, w),
                _ => return Err(Error::Parse(format!("bad weight entry {pair}"))),
            };
            let w = w.as_f64().ok_or_else(|| Error::Parse(format!("bad weight value {w}")))?;
            if !w.is_finite() {
                return Err(Error::Parse("weights must be finite reals".into()));
            }
            f.add_at(group.element_from_json(e)?, w);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_per_kind() {
        let z7 = Group::cyclic(7).unwrap();
        let a = GroupElement::scalar(5);
        let b = GroupElement::scalar(4);
        assert_eq!(z7.add(&a, &b), GroupElement::scalar(2));
        assert_eq!(z7.sub(&b, &a), GroupElement::scalar(6));
        let f = Group::cube(4).unwrap();
        assert_eq!(f.add(&GroupElement::scalar(0b1010), &GroupElement::scalar(0b0110)), GroupElement::scalar(0b1100));
        assert_eq!(f.neg(&GroupElement::scalar(0b1010)), GroupElement::scalar(0b1010));
    }

    #[test]
    fn sumsets_of_small_integer_set() {
        let a = FiniteSet::integers([0, 1, 3]);
        assert_eq!(a.sumset(&a).unwrap().len(), 6);
        assert_eq!(a.diffset(&a).unwrap().len(), 7);
    }

    #[test]
    fn loader_rejects_non_canonical_residue() {
        let v = serde_json::json!({"group": {"kind": "ZmodN", "modulus": 5}, "elements": [7]});
        assert!(matches!(FiniteSet::from_json(&v), Err(Error::NonCanonical(_))));
    }

    #[test]
    fn loader_dedups_and_sorts_with_warning() {
        let v = serde_json::json!({"group": {"kind": "Z"}, "elements": [3, 1, 1, 0]});
        let (s, w) = FiniteSet::from_json(&v).unwrap();
        assert_eq!(s, FiniteSet::integers([0, 1, 3]));
        assert!(!w.is_empty());
    }

    #[test]
    fn product_json_round_trip() {
        let g = Group::new(GroupDescriptor::parse("Z/4xF2^3xZ").unwrap()).unwrap();
        let s = FiniteSet::new(g, vec![GroupElement::from_coords(&[3, 5, -2]), GroupElement::from_coords(&[0, 0, 9])]).unwrap();
        let (back, warnings) = FiniteSet::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        assert!(warnings.is_empty());
    }

    #[test]
    fn descriptor_notation_round_trip() {
        for text in ["Z", "Z/12", "F2^5", "Z/3xZ/5", "F2^2xZ"] {
            assert_eq!(GroupDescriptor::parse(text).unwrap().to_string(), text);
        }
    }

    #[test]
    fn element_indexing_covers_group() {
        let g = Group::new(GroupDescriptor::parse("Z/3xF2^2").unwrap()).unwrap();
        let all = g.elements().unwrap();
        assert_eq!(all.len(), 12);
        let s = FiniteSet::new(g, all.clone()).unwrap();
        assert_eq!(s.len(), 12);
    }
}
