#![allow(dead_code)]

use std::collections::BTreeMap;

use hel::generators::gen_random;
use hel::{FiniteSet, GroupDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy)]
enum Leaf {
    Z,
    Mod(i64),
    Cube,
}

fn leaves(d: &GroupDescriptor) -> Vec<Leaf> {
    match d {
        GroupDescriptor::Integers => vec![Leaf::Z],
        GroupDescriptor::Cyclic { modulus } => vec![Leaf::Mod(*modulus as i64)],
        GroupDescriptor::Cube { .. } => vec![Leaf::Cube],
        GroupDescriptor::Product { factors } => factors.iter().flat_map(leaves).collect(),
    }
}

/// Group law written out per coordinate.
pub struct Law(Vec<Leaf>);

impl Law {
    pub fn of(set: &FiniteSet) -> Self {
        Law(leaves(set.group().descriptor()))
    }

    pub fn add(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        self.0
            .iter()
            .zip(x.iter().zip(y))
            .map(|(l, (a, b))| match l {
                Leaf::Z => a + b,
                Leaf::Mod(m) => (a + b).rem_euclid(*m),
                Leaf::Cube => a ^ b,
            })
            .collect()
    }

    pub fn neg(&self, x: &[i64]) -> Vec<i64> {
        self.0
            .iter()
            .zip(x)
            .map(|(l, a)| match l {
                Leaf::Z => -a,
                Leaf::Mod(m) => (-a).rem_euclid(*m),
                Leaf::Cube => *a,
            })
            .collect()
    }

    pub fn sub(&self, x: &[i64], y: &[i64]) -> Vec<i64> {
        self.add(x, &self.neg(y))
    }

    pub fn zero(&self) -> Vec<i64> {
        vec![0; self.0.len()]
    }
}

pub fn points(a: &FiniteSet) -> Vec<Vec<i64>> {
    a.iter().map(|e| e.coords().to_vec()).collect()
}

/// `x ↦ #{(a, b) ∈ A × B : a - b = x}` by enumerating pairs.
pub fn difference_counts(law: &Law, a: &[Vec<i64>], b: &[Vec<i64>]) -> BTreeMap<Vec<i64>, i128> {
    let mut m = BTreeMap::new();
    for x in a {
        for y in b {
            *m.entry(law.sub(x, y)).or_insert(0) += 1;
        }
    }
    m
}

/// Quadruples `a - a' = b - b'`, comparing every pair difference of `A` with every one of `B`.
pub fn energy_pair_quadruples(a: &FiniteSet, b: &FiniteSet) -> i128 {
    let law = Law::of(a);
    let diffs = |s: &FiniteSet| -> Vec<Vec<i64>> {
        let p = points(s);
        p.iter().flat_map(|x| p.iter().map(|y| law.sub(x, y))).collect()
    };
    let (da, db) = (diffs(a), diffs(b));
    let mut count = 0;
    for x in &da {
        for y in &db {
            if x == y {
                count += 1;
            }
        }
    }
    count
}

/// `Σ_x r_{A-A}(x) r_{B-B}(x)^{k-1}` with `r` from pair enumeration.
pub fn moment_pair(a: &FiniteSet, b: &FiniteSet, k: u32) -> i128 {
    let law = Law::of(a);
    let ra = difference_counts(&law, &points(a), &points(a));
    let rb = difference_counts(&law, &points(b), &points(b));
    ra.iter().map(|(x, v)| v * rb.get(x).copied().unwrap_or(0).pow(k - 1)).sum()
}

pub fn moment(a: &FiniteSet, k: u32) -> i128 {
    moment_pair(a, a, k)
}

fn tuple_sums(law: &Law, pts: &[Vec<i64>], k: usize) -> BTreeMap<Vec<i64>, i128> {
    let mut m = BTreeMap::new();
    m.insert(law.zero(), 1i128);
    for _ in 0..k {
        let mut next = BTreeMap::new();
        for (s, c) in &m {
            for p in pts {
                *next.entry(law.add(s, p)).or_insert(0) += c;
            }
        }
        m = next;
    }
    m
}

/// `k`-tuples summing to zero, by running over all tuples.
pub fn sigma(a: &FiniteSet, k: usize) -> i128 {
    let law = Law::of(a);
    let pts = points(a);
    let mut idx = vec![0usize; k];
    let mut count = 0;
    loop {
        let mut s = law.zero();
        for &i in &idx {
            s = law.add(&s, &pts[i]);
        }
        if s == law.zero() {
            count += 1;
        }
        let mut j = 0;
        loop {
            if j == k {
                return count;
            }
            idx[j] += 1;
            if idx[j] < pts.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// `T_k(A)`, counting pairs of `k`-tuples with equal sums.
pub fn t_energy(a: &FiniteSet, k: usize) -> i128 {
    let law = Law::of(a);
    tuple_sums(&law, &points(a), k).values().map(|c| c * c).sum()
}

pub fn descriptor_pool() -> Vec<GroupDescriptor> {
    vec![
        GroupDescriptor::Integers,
        GroupDescriptor::cyclic(37),
        GroupDescriptor::cyclic(64),
        GroupDescriptor::cube(6),
        GroupDescriptor::cube(9),
        GroupDescriptor::parse("Z/6xF2^3").unwrap(),
        GroupDescriptor::parse("Z/5xZ").unwrap(),
    ]
}

/// Seeded random set whose group kind cycles with `seed`.
pub fn random_set(seed: u64, max_size: usize) -> FiniteSet {
    let pool = descriptor_pool();
    let kinds = [0usize, 1, 3, 5, 2, 4, 6];
    let d = &pool[kinds[seed as usize % kinds.len()]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let n = rng.gen_range(1..=max_size);
    gen_random(d, n, seed).unwrap()
}

pub fn companion(seed: u64, a: &FiniteSet, max_size: usize) -> FiniteSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let n = rng.gen_range(1..=max_size);
    gen_random(a.group().descriptor(), n, seed.wrapping_add(7919)).unwrap()
}
