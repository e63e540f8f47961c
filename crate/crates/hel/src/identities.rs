//! Exact identities between convolutions, generalized convolutions and energies.
//!
//! Iterated correlations associate to the right: `f_0 ∘ f_1 ∘ f_2 = f_0 ∘ (f_1 ∘ f_2)`.

use crate::convolution::{
    autocorrelation, convolve, correlate, generalized_convolution, set_convolution, set_correlation,
    tensor_power, Tuple, TupleFunction,
};
use crate::energy::energy_moment_pair_int;
use crate::error::{Error, Result};
use crate::group::{FiniteSet, GroupFunction};
use crate::relation::Relation;

/// `E(A,B) = Σ (A*B)^2 = Σ (A∘B)^2 = Σ (A∘A)(B∘B)`.
pub fn energy_convolution_relations(a: &FiniteSet, b: &FiniteSet) -> Result<Vec<Relation>> {
    let conv = set_convolution(a, b)?.sum_of_squares();
    let corr = set_correlation(a, b)?.sum_of_squares();
    let mixed = autocorrelation(a).inner(&autocorrelation(b));
    Ok(vec![
        Relation::equal("convolution and correlation squares", conv, corr),
        Relation::equal("correlation squares and autocorrelation product", corr, mixed),
    ])
}

fn same<V>(v: &[V]) -> Vec<&V> {
    v.iter().collect()
}

/// `Σ_x C_l(F)(x) C_l(G)(x) = Σ_z Π_i (f_i ∘ g_i)(z)`.
pub fn scalar_product_relation(fs: &[GroupFunction<i128>], gs: &[GroupFunction<i128>]) -> Result<Relation> {
    if fs.len() != gs.len() || fs.len() < 2 {
        return Err(Error::Precondition("scalar product needs two families of equal length l ≥ 2".into()));
    }
    let lhs = generalized_convolution(&same(fs))?.inner(&generalized_convolution(&same(gs))?);
    let corrs = fs.iter().zip(gs).map(|(f, g)| correlate(f, g)).collect::<Result<Vec<_>>>()?;
    let rhs = pointwise_product_total(&corrs);
    Ok(Relation::equal(format!("scalar product, l = {}", fs.len()), lhs, rhs))
}

fn pointwise_product_total(fs: &[GroupFunction<i128>]) -> i128 {
    let mut acc = fs[0].clone();
    for f in &fs[1..] {
        acc = acc.pointwise(f);
    }
    acc.total()
}

fn c_l(f: &GroupFunction<i128>, l: usize) -> Result<TupleFunction<i128>> {
    let fs = vec![f; l];
    generalized_convolution(&fs)
}

/// `Σ_x Π_j C_l(f_j)(x) = Σ_y C_k(f_0, …, f_{k-1})(y)^l`.
pub fn multi_scalar_relation(fs: &[GroupFunction<i128>], l: usize) -> Result<Relation> {
    let k = fs.len();
    if k < 2 || l < 2 {
        return Err(Error::Precondition("multi-scalar product needs k, l ≥ 2".into()));
    }
    let cs = fs.iter().map(|f| c_l(f, l)).collect::<Result<Vec<_>>>()?;
    let (small, rest) = smallest_first(&cs);
    let lhs: i128 = small.iter().map(|(x, v)| rest.iter().fold(*v, |acc, c| acc * c.get(x))).sum();
    let rhs = generalized_convolution(&same(fs))?.power_sum(l as u32);
    Ok(Relation::equal(format!("multi-scalar product, k = {k}, l = {l}"), lhs, rhs))
}

fn smallest_first<'a>(cs: &'a [TupleFunction<i128>]) -> (&'a TupleFunction<i128>, Vec<&'a TupleFunction<i128>>) {
    let idx = (0..cs.len()).min_by_key(|&i| cs[i].support_len()).unwrap_or(0);
    (&cs[idx], cs.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, c)| c).collect())
}

/// `Σ_x C_l(f_0)(x) (C_l(f_1) ∘ … ∘ C_l(f_{k-1}))(x) = Σ_z (f_0 ∘ … ∘ f_{k-1})(z)^l`, `k ∈ {2, 3}`.
pub fn sigma_c_relation(fs: &[GroupFunction<i128>], l: usize) -> Result<Relation> {
    let k = fs.len();
    if !(2..=3).contains(&k) || l < 2 {
        return Err(Error::Precondition("needs k ∈ {2, 3} and l ≥ 2".into()));
    }
    let cs = fs.iter().map(|f| c_l(f, l)).collect::<Result<Vec<_>>>()?;
    let tail = if k == 2 { cs[1].clone() } else { cs[1].correlate(&cs[2])? };
    let lhs = cs[0].inner(&tail);
    let mut chain = fs[k - 1].clone();
    for f in fs[..k - 1].iter().rev() {
        chain = correlate(f, &chain)?;
    }
    let rhs: i128 = chain.iter().map(|(_, v)| v.pow(l as u32)).sum();
    Ok(Relation::equal(format!("sigma for C_l, k = {k}, l = {l}"), lhs, rhs))
}

/// `Σ_{s,t} E(A_s, A_t) = E_{k+l}(A)` over shift tuples of lengths `k - 1` and `l - 1`.
pub fn ek_identity_relation(a: &FiniteSet, k: usize, l: usize) -> Result<Relation> {
    if k == 0 || l == 0 {
        return Err(Error::Precondition("needs k, l ≥ 1".into()));
    }
    let shift_sets = |m: usize| -> Result<Vec<FiniteSet>> {
        if m == 1 {
            return Ok(vec![a.clone()]);
        }
        let c = crate::convolution::set_generalized_convolution(a, m)?;
        Ok(c.sorted().into_iter().map(|(s, _)| a.iterated_intersection(&s)).collect())
    };
    let left = shift_sets(k)?;
    let right = if k == l { left.clone() } else { shift_sets(l)? };
    let mut lhs = 0i128;
    for s in &left {
        for t in &right {
            lhs += crate::energy::energy_pair(s, t)?;
        }
    }
    let rhs = crate::energy::energy_moment_int(a, (k + l) as u32);
    Ok(Relation::equal(format!("shift energy sum, k = {k}, l = {l}"), lhs, rhs))
}

/// `E_{k+1}(A,B) = Σ_x C_{k+1}(A,B,…,B)(x)^2 = E(Δ_k(A), B^k)`.
pub fn energy_delta_relations(a: &FiniteSet, b: &FiniteSet, k: usize) -> Result<Vec<Relation>> {
    if k == 0 {
        return Err(Error::Precondition("needs k ≥ 1".into()));
    }
    let ek = energy_moment_pair_int(a, b, (k + 1) as u32)?;
    let ia = a.indicator();
    let ib = b.indicator();
    let mut fs = vec![&ia];
    fs.extend(std::iter::repeat(&ib).take(k));
    let squares = generalized_convolution(&fs)?.sum_of_squares();
    let delta = a.diagonal(k)?;
    let power = b.cartesian_power(k)?;
    let product = crate::energy::energy_pair(&delta, &power)?;
    Ok(vec![
        Relation::equal(format!("moment and generalized convolution squares, k = {k}"), ek, squares),
        Relation::equal(format!("diagonal energy, k = {k}"), squares, product),
    ])
}

fn mismatches(f: &GroupFunction<i128>, g: &GroupFunction<i128>) -> i128 {
    let mut bad = f.iter().filter(|(x, v)| g.get(x) != **v).count();
    bad += g.iter().filter(|(x, _)| f.get(x) == 0).count();
    bad as i128
}

/// `(g∘f)^⊗ = g^⊗ ∘ f^⊗` and `(g*f)^⊗ = g^⊗ * f^⊗`, as mismatch counts.
pub fn tensor_convolution_relations(f: &GroupFunction<i128>, g: &GroupFunction<i128>, t: usize) -> Result<Vec<Relation>> {
    let (ft, gt) = (tensor_power(f, t)?, tensor_power(g, t)?);
    let corr = mismatches(&tensor_power(&correlate(g, f)?, t)?, &correlate(&gt, &ft)?);
    let conv = mismatches(&tensor_power(&convolve(g, f)?, t)?, &convolve(&gt, &ft)?);
    Ok(vec![
        Relation::equal(format!("tensor correlation mismatches, t = {t}"), corr, 0i128),
        Relation::equal(format!("tensor convolution mismatches, t = {t}"), conv, 0i128),
    ])
}

/// `C_k(f_0^⊗, …, f_{k-1}^⊗) = C_k(f_0, …, f_{k-1})^⊗`, as a mismatch count.
pub fn tensor_c_relation(fs: &[GroupFunction<i128>], t: usize) -> Result<Relation> {
    let base = generalized_convolution(&same(fs))?;
    let powers = fs.iter().map(|f| tensor_power(f, t)).collect::<Result<Vec<_>>>()?;
    let lifted = generalized_convolution(&same(&powers))?;
    let rank = fs[0].group().rank();
    let mut bad = 0i128;
    let mut nonzero = 0u128;
    for (x, v) in lifted.iter() {
        let mut prod = 1i128;
        for j in 0..t {
            let slot: Tuple = x
                .iter()
                .map(|e| crate::group::GroupElement::from_coords(&e.coords()[j * rank..(j + 1) * rank]))
                .collect();
            prod *= base.get(&slot);
        }
        if prod != *v {
            bad += 1;
        }
        nonzero += 1;
    }
    let expected = (base.support_len() as u128).pow(t as u32);
    if expected != nonzero {
        bad += (expected as i128 - nonzero as i128).abs();
    }
    Ok(Relation::equal(format!("tensor generalized convolution mismatches, k = {}, t = {t}", fs.len()), bad, 0i128))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    fn ok(r: &Relation) {
        assert_eq!(r.passes(), Some(true), "{r:?}");
    }

    #[test]
    fn identities_on_small_sets() {
        let a = FiniteSet::integers([0, 1, 3]);
        let b = FiniteSet::integers([0, 2, 7, 8]);
        energy_convolution_relations(&a, &b).unwrap().iter().for_each(ok);
        let fs = vec![a.indicator(), b.indicator(), a.indicator()];
        let gs = vec![b.indicator(), b.indicator(), a.indicator()];
        for l in 2..=3 {
            ok(&scalar_product_relation(&fs[..l], &gs[..l]).unwrap());
            for k in 2..=3 {
                ok(&multi_scalar_relation(&fs[..k], l).unwrap());
                ok(&sigma_c_relation(&fs[..k], l).unwrap());
            }
        }
        let r = ek_identity_relation(&FiniteSet::integers([0, 1]), 2, 2).unwrap();
        assert_eq!(r.lhs, 18i128.into());
        ok(&r);
        assert_eq!(ek_identity_relation(&a, 2, 1).unwrap().rhs, 33i128.into());
        energy_delta_relations(&a, &b, 2).unwrap().iter().for_each(ok);
        tensor_convolution_relations(&a.indicator(), &b.indicator(), 2).unwrap().iter().for_each(ok);
        ok(&tensor_c_relation(&fs[..3], 2).unwrap());
    }

    #[test]
    fn identities_in_products() {
        let g = Group::new(crate::group::GroupDescriptor::parse("Z/5xF2^2").unwrap()).unwrap();
        let a = FiniteSet::new(g.clone(), vec![g.element_at(1, 1), g.element_at(6, 1), g.element_at(11, 1)]).unwrap();
        let b = FiniteSet::new(g.clone(), vec![g.element_at(0, 1), g.element_at(7, 1)]).unwrap();
        ok(&tensor_c_relation(&[a.indicator(), b.indicator()], 2).unwrap());
        energy_delta_relations(&a, &b, 2).unwrap().iter().for_each(ok);
    }
}
