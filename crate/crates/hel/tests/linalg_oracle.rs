mod common;

use hel::convolution::autocorrelation;
use hel::linalg::{svd, symmetric_eigen, Matrix};
use hel::spectral::{build_operator, build_symmetric, OperatorKind};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn to_nalgebra(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.row(i)[j])
}

fn sorted_abs(mut v: Vec<f64>) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x = x.abs());
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn close(a: &[f64], b: &[f64], scale: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * scale.max(1.0))
}

#[test]
fn eigenvalues_of_interval_operator() {
    let a = hel::FiniteSet::integers(0..12);
    let op = build_symmetric(OperatorKind::SymDifference, &a, &autocorrelation(&a).to_real()).unwrap();
    let ours = symmetric_eigen(&op.matrix).unwrap();
    let theirs = to_nalgebra(&op.matrix).symmetric_eigen();
    let mut want: Vec<f64> = theirs.eigenvalues.iter().copied().collect();
    want.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    let scale = want[0].abs();
    assert!(close(&sorted_abs(ours.values.clone()), &sorted_abs(want), scale));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn jacobi_agrees_with_nalgebra(seed in 0u64..10_000) {
        let a = common::random_set(seed, 24);
        let w = autocorrelation(&a).to_real();
        let op = build_symmetric(OperatorKind::SymDifference, &a, &w).unwrap();
        let ours = symmetric_eigen(&op.matrix).unwrap();
        let theirs = to_nalgebra(&op.matrix).symmetric_eigen();
        let want = sorted_abs(theirs.eigenvalues.iter().copied().collect());
        let got = sorted_abs(ours.values.clone());
        prop_assert!(close(&got, &want, want[0]), "{:?} vs {:?}", got, want);
        let mut signed_ours = ours.values.clone();
        let mut signed_theirs: Vec<f64> = theirs.eigenvalues.iter().copied().collect();
        signed_ours.sort_by(|x, y| x.partial_cmp(y).unwrap());
        signed_theirs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        prop_assert!(close(&signed_ours, &signed_theirs, want[0]));
    }

    #[test]
    fn one_sided_jacobi_agrees_with_nalgebra(seed in 0u64..10_000) {
        let a = common::random_set(seed, 20);
        let b = common::companion(seed, &a, 20);
        let (a, b) = if b.len() <= a.len() { (a, b) } else { (b, a) };
        let g = a.diffset(&b).unwrap().indicator_real();
        let op = build_operator(OperatorKind::Difference, &a, &b, &g).unwrap();
        let ours = svd(&op.matrix).unwrap();
        let theirs = to_nalgebra(&op.matrix).svd(false, false);
        let want = sorted_abs(theirs.singular_values.iter().copied().collect());
        prop_assert!(close(&ours.values, &want, want[0]), "{:?} vs {:?}", ours.values, want);
    }
}
