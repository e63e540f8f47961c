//! Convolution operators `T^g_{A,B}`, `T̃^g_{A,B}`, `T^g_A`, `T̃^g_A` and their spectra.
//!
//! Rows are indexed by `A`, columns by `B`, both in canonical element order.

use serde::Serialize;

use crate::convolution::{autocorrelation, convolve, correlate, generalized_convolution_at, tensor_power, tensor_power_set};
use crate::error::{cap, Error, Result};
use crate::group::{FiniteSet, GroupElement, GroupFunction};
use crate::linalg::{dot, norm, symmetric_eigen, svd, Matrix};
use crate::relation::Relation;

/// Largest operator dimension accepted.
pub const OPERATOR_CAP: usize = 2048;
/// Largest `|A|^t` accepted by the tensor-power check.
pub const TENSOR_OPERATOR_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    /// `T^g_{A,B}(x, y) = g(x - y) A(x) B(y)`.
    Difference,
    /// `T̃^g_{A,B}(x, y) = g(x + y) A(x) B(y)`.
    Sum,
    /// `T^g_A`, the difference operator with `B = A`.
    SymDifference,
    /// `T̃^g_A`, the sum operator with `B = A`.
    SymSum,
}

impl OperatorKind {
    pub fn is_symmetric(self) -> bool {
        matches!(self, OperatorKind::SymDifference | OperatorKind::SymSum)
    }

    fn uses_sum(self) -> bool {
        matches!(self, OperatorKind::Sum | OperatorKind::SymSum)
    }
}

#[derive(Clone, Debug)]
pub struct Operator {
    pub kind: OperatorKind,
    pub rows: FiniteSet,
    pub cols: FiniteSet,
    pub weight: GroupFunction<f64>,
    pub matrix: Matrix,
}

/// Builds a rectangular operator. Requires `|B| ≤ |A|`.
pub fn build_operator(kind: OperatorKind, a: &FiniteSet, b: &FiniteSet, g: &GroupFunction<f64>) -> Result<Operator> {
    if kind.is_symmetric() {
        return build_symmetric(kind, a, g);
    }
    if b.len() > a.len() {
        return Err(Error::Precondition("rectangular operators need |B| ≤ |A|".into()));
    }
    raw_operator(kind, a, b, g)
}

/// Builds `T^g_A` or `T̃^g_A`. The difference form requires an even weight.
pub fn build_symmetric(kind: OperatorKind, a: &FiniteSet, g: &GroupFunction<f64>) -> Result<Operator> {
    let kind = match kind {
        OperatorKind::Difference => OperatorKind::SymDifference,
        OperatorKind::Sum => OperatorKind::SymSum,
        k => k,
    };
    if kind == OperatorKind::SymDifference {
        let grp = g.group();
        let scale = g.max_abs();
        if g.iter().any(|(x, v)| (g.get(&grp.neg(x)) - v).abs() > 1e-12 * scale) {
            return Err(Error::Precondition("T^g_A is hermitian only for even real g".into()));
        }
    }
    raw_operator(kind, a, a, g)
}

/// Builds the matrix without the size convention on `B`.
pub(crate) fn raw_operator(kind: OperatorKind, a: &FiniteSet, b: &FiniteSet, g: &GroupFunction<f64>) -> Result<Operator> {
    if a.group() != b.group() || a.group() != g.group() {
        return Err(Error::GroupMismatch);
    }
    cap("operator rows", a.len(), OPERATOR_CAP)?;
    cap("operator columns", b.len(), OPERATOR_CAP)?;
    let grp = a.group();
    let xs = a.elements();
    let ys = b.elements();
    let matrix = Matrix::from_fn(xs.len(), ys.len(), |i, j| {
        let z = if kind.uses_sum() { grp.add(&xs[i], &ys[j]) } else { grp.sub(&xs[i], &ys[j]) };
        g.get(&z)
    });
    Ok(Operator { kind, rows: a.clone(), cols: b.clone(), weight: g.clone(), matrix })
}

/// Eigen- or singular decomposition of an operator.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralDecomposition {
    pub symmetric: bool,
    /// Eigenvalues ordered by `|μ|`, or singular values in decreasing order.
    pub values: Vec<f64>,
    /// Eigenfunctions, or left singular functions on `A`.
    pub left: Vec<Vec<f64>>,
    /// Eigenfunctions, or right singular functions on `B`.
    pub right: Vec<Vec<f64>>,
    /// `g_α = Σ_x f_α(x)`.
    pub means: Vec<f64>,
    pub sweeps: usize,
}

impl SpectralDecomposition {
    pub fn main_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn main_vector(&self) -> &[f64] {
        &self.left[0]
    }
}

/// Rotates a degenerate top eigenspace so that its first vector is the projection of `1`,
/// the non-negative Perron vector of a non-negative matrix.
fn perron_basis(values: &[f64], vectors: &mut [Vec<f64>]) {
    let Some(&top) = values.first() else { return };
    if top <= 0.0 {
        return;
    }
    let m = values.iter().take_while(|&&v| (v - top).abs() <= 1e-9 * top).count();
    if m < 2 {
        return;
    }
    let dim = vectors[0].len();
    let mut p = vec![0.0; dim];
    for v in &vectors[..m] {
        let c: f64 = v.iter().sum();
        p.iter_mut().zip(v).for_each(|(x, y)| *x += c * y);
    }
    let pn = norm(&p);
    if pn == 0.0 {
        return;
    }
    p.iter_mut().for_each(|x| *x /= pn);
    let mut basis = vec![p];
    for v in vectors[..m].iter() {
        if basis.len() == m {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let d = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let wn = norm(&w);
        if wn > 1e-6 {
            basis.push(w.into_iter().map(|x| x / wn).collect());
        }
    }
    if basis.len() == m {
        vectors[..m].clone_from_slice(&basis);
    }
}

impl Operator {
    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        if self.kind.is_symmetric() {
            let mut e = symmetric_eigen(&self.matrix)?;
            if self.matrix.entries().iter().all(|&x| x >= 0.0) {
                perron_basis(&e.values, &mut e.vectors);
            }
            let means = e.vectors.iter().map(|v| v.iter().sum()).collect();
            Ok(SpectralDecomposition {
                symmetric: true,
                values: e.values,
                left: e.vectors.clone(),
                right: e.vectors,
                means,
                sweeps: e.sweeps,
            })
        } else {
            let s = svd(&self.matrix)?;
            let means = s.left.iter().map(|v| v.iter().sum()).collect();
            Ok(SpectralDecomposition {
                symmetric: false,
                values: s.values,
                left: s.left,
                right: s.right,
                means,
                sweeps: s.sweeps,
            })
        }
    }

    /// `μ_0` or `λ_0`.
    pub fn main_value(&self) -> Result<f64> {
        Ok(self.decompose()?.main_value())
    }
}

/// `μ_0(T^g_A)`.
pub fn main_eigenvalue(a: &FiniteSet, g: &GroupFunction<f64>) -> Result<f64> {
    build_symmetric(OperatorKind::SymDifference, a, g)?.main_value()
}

fn max_orthonormality_error(vs: &[Vec<f64>]) -> f64 {
    let mut err = 0.0f64;
    for i in 0..vs.len() {
        for j in 0..=i {
            let want = if i == j { 1.0 } else { 0.0 };
            err = err.max((dot(&vs[i], &vs[j]) - want).abs());
        }
    }
    err
}

fn reconstruct(dec: &SpectralDecomposition, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for (k, &s) in dec.values.iter().enumerate() {
        for i in 0..rows {
            let ui = s * dec.left[k][i];
            if ui == 0.0 {
                continue;
            }
            for j in 0..cols {
                m[(i, j)] += ui * dec.right[k][j];
            }
        }
    }
    m
}

/// Orthonormality, reconstruction and trace laws of a decomposition.
pub fn audit(op: &Operator, dec: &SpectralDecomposition) -> Vec<Relation> {
    let mut out = Vec::new();
    let n = op.matrix.frobenius();
    out.push(Relation::at_most("orthonormality.left", max_orthonormality_error(&dec.left), 1e-9).with_tol(0.0));
    out.push(Relation::at_most("orthonormality.right", max_orthonormality_error(&dec.right), 1e-9).with_tol(0.0));
    let rec = reconstruct(dec, op.matrix.rows(), op.matrix.cols()).sub(&op.matrix).frobenius();
    out.push(Relation::at_most("reconstruction", rec, 1e-9 * n.max(f64::MIN_POSITIVE)).with_tol(0.0));
    out.extend(trace_laws(op, dec));
    out
}

/// Trace laws for the operator kind.
pub fn trace_laws(op: &Operator, dec: &SpectralDecomposition) -> Vec<Relation> {
    let g = &op.weight;
    let grp = op.rows.group();
    let a = op.rows.indicator_real();
    let sq = g.map(|v| v * v);
    let sum2: f64 = dec.values.iter().map(|x| x * x).sum();
    let sum4: f64 = dec.values.iter().map(|x| x.powi(4)).sum();
    let gram_norm = {
        let mt = op.matrix.transpose();
        op.matrix.matmul(&mt).frobenius().powi(2)
    };
    let mut out = Vec::new();
    match op.kind {
        OperatorKind::Difference | OperatorKind::Sum => {
            let direct: f64 = op.matrix.entries().iter().map(|x| x * x).sum();
            out.push(Relation::equal("sum of squared singular values", sum2, direct));
            let fourth_formula = c3_gram_sum(op);
            out.push(Relation::equal("sum of fourth powers via C_3", sum4, fourth_formula).with_scale(sum4));
            out.push(Relation::equal("sum of fourth powers via row products", sum4, gram_norm).with_scale(sum4));
        }
        OperatorKind::SymDifference => {
            let trace: f64 = dec.values.iter().sum();
            let scale: f64 = dec.values.iter().map(|x| x.abs()).sum();
            out.push(Relation::equal("sum of eigenvalues", trace, g.get(&grp.zero()) * op.rows.len() as f64).with_scale(scale));
            let ac = autocorrelation(&op.rows).to_real();
            out.push(Relation::equal("sum of squared eigenvalues", sum2, sq.inner(&ac)));
            out.push(Relation::equal("sum of fourth powers via row products", sum4, gram_norm).with_scale(sum4));
        }
        OperatorKind::SymSum => {
            let trace: f64 = dec.values.iter().sum();
            let scale: f64 = dec.values.iter().map(|x| x.abs()).sum();
            let formula: f64 = op.rows.iter().map(|x| g.get(&grp.add(x, x))).sum();
            out.push(Relation::equal("sum of eigenvalues", trace, formula).with_scale(scale));
            let conv = convolve(&a, &a).expect("same group");
            out.push(Relation::equal("sum of squared eigenvalues", sum2, sq.inner(&conv)));
            out.push(Relation::equal("sum of fourth powers via row products", sum4, gram_norm).with_scale(sum4));
        }
    }
    out
}

/// Column Gram entry from `C_3`: `B(y) B(y') C_3(A, g, g)(∓y, ∓y')`.
fn column_gram_entry(op: &Operator, a: &GroupFunction<f64>, y: &GroupElement, y2: &GroupElement) -> f64 {
    let grp = op.rows.group();
    let g = &op.weight;
    if op.kind.uses_sum() {
        generalized_convolution_at(&[a, g, g], &[y.clone(), y2.clone()])
    } else {
        generalized_convolution_at(&[a, g, g], &[grp.neg(y), grp.neg(y2)])
    }
}

fn c3_gram_sum(op: &Operator) -> f64 {
    let a = op.rows.indicator_real();
    let ys = op.cols.elements();
    let mut s = 0.0;
    for y in ys {
        for y2 in ys {
            s += column_gram_entry(op, &a, y, y2).powi(2);
        }
    }
    s
}

/// Gram matrices of a rectangular operator against their `C_3` expressions.
pub fn gram_identities(op: &Operator) -> Vec<Relation> {
    let m = &op.matrix;
    let grp = op.rows.group();
    let g = &op.weight;
    let a = op.rows.indicator_real();
    let b = op.cols.indicator_real();
    let cols_gram = m.transpose().matmul(m);
    let rows_gram = m.matmul(&m.transpose());
    let ys = op.cols.elements();
    let xs = op.rows.elements();
    let scale = cols_gram.entries().iter().chain(rows_gram.entries()).fold(0.0f64, |s, x| s.max(x.abs()));
    let mut col_err = 0.0f64;
    for (i, y) in ys.iter().enumerate() {
        for (j, y2) in ys.iter().enumerate() {
            col_err = col_err.max((cols_gram[(i, j)] - column_gram_entry(op, &a, y, y2)).abs());
        }
    }
    let gc = g.reflect();
    let mut row_err = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        for (j, x2) in xs.iter().enumerate() {
            let formula = if op.kind.uses_sum() {
                generalized_convolution_at(&[&b, g, g], &[x.clone(), x2.clone()])
            } else {
                generalized_convolution_at(&[&b, &gc, &gc], &[grp.neg(x), grp.neg(x2)])
            };
            row_err = row_err.max((rows_gram[(i, j)] - formula).abs());
        }
    }
    let (col_label, row_label) = if op.kind.uses_sum() {
        ("column Gram of the sum operator", "row Gram of the sum operator")
    } else {
        ("column Gram of the difference operator", "row Gram of the difference operator")
    };
    vec![
        Relation::at_most(col_label, col_err, 1e-9 * scale.max(1.0)).with_tol(0.0),
        Relation::at_most(row_label, row_err, 1e-9 * scale.max(1.0)).with_tol(0.0),
    ]
}

/// Rank-one structure of `T^{A-B}_{A,B}` or `T̃^{A+B}_{A,B}`.
pub fn rank_one_relations(a: &FiniteSet, b: &FiniteSet, sum: bool) -> Result<Vec<Relation>> {
    let cover = if sum { a.sumset(b)? } else { a.diffset(b)? };
    let kind = if sum { OperatorKind::Sum } else { OperatorKind::Difference };
    let op = build_operator(kind, a, b, &cover.indicator_real())?;
    let dec = op.decompose()?;
    let l0 = dec.main_value();
    let want = ((a.len() * b.len()) as f64).sqrt();
    let rest = dec.values.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
    let ua = 1.0 / (a.len() as f64).sqrt();
    let vb = 1.0 / (b.len() as f64).sqrt();
    let u_err = dec.left[0].iter().fold(0.0f64, |m, v| m.max((v - ua).abs()));
    let v_err = dec.right[0].iter().fold(0.0f64, |m, v| m.max((v - vb).abs()));
    let tag = if sum { "sum" } else { "difference" };
    Ok(vec![
        Relation::equal(format!("{tag}: main singular value"), l0, want),
        Relation::at_most(format!("{tag}: other singular values"), rest, 1e-9 * l0).with_tol(0.0),
        Relation::at_most(format!("{tag}: main left function"), u_err, 1e-9).with_tol(0.0),
        Relation::at_most(format!("{tag}: main right function"), v_err, 1e-9).with_tol(0.0),
    ])
}

/// Rank-one structure of `T^{A-A}_A` and `T̃^{A+A}_A`.
pub fn symmetric_rank_one_relations(a: &FiniteSet, sum: bool) -> Result<Vec<Relation>> {
    let (kind, cover) = if sum {
        (OperatorKind::SymSum, a.sumset(a)?)
    } else {
        (OperatorKind::SymDifference, a.diffset(a)?)
    };
    let op = build_symmetric(kind, a, &cover.indicator_real())?;
    let dec = op.decompose()?;
    let m0 = dec.main_value();
    let rest = dec.values.iter().skip(1).fold(0.0f64, |m, v| m.max(v.abs()));
    let fa = 1.0 / (a.len() as f64).sqrt();
    let f_err = dec.left[0].iter().fold(0.0f64, |m, v| m.max((v - fa).abs()));
    let tag = if sum { "sum" } else { "difference" };
    Ok(vec![
        Relation::equal(format!("{tag}: main eigenvalue"), m0, a.len() as f64),
        Relation::at_most(format!("{tag}: other eigenvalues"), rest, 1e-9 * m0).with_tol(0.0),
        Relation::at_most(format!("{tag}: main eigenfunction"), f_err, 1e-9).with_tol(0.0),
    ])
}

/// Perron–Frobenius properties of a nonnegative symmetric matrix.
pub fn perron_frobenius_relations(m: &Matrix) -> Result<Vec<Relation>> {
    if m.entries().iter().any(|&x| x < 0.0) {
        return Err(Error::Precondition("Perron–Frobenius check needs a nonnegative matrix".into()));
    }
    let e = symmetric_eigen(m)?;
    let mu0 = e.values[0];
    let others = e.values.iter().skip(1).fold(0.0f64, |s, v| s.max(v.abs()));
    let v = &e.vectors[0];
    let vmax = v.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    let vmin = v.iter().fold(f64::INFINITY, |s, &x| s.min(x));
    Ok(vec![
        Relation::at_most("main eigenvalue is nonnegative", 0.0, mu0),
        Relation::at_most("main eigenvalue dominates", others, mu0),
        Relation::at_most("main eigenvector is nonnegative", -vmin, 1e-9 * vmax).with_tol(0.0),
    ])
}

/// `E(A) / |A| ≤ μ_0(T^{A∘A}_A)`.
pub fn rayleigh_relation(a: &FiniteSet) -> Result<Relation> {
    let ac = autocorrelation(a);
    let mu0 = main_eigenvalue(a, &ac.to_real())?;
    Ok(Relation::at_most("energy over size at most main eigenvalue", ac.sum_of_squares() as f64 / a.len() as f64, mu0))
}

/// Singular values of `T^g_{A,A}` are the moduli of the eigenvalues of `T^g_A`.
pub fn rect_vs_symmetric(a: &FiniteSet, g: &GroupFunction<f64>) -> Result<Relation> {
    let sym = build_symmetric(OperatorKind::SymDifference, a, g)?.decompose()?;
    let rect = raw_operator(OperatorKind::Difference, a, a, g)?.decompose()?;
    let mut moduli: Vec<f64> = sym.values.iter().map(|v| v.abs()).collect();
    moduli.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let err = moduli.iter().zip(&rect.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(Relation::at_most("singular values match eigenvalue moduli", err, 1e-9 * sym.main_value().abs().max(1.0)).with_tol(0.0))
}

/// Eigenvalue/mean identities for `T^g_A`, plus the cubic lower bound for nonnegative `g`.
pub fn mean_identities(a: &FiniteSet, g: &GroupFunction<f64>) -> Result<Vec<Relation>> {
    let op = build_symmetric(OperatorKind::SymDifference, a, g)?;
    let dec = op.decompose()?;
    let ac = autocorrelation(a).to_real();
    let lhs1: f64 = dec.values.iter().zip(&dec.means).map(|(m, s)| m * s * s).sum();
    let rhs1 = g.inner(&ac);
    let scale1: f64 = dec.values.iter().zip(&dec.means).map(|(m, s)| (m * s * s).abs()).sum();
    let lhs2: f64 = dec.values.iter().zip(&dec.means).map(|(m, s)| m * m * s * s).sum();
    let ga = correlate(g, &a.indicator_real())?;
    let rhs2: f64 = a.iter().map(|x| ga.get(x).powi(2)).sum();
    let mut out = vec![
        Relation::equal("first moment of means", lhs1, rhs1).with_scale(scale1),
        Relation::equal("second moment of means", lhs2, rhs2),
    ];
    let nonneg_even = g.iter().all(|(_, &v)| v >= 0.0);
    if nonneg_even {
        let lhs3 = rhs1.powi(3) / (a.len() as f64).powi(2);
        let rhs3: f64 = dec.values.iter().zip(&dec.means).map(|(m, s)| m.powi(3) * s * s).sum();
        out.push(Relation::at_most("cubic moment of means", lhs3, rhs3));
        out.push(carbery_relation(&op.matrix));
    }
    Ok(out)
}

/// Carbery's inequality for a nonnegative matrix with `f_1 = f_2 = 1`.
pub fn carbery_relation(t: &Matrix) -> Relation {
    let (r, c) = (t.rows(), t.cols());
    let row_sums: Vec<f64> = (0..r).map(|i| t.row(i).iter().sum()).collect();
    let col_sums: Vec<f64> = (0..c).map(|j| (0..r).map(|i| t[(i, j)]).sum()).collect();
    let total: f64 = row_sums.iter().sum();
    let mut weighted = 0.0;
    for i in 0..r {
        for j in 0..c {
            weighted += t[(i, j)] * row_sums[i] * col_sums[j];
        }
    }
    Relation::at_most("Carbery inequality", total.powi(3), (r as f64) * (c as f64) * weighted)
}

/// Spectrum of `T^{g^{⊗t}}_{A^t}` against `t`-fold products of the spectrum of `T^g_A`.
pub fn tensor_operator_relation(a: &FiniteSet, g: &GroupFunction<f64>, t: usize) -> Result<Relation> {
    let total = a.len().checked_pow(t as u32).unwrap_or(usize::MAX);
    cap("tensor operator dimension", total, TENSOR_OPERATOR_CAP)?;
    let base = build_symmetric(OperatorKind::SymDifference, a, g)?.decompose()?;
    let at = tensor_power_set(a, t)?;
    let gt = tensor_power(g, t)?;
    let big = build_symmetric(OperatorKind::SymDifference, &at, &gt)?.decompose()?;
    let mut products = vec![1.0f64];
    for _ in 0..t {
        products = products.iter().flat_map(|p| base.values.iter().map(move |v| p * v)).collect();
    }
    products.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut got = big.values.clone();
    got.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let err = products.iter().zip(&got).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = base.main_value().abs().powi(t as i32).max(1.0);
    Ok(Relation::at_most("tensor spectrum is the product spectrum", err, 1e-8 * scale).with_tol(0.0))
}

fn l2(g: &GroupFunction<f64>) -> f64 {
    g.sum_of_squares().sqrt()
}

/// Bounds on the main eigenfunction of `T^g_A` for nonnegative even `g`.
pub fn g_bound_relations(a: &FiniteSet, g: &GroupFunction<f64>) -> Result<Vec<Relation>> {
    if g.iter().any(|(_, &v)| v < 0.0) {
        return Err(Error::Precondition("main eigenfunction bounds need g ≥ 0".into()));
    }
    let dec = build_symmetric(OperatorKind::SymDifference, a, g)?.decompose()?;
    let mu0 = dec.main_value();
    let f0 = dec.main_vector();
    let mass = f0.iter().sum::<f64>().powi(2);
    let sup = f0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(vec![
        Relation::at_most("squared mass at most |A|", mass, a.len() as f64),
        Relation::at_most("main eigenvalue over sup norm", mu0 / g.max_abs(), mass),
        Relation::at_most("squared main eigenvalue over squared l2 norm", mu0 * mu0 / g.sum_of_squares(), mass),
        Relation::at_most("sup norm of main eigenfunction", sup, l2(g) / mu0),
    ])
}

/// `‖f_0‖_∞ ≤ ‖g_1‖_2 / μ_0^{1/2}` for `g = g_1 ∘ g_1`.
pub fn l_infty_factor_relation(a: &FiniteSet, g1: &GroupFunction<f64>) -> Result<Relation> {
    let g = correlate(g1, g1)?;
    let dec = build_symmetric(OperatorKind::SymDifference, a, &g)?.decompose()?;
    let mu0 = dec.main_value();
    let sup = dec.main_vector().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Relation::at_most("sup norm via factor", sup, l2(g1) / mu0.sqrt()))
}

/// `μ_0(T^g_A)^3 / (‖g‖_2^2 ‖g‖_∞) ≤ μ_0(T^{A∘A}_A)` for nonnegative even `g`.
pub fn mu_energy_relation(a: &FiniteSet, g: &GroupFunction<f64>) -> Result<Relation> {
    let mu = main_eigenvalue(a, g)?;
    let mu_ac = main_eigenvalue(a, &autocorrelation(a).to_real())?;
    Ok(Relation::at_most(
        "main eigenvalue of autocorrelation operator",
        mu.powi(3) / (g.sum_of_squares() * g.max_abs()),
        mu_ac,
    ))
}

/// Triangle sum against its spectral expansion, for even real `g_1`, `g_2`.
pub fn triangle_relation(a: &FiniteSet, g1: &GroupFunction<f64>, g2: &GroupFunction<f64>) -> Result<Relation> {
    let t1 = build_symmetric(OperatorKind::SymDifference, a, g1)?;
    let t2 = build_symmetric(OperatorKind::SymDifference, a, g2)?;
    let gram = t1.matrix.transpose().matmul(&t1.matrix);
    let lhs: f64 = gram.entries().iter().zip(t2.matrix.entries()).map(|(x, y)| x * y).sum();
    let dec = t1.decompose()?;
    let mut rhs = 0.0;
    let mut scale = 0.0;
    for (mu, f) in dec.values.iter().zip(&dec.left) {
        let q = dot(&t2.matrix.matvec(f), f);
        rhs += mu * mu * q;
        scale += (mu * mu * q).abs();
    }
    Ok(Relation::equal("triangle sum", lhs, rhs).with_scale(scale))
}

/// `σ(ψ, X) = Σ_x ψ(x) (X ∘ X)(x)`.
fn sigma(psi: &GroupFunction<f64>, x: &FiniteSet) -> f64 {
    psi.inner(&autocorrelation(x).to_real())
}

/// Both forms of the `E_3(A, B)` lower bound via the covering sets `A - B` and `A + B`.
pub fn three_halves_relations(a: &FiniteSet, b: &FiniteSet, psi: &GroupFunction<f64>) -> Result<Vec<Relation>> {
    let d = a.diffset(b)?;
    let s = a.sumset(b)?;
    three_halves_with_covers(a, b, &d, &s, psi)
}

/// As [`three_halves_relations`] with caller supplied covers `D ⊇ A - B`, `S ⊇ A + B`.
pub fn three_halves_with_covers(
    a: &FiniteSet,
    b: &FiniteSet,
    d: &FiniteSet,
    s: &FiniteSet,
    psi: &GroupFunction<f64>,
) -> Result<Vec<Relation>> {
    let e3 = crate::energy::energy_moment_pair_int(a, b, 3)? as f64;
    let psi2 = psi.map(|v| v * v);
    let lhs = (a.len() as f64).powi(2) * sigma(psi, b).powi(2);
    Ok(vec![
        Relation::at_most("difference cover", lhs, e3 * sigma(&psi2, d)),
        Relation::at_most("sum cover", lhs, e3 * sigma(&psi2, s)),
    ])
}

/// Both inequalities of the `E_{3/2}` chain, for `A + B` and `A - B`.
pub fn li_relations(a: &FiniteSet, b: &FiniteSet) -> Result<Vec<Relation>> {
    use crate::energy::{energy_moment, energy_moment_int, energy_moment_pair_int, energy_pair};
    let lhs = (a.len() as f64).powi(2) * energy_moment(b, 1.5).powi(2);
    let e3ab = energy_moment_pair_int(a, b, 3)? as f64;
    let holder = (energy_moment_int(a, 3) as f64).powf(1.0 / 3.0) * (energy_moment_int(b, 3) as f64).powf(2.0 / 3.0);
    let mut out = Vec::new();
    for (tag, cover) in [("sum", a.sumset(b)?), ("difference", a.diffset(b)?)] {
        let ebc = energy_pair(b, &cover)? as f64;
        out.push(Relation::at_most(format!("{tag}: lower chain"), lhs, e3ab * ebc));
        out.push(Relation::at_most(format!("{tag}: Hölder step"), e3ab * ebc, holder * ebc));
    }
    Ok(out)
}

/// `|A|^6 ≤ E_3(A) Σ_{x ∈ A-A} ((A ± A) ∘ (A ± A))(x)`.
pub fn ss2_relations(a: &FiniteSet) -> Result<Vec<Relation>> {
    let e3 = crate::energy::energy_moment_int(a, 3);
    let diff = a.diffset(a)?;
    let lhs = (a.len() as i128).pow(6);
    let mut out = Vec::new();
    for (tag, cover) in [("sum", a.sumset(a)?), ("difference", diff.clone())] {
        let ac = autocorrelation(&cover);
        let s: i128 = diff.iter().map(|x| ac.get(x)).sum();
        out.push(Relation::at_most(format!("{tag} cover"), lhs, e3 * s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn rank_one_for_0_1_3_and_0_1() {
        let a = FiniteSet::integers([0, 1, 3]);
        let b = FiniteSet::integers([0, 1]);
        for sum in [false, true] {
            let rel = rank_one_relations(&a, &b, sum).unwrap();
            assert!((rel[0].lhs.as_f64() - 6f64.sqrt()).abs() < 1e-12);
            assert!(rel.iter().all(|r| r.passes() == Some(true)), "{rel:?}");
        }
    }

    #[test]
    fn audit_passes_on_cyclic_weight() {
        let g = Group::cyclic(13).unwrap();
        let a = FiniteSet::from_scalars(g.clone(), [0, 1, 4, 6, 9]).unwrap();
        let b = FiniteSet::from_scalars(g.clone(), [2, 3, 11]).unwrap();
        let w = GroupFunction::from_pairs(g, (0..13).map(|i| (GroupElement::scalar(i), ((i * i) % 5) as f64 - 1.5)));
        for kind in [OperatorKind::Difference, OperatorKind::Sum] {
            let op = build_operator(kind, &a, &b, &w).unwrap();
            let dec = op.decompose().unwrap();
            for r in audit(&op, &dec).into_iter().chain(gram_identities(&op)) {
                assert_eq!(r.passes(), Some(true), "{r:?}");
            }
        }
        let op = build_symmetric(OperatorKind::SymSum, &a, &w).unwrap();
        let dec = op.decompose().unwrap();
        for r in audit(&op, &dec) {
            assert_eq!(r.passes(), Some(true), "{r:?}");
        }
    }

    #[test]
    fn odd_weight_rejected_for_difference_operator() {
        let a = FiniteSet::integers([0, 1, 2]);
        let w = GroupFunction::from_pairs(a.group().clone(), [(GroupElement::scalar(1), 1.0)]);
        assert!(build_symmetric(OperatorKind::SymDifference, &a, &w).is_err());
    }

    #[test]
    fn subgroup_triangles_count() {
        let g = Group::cube(2).unwrap();
        let h = FiniteSet::from_scalars(g, 0..4).unwrap();
        let r = triangle_relation(&h, &h.indicator_real(), &h.indicator_real()).unwrap();
        assert!((r.lhs.as_f64() - 64.0).abs() < 1e-9);
        assert_eq!(r.passes(), Some(true));
    }
}
