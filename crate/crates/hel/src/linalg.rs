//! Dense real matrices with deterministic Jacobi eigen- and singular decompositions.

use crate::error::{Error, Result};

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 64;
/// Relative off-diagonal mass at which the symmetric iteration stops.
pub const EIGEN_TOL: f64 = 1e-13;
/// Relative column non-orthogonality at which the one-sided iteration stops.
pub const SVD_TOL: f64 = 1e-15;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flips `v` so that its first coordinate of non-negligible size is positive.
fn fix_sign(v: &mut [f64]) -> bool {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
            return true;
        }
    }
    false
}

/// Eigenvalues (ordered by decreasing modulus) and unit eigenvectors.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

/// Cyclic Jacobi iteration for a real symmetric matrix.
///
/// Stops once the off-diagonal Frobenius mass falls below `EIGEN_TOL` times the
/// diagonal mass. Eigenpairs are ordered by `|μ|` descending, moduli within `1e-9`
/// of the largest counting as equal, then `μ` descending, then by diagonal slot.
/// Each vector has its first non-negligible coordinate positive.
pub fn symmetric_eigen(m: &Matrix) -> Result<SymmetricEigen> {
    let n = m.rows;
    if m.cols != n {
        return Err(Error::Precondition("symmetric eigensolver needs a square matrix".into()));
    }
    let scale = m.data.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if !m.is_symmetric(1e-12 * scale.max(1.0)) {
        return Err(Error::Precondition("matrix is not symmetric".into()));
    }
    let mut a = m.data.clone();
    let mut v = Matrix::identity(n).data;
    let mut sweeps = 0;
    loop {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = a[i * n + j];
                if i == j {
                    diag += x * x;
                } else {
                    off += x * x;
                }
            }
        }
        if off == 0.0 || off.sqrt() < EIGEN_TOL * diag.sqrt() {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::Precondition(format!("Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let val = |i: usize| a[i * n + i];
    order.sort_by(|&i, &j| {
        val(j)
            .abs()
            .partial_cmp(&val(i).abs())
            .unwrap()
            .then(val(j).partial_cmp(&val(i)).unwrap())
            .then(i.cmp(&j))
    });
    let top = order.first().map_or(0.0, |&i| val(i).abs());
    let mut start = 0;
    while start < n {
        let lead = val(order[start]).abs();
        let end = (start..n).find(|&k| lead - val(order[k]).abs() > 1e-9 * top).unwrap_or(n);
        order[start..end].sort_by(|&i, &j| val(j).partial_cmp(&val(i)).unwrap().then(i.cmp(&j)));
        start = end;
    }
    let values = order.iter().map(|&i| val(i)).collect();
    let vectors = order
        .iter()
        .map(|&j| {
            let mut col: Vec<f64> = (0..n).map(|k| v[k * n + j]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok(SymmetricEigen { values, vectors, sweeps })
}

/// Singular triples `M = Σ_j σ_j u_j v_j^T` with `σ` non-increasing.
#[derive(Clone, Debug)]
pub struct Svd {
    pub values: Vec<f64>,
    /// Left vectors, indexed by rows of `M`.
    pub left: Vec<Vec<f64>>,
    /// Right vectors, indexed by columns of `M`.
    pub right: Vec<Vec<f64>>,
    pub sweeps: usize,
}

/// One-sided (Hestenes) Jacobi singular value decomposition.
///
/// Rotating column pairs of `M` is the two-sided Jacobi iteration applied to
/// `M^T M` without forming it, which keeps small singular values accurate.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if m.cols > m.rows {
        let t = svd(&m.transpose())?;
        return Ok(Svd { values: t.values, left: t.right, right: t.left, sweeps: t.sweeps });
    }
    let (rows, cols) = (m.rows, m.cols);
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let negligible = (f64::EPSILON * m.frobenius()).powi(2);
    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= SVD_TOL * (alpha * beta).sqrt() || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = w.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
                let (lo, hi) = v.split_at_mut(q);
                rotate(&mut lo[p], &mut hi[0], c, s);
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(Error::Precondition(format!("one-sided Jacobi did not converge in {MAX_SWEEPS} sweeps")));
        }
    }
    let sigma: Vec<f64> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap().then(i.cmp(&j)));
    let mut values = Vec::with_capacity(cols);
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut right = Vec::with_capacity(cols);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        values.push(sigma[j]);
        let mut r = v[j].clone();
        let mut l: Vec<f64> = if sigma[j] * sigma[j] > negligible && sigma[j] > f64::MIN_POSITIVE * 1e10 {
            w[j].iter().map(|x| x / sigma[j]).collect()
        } else {
            missing.push(slot);
            vec![0.0; rows]
        };
        if fix_sign(&mut r) {
            l.iter_mut().for_each(|x| *x = -*x);
        }
        left.push(l);
        right.push(r);
    }
    for slot in missing {
        let filled = complete_basis(&left, rows, slot);
        left[slot] = filled;
    }
    Ok(Svd { values, left, right, sweeps })
}

fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// A unit vector orthogonal to every nonzero vector in `basis` except slot `skip`.
fn complete_basis(basis: &[Vec<f64>], dim: usize, skip: usize) -> Vec<f64> {
    let mut best: Option<Vec<f64>> = None;
    let mut best_norm = 0.0;
    for e in 0..dim {
        let mut cand = vec![0.0; dim];
        cand[e] = 1.0;
        for _ in 0..2 {
            for (i, b) in basis.iter().enumerate() {
                if i == skip || norm(b) == 0.0 {
                    continue;
                }
                let d = dot(&cand, b);
                cand.iter_mut().zip(b).for_each(|(c, x)| *c -= d * x);
            }
        }
        let nn = norm(&cand);
        if nn > 0.5 {
            return cand.into_iter().map(|x| x / nn).collect();
        }
        if nn > best_norm {
            best_norm = nn;
            best = Some(cand);
        }
    }
    let c = best.expect("completion exists");
    c.into_iter().map(|x| x / best_norm).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_small_symmetric() {
        let m = Matrix::from_fn(2, 2, |i, j| if i == j { 2.0 } else { 1.0 });
        let e = symmetric_eigen(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.vectors[0].iter().all(|x| *x > 0.0));
    }

    #[test]
    fn eigen_orders_by_modulus() {
        let m = Matrix::from_fn(3, 3, |i, j| if i == j { [1.0, -5.0, 3.0][i] } else { 0.0 });
        let e = symmetric_eigen(&m).unwrap();
        assert_eq!(e.values, vec![-5.0, 3.0, 1.0]);
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let m = Matrix::from_fn(4, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let s = svd(&m).unwrap();
        let rec = Matrix::from_fn(4, 3, |i, j| (0..3).map(|k| s.values[k] * s.left[k][i] * s.right[k][j]).sum());
        assert!(rec.sub(&m).frobenius() < 1e-12 * m.frobenius());
    }

    #[test]
    fn svd_completes_null_directions() {
        let m = Matrix::from_fn(3, 3, |_, j| if j == 0 { 1.0 } else { 0.0 });
        let s = svd(&m).unwrap();
        assert!((s.values[0] - 3f64.sqrt()).abs() < 1e-14);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot(&s.left[a], &s.left[b]) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_rank_one_converges() {
        let m = Matrix::from_fn(36, 18, |i, j| (1.0 + (i as f64).sqrt()) * (0.3 + (j as f64 * 0.7).sin()));
        let s = svd(&m).unwrap();
        assert!(s.values[1] < 1e-9 * s.values[0]);
    }

    #[test]
    fn opposite_eigenvalues_put_the_positive_first() {
        let m = Matrix::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 3.0 });
        let e = symmetric_eigen(&m).unwrap();
        assert!(e.values[0] > 0.0 && e.values[1] < 0.0);
    }
}
