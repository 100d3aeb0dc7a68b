//! Minimal dense linear algebra: vectors, row-major matrices, and the few
//! factorizations the rest of the crate needs (one-sided Jacobi SVD, Cholesky,
//! symmetric Jacobi eigenvalues, Householder completion).
//!
//! Everything is `f64` and desk-scale; the priorities are reproducibility and
//! an explicit rank rule, not speed.

#[allow(unused_imports)]
use num_traits::Float as _;

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Relative singular-value cutoff: sigma below `RANK_REL_CUTOFF * sigma_max`
/// counts as zero everywhere a rank decision is made.
pub const RANK_REL_CUTOFF: f64 = 1e-10;

/// Vector norms used for perturbation budgets and their duals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

impl Norm {
    /// Dual norm: L1 <-> Linf, L2 self-dual.
    pub fn dual(self) -> Norm {
        match self {
            Norm::L1 => Norm::Linf,
            Norm::L2 => Norm::L2,
            Norm::Linf => Norm::L1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        }
    }
}

/// Dense f64 vector. Non-empty, finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty { what: "vector" });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "vector" });
        }
        Ok(Vector { data })
    }

    pub fn zeros(n: usize) -> Self {
        Vector { data: vec![0.0; n] }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector { data: (0..n).map(f).collect() }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.data.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        match kind {
            Norm::L1 => self.data.iter().map(|x| x.abs()).sum(),
            Norm::L2 => self.data.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => self.data.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    pub fn scale(&mut self, c: f64) {
        for x in &mut self.data {
            *x *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector { data: self.data.iter().map(|x| c * x).collect() }
    }

    /// self += c * other
    pub fn add_scaled(&mut self, c: f64, other: &Vector) {
        assert_eq!(self.len(), other.len(), "add_scaled: length mismatch");
        for (x, o) in self.data.iter_mut().zip(&other.data) {
            *x += c * o;
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        let mut out = self.clone();
        out.add_scaled(1.0, other);
        out
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }
}

impl core::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl core::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

/// Dense row-major f64 matrix. Non-empty, finite entries.
#[derive(Debug, Clone, PartialEq)]
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
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::Empty { what: "matrix" });
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimMismatch { what: "matrix row", expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite { what: "matrix" });
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> Vector {
        Vector { data: self.row(i).to_vec() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// X v
    pub fn matvec(&self, v: &Vector) -> Vector {
        assert_eq!(self.cols, v.len(), "matvec: dimension mismatch");
        Vector::from_fn(self.rows, |i| {
            self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum()
        })
    }

    /// X^T v
    pub fn tr_matvec(&self, v: &Vector) -> Vector {
        assert_eq!(self.rows, v.len(), "tr_matvec: dimension mismatch");
        let mut out = Vector::zeros(self.cols);
        for i in 0..self.rows {
            let vi = v[i];
            for (j, x) in self.row(i).iter().enumerate() {
                out[j] += vi * x;
            }
        }
        out
    }

    /// Gram matrix of the rows: X X^T.
    pub fn gram(&self) -> Matrix {
        let n = self.rows;
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                k.set(i, j, v);
                k.set(j, i, v);
            }
        }
        k
    }

    /// self += c * a b^T
    pub fn add_outer(&mut self, c: f64, a: &Vector, b: &Vector) {
        assert_eq!(self.rows, a.len(), "add_outer: row mismatch");
        assert_eq!(self.cols, b.len(), "add_outer: col mismatch");
        for i in 0..self.rows {
            let ca = c * a[i];
            for j in 0..self.cols {
                self.data[i * self.cols + j] += ca * b[j];
            }
        }
    }

    fn col_dot(&self, p: usize, q: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            s += self.data[i * self.cols + p] * self.data[i * self.cols + q];
        }
        s
    }

    fn rotate_cols(&mut self, p: usize, q: usize, c: f64, s: f64) {
        for i in 0..self.rows {
            let ip = i * self.cols + p;
            let iq = i * self.cols + q;
            let (a, b) = (self.data[ip], self.data[iq]);
            self.data[ip] = c * a - s * b;
            self.data[iq] = s * a + c * b;
        }
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

/// Thin singular value decomposition A = U diag(sigma) V^T with sigma
/// descending. U is m x k, V is n x k, k = min(m, n); columns of U with
/// sigma = 0 are zero vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// One-sided (Hestenes) Jacobi SVD. Runs on the tall orientation and
    /// transposes back, so it handles any aspect ratio.
    pub fn of(a: &Matrix) -> Svd {
        if a.rows() >= a.cols() {
            Svd::of_tall(a)
        } else {
            let s = Svd::of_tall(&a.transpose());
            Svd { u: s.v, sigma: s.sigma, v: s.u }
        }
    }

    fn of_tall(a: &Matrix) -> Svd {
        let (m, n) = (a.rows(), a.cols());
        debug_assert!(m >= n);
        let mut b = a.clone();
        let mut v = Matrix::identity(n);
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n.saturating_sub(1) {
                for q in (p + 1)..n {
                    let app = b.col_dot(p, p);
                    let aqq = b.col_dot(q, q);
                    let apq = b.col_dot(p, q);
                    if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (aqq - app) / (2.0 * apq);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    b.rotate_cols(p, q, c, s);
                    v.rotate_cols(p, q, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        // Column norms are the singular values; sort descending.
        let mut order: Vec<usize> = (0..n).collect();
        let norms: Vec<f64> = (0..n).map(|j| b.col_dot(j, j).sqrt()).collect();
        order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
        let mut u = Matrix::zeros(m, n);
        let mut vv = Matrix::zeros(n, n);
        let mut sigma = vec![0.0; n];
        for (k, &j) in order.iter().enumerate() {
            sigma[k] = norms[j];
            if norms[j] > 0.0 {
                for i in 0..m {
                    u.set(i, k, b.get(i, j) / norms[j]);
                }
            }
            for i in 0..n {
                vv.set(i, k, v.get(i, j));
            }
        }
        Svd { u, sigma, v: vv }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// Numerical rank under the relative cutoff.
    pub fn rank(&self) -> usize {
        let cut = RANK_REL_CUTOFF * self.sigma_max();
        self.sigma.iter().filter(|&&s| s > cut).count()
    }
}

/// Cholesky factor of a symmetric positive definite matrix.
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factor K = L L^T. Fails (returns None) if any pivot drops below
    /// `pivot_rel * max(diag K)`, i.e. when K is not comfortably positive
    /// definite.
    pub fn factor(k: &Matrix, pivot_rel: f64) -> Option<Cholesky> {
        let n = k.rows();
        assert_eq!(n, k.cols(), "cholesky: square matrix required");
        let max_diag = (0..n).fold(0.0_f64, |m, i| m.max(k.get(i, i)));
        let floor = pivot_rel * max_diag;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = k.get(j, j);
            for t in 0..j {
                d -= l.get(j, t) * l.get(j, t);
            }
            if d <= floor {
                return None;
            }
            let dj = d.sqrt();
            l.set(j, j, dj);
            for i in (j + 1)..n {
                let mut v = k.get(i, j);
                for t in 0..j {
                    v -= l.get(i, t) * l.get(j, t);
                }
                l.set(i, j, v / dj);
            }
        }
        Some(Cholesky { l })
    }

    /// Solve K x = b.
    pub fn solve(&self, b: &Vector) -> Vector {
        let n = self.l.rows();
        assert_eq!(n, b.len(), "cholesky solve: dimension mismatch");
        let mut y = Vector::zeros(n);
        for i in 0..n {
            let mut v = b[i];
            for j in 0..i {
                v -= self.l.get(i, j) * y[j];
            }
            y[i] = v / self.l.get(i, i);
        }
        let mut x = Vector::zeros(n);
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in (i + 1)..n {
                v -= self.l.get(j, i) * x[j];
            }
            x[i] = v / self.l.get(i, i);
        }
        x
    }
}

/// Eigenvalues of a symmetric matrix (ascending), by cyclic Jacobi rotations.
pub fn sym_eig_values(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols(), "sym_eig_values: square matrix required");
    let mut m = a.clone();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0_f64, |acc, (i, j)| acc.max(m.get(i, j).abs()))
        .max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m.get(i, j).abs());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-16 * scale {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // B = J^T M J on rows/cols p, q.
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

/// Minimum-norm least-squares solution of X w = y.
///
/// When the rows are independent (certified by a comfortable Cholesky of the
/// row Gram matrix) the solution is w = X^T (X X^T)^{-1} y, which both
/// interpolates and lies in the row space. Otherwise it falls back to the
/// pseudo-inverse through the SVD with the relative rank cutoff.
pub fn min_norm_least_squares(x: &Matrix, y: &Vector) -> Result<Vector> {
    if y.len() != x.rows() {
        return Err(Error::DimMismatch { what: "least squares rhs", expected: x.rows(), got: y.len() });
    }
    if x.rows() <= x.cols() {
        if let Some(chol) = Cholesky::factor(&x.gram(), 1e-8) {
            let alpha = chol.solve(y);
            return Ok(x.tr_matvec(&alpha));
        }
    }
    let svd = Svd::of(x);
    let cut = RANK_REL_CUTOFF * svd.sigma_max();
    let mut w = Vector::zeros(x.cols());
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= cut {
            continue;
        }
        let uk = Vector::from_fn(x.rows(), |i| svd.u.get(i, k));
        let coeff = uk.dot(y) / s;
        for j in 0..x.cols() {
            w[j] += coeff * svd.v.get(j, k);
        }
    }
    Ok(w)
}

/// Orthogonal projection of w onto the row space of X.
pub fn project_rowspace(x: &Matrix, w: &Vector) -> Result<Vector> {
    if w.len() != x.cols() {
        return Err(Error::DimMismatch { what: "projection input", expected: x.cols(), got: w.len() });
    }
    let svd = Svd::of(x);
    let cut = RANK_REL_CUTOFF * svd.sigma_max();
    let mut out = Vector::zeros(w.len());
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s <= cut {
            continue;
        }
        let vk = Vector::from_fn(w.len(), |j| svd.v.get(j, k));
        out.add_scaled(vk.dot(w), &vk);
    }
    Ok(out)
}

/// Orthonormal basis of the null space of X (dimension cols - rank),
/// constructed deterministically by Householder completion of the right
/// singular block.
pub fn nullspace_basis(x: &Matrix) -> Vec<Vector> {
    let d = x.cols();
    let svd = Svd::of(x);
    let cut = RANK_REL_CUTOFF * svd.sigma_max();
    let r = svd.sigma.iter().filter(|&&s| s > cut).count();
    if r == 0 {
        return (0..d).map(|j| Vector::from_fn(d, |i| if i == j { 1.0 } else { 0.0 })).collect();
    }
    // Householder vectors triangularizing the d x r block of right singular
    // vectors; the last d - r columns of the accumulated Q span the null space.
    let mut b = Matrix::zeros(d, r);
    for j in 0..r {
        for i in 0..d {
            b.set(i, j, svd.v.get(i, j));
        }
    }
    let mut hh: Vec<Vector> = Vec::with_capacity(r);
    for j in 0..r {
        let mut v = Vector::zeros(d);
        for i in j..d {
            v[i] = b.get(i, j);
        }
        let norm = v.norm(Norm::L2);
        if norm <= 1e-300 {
            hh.push(Vector::zeros(d));
            continue;
        }
        let sign = if v[j] >= 0.0 { 1.0 } else { -1.0 };
        v[j] += sign * norm;
        let vnorm2 = v.dot(&v);
        if vnorm2 > 0.0 {
            for jj in j..r {
                let col = Vector::from_fn(d, |i| b.get(i, jj));
                let coeff = 2.0 * v.dot(&col) / vnorm2;
                for i in 0..d {
                    b.set(i, jj, col[i] - coeff * v[i]);
                }
            }
        }
        hh.push(v);
    }
    let mut basis = Vec::with_capacity(d - r);
    for j in r..d {
        let mut q = Vector::from_fn(d, |i| if i == j { 1.0 } else { 0.0 });
        for v in hh.iter().rev() {
            let vnorm2 = v.dot(v);
            if vnorm2 > 0.0 {
                let coeff = 2.0 * v.dot(&q) / vnorm2;
                q.add_scaled(-coeff, v);
            }
        }
        basis.push(q);
    }
    basis
}
