//! Dense symmetric linear algebra at desk scale.
//!
//! [`SymMatrix`] stores the upper triangle only, so symmetry holds by
//! construction. The eigensolver is cyclic Jacobi, which is accurate for the
//! small matrices produced by the embeddings (order up to a few hundred).

use std::fmt;

use crate::error::{Error, Result};

/// Default tolerance used by every query that takes one.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative eigenvalue threshold used when counting the rank of mapped blocks.
pub const RANK_TOL: f64 = 1e-7;

/// Sweep cap for [`eigh`].
pub const MAX_SWEEPS: usize = 100;

/// Dense symmetric matrix with packed upper-triangular storage.
#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    // column-packed upper triangle: (i, j) with i <= j lives at j*(j+1)/2 + i
    data: Vec<f64>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix order must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for i in 0..=j {
                m.data[packed_index(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from full rows, reading the upper triangle and checking that the
    /// lower triangle mirrors it within `tol`.
    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Shape("matrix has no rows".into()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Shape(format!(
                    "row {r} has {} entries, expected {n}",
                    row.len()
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (rows[i][j] - rows[j][i]).abs();
                if d > tol * (1.0 + rows[i][j].abs()) {
                    return Err(Error::Shape(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// `v vᵀ`.
    pub fn outer(v: &[f64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[packed_index(i, j)] = value;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        self.data[packed_index(i, j)] += value;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SymMatrix) -> Result<()> {
        check_dims("axpy", self.dim, other.dim)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Square sub-block starting at `offset` with order `size`.
    pub fn block(&self, offset: usize, size: usize) -> SymMatrix {
        SymMatrix::from_fn(size, |i, j| self.get(offset + i, offset + j))
    }

    /// Block-diagonal assembly.
    pub fn block_diag(blocks: &[SymMatrix]) -> SymMatrix {
        let dim: usize = blocks.iter().map(|b| b.dim).sum();
        let mut out = SymMatrix::zeros(dim.max(1));
        let mut offset = 0;
        for b in blocks {
            for j in 0..b.dim {
                for i in 0..=j {
                    out.set(offset + i, offset + j, b.get(i, j));
                }
            }
            offset += b.dim;
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dims("mul_vec", self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    /// General (non-symmetric) product `self * other`.
    pub fn mul(&self, other: &SymMatrix) -> Result<Matrix> {
        check_dims("mul", self.dim, other.dim)?;
        let n = self.dim;
        Ok(Matrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.get(i, k) * other.get(k, j)).sum()
        }))
    }

    /// Upper-triangle entries `(i, j, value)` with `i <= j` that are nonzero.
    pub fn upper_nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (i..self.dim).filter_map(move |j| {
                let v = self.get(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymMatrix")
            .field("dim", &self.dim)
            .field("rows", &self.rows())
            .finish()
    }
}

/// Row-major dense matrix, used for eigenvector bases and general products.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<f64>]) -> Self {
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dims("matmul", self.cols, other.rows)?;
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        }))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `selfᵀ self` as a symmetric matrix.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.cols.max(1), |i, j| {
            if self.cols == 0 {
                return 0.0;
            }
            (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum()
        })
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let q = &self.eigenvectors;
        let n = q.nrows();
        SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| q.get(i, k) * self.eigenvalues[k] * q.get(j, k))
                .sum()
        })
    }

    /// Eigenvectors whose eigenvalue satisfies `keep`.
    pub fn vectors_where(&self, mut keep: impl FnMut(f64) -> bool) -> Vec<Vec<f64>> {
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| keep(l))
            .map(|(j, _)| self.eigenvectors.column(j))
            .collect()
    }
}

fn check_dims(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// `Tr(AB)` for symmetric `A`, `B`, i.e. the sum over all ordered pairs of
/// `a(i,j) b(i,j)`.
pub fn trace_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    check_dims("trace_inner", a.dim, b.dim)?;
    let n = a.dim;
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..=j {
            let p = a.data[packed_index(i, j)] * b.data[packed_index(i, j)];
            sum += if i == j { p } else { 2.0 * p };
        }
    }
    Ok(sum)
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps until every off-diagonal magnitude is below `tol * (1 + max|a_ij|)`.
pub fn eigh(a: &SymMatrix, tol: f64) -> Result<EigenDecomposition> {
    let n = a.dim;
    let mut m = a.to_dense();
    let mut v = Matrix::identity(n);
    let threshold = tol * (1.0 + a.max_abs());

    let off_max = |m: &Matrix| {
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max(m.get(i, j).abs());
            }
        }
        worst
    };

    let mut converged = off_max(&m) < threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m.set(k, p, new_kp);
                    m.set(p, k, new_kp);
                    m.set(k, q, new_kq);
                    m.set(q, k, new_kq);
                }
                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, 0.0);
                m.set(q, p, 0.0);

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
        sweeps += 1;
        converged = off_max(&m) < threshold;
    }
    if !converged {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m.get(i, j).powi(2);
            }
        }
        return Err(Error::NoConvergence {
            sweeps,
            off_norm: off.sqrt(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in Jacobi order
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));
    let eigenvalues = order.iter().map(|&i| m.get(i, i)).collect();
    let eigenvectors = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsdStatus {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

impl PsdStatus {
    pub fn is_psd(self) -> bool {
        !matches!(self, PsdStatus::Indefinite)
    }
}

pub fn min_eigenvalue(a: &SymMatrix, tol: f64) -> Result<f64> {
    Ok(eigh(a, tol)?.eigenvalues[0])
}

pub fn psd_status(a: &SymMatrix, tol: f64) -> Result<PsdStatus> {
    let lambda_min = min_eigenvalue(a, tol)?;
    Ok(if lambda_min > tol {
        PsdStatus::PositiveDefinite
    } else if lambda_min >= -tol {
        PsdStatus::PositiveSemidefinite
    } else {
        PsdStatus::Indefinite
    })
}

/// Number of eigenvalues with `|λ| > tol * max(1, max|λ|)`.
pub fn numeric_rank(a: &SymMatrix, tol: f64) -> Result<usize> {
    let eig = eigh(a, tol.min(DEFAULT_TOL) * 1e-4)?;
    let scale = eig
        .eigenvalues
        .iter()
        .fold(1.0f64, |m, l| m.max(l.abs()));
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|l| l.abs() > tol * scale)
        .count())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `sin` of the largest principal angle between two subspaces given by
/// orthonormal column sets. Unequal dimensions give 1.
pub fn subspace_distance(u: &[Vec<f64>], v: &[Vec<f64>]) -> f64 {
    if u.len() != v.len() {
        return 1.0;
    }
    if u.is_empty() {
        return 0.0;
    }
    let n = u[0].len();
    // residual of projecting each column of u onto span(v)
    let residual: Vec<Vec<f64>> = u
        .iter()
        .map(|col| {
            let mut r = col.clone();
            for b in v {
                let c = dot(b, col);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri -= c * bi;
                }
            }
            r
        })
        .collect();
    let r = Matrix::from_columns(n, &residual);
    match eigh(&r.gram(), 1e-15) {
        Ok(eig) => eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
        Err(_) => 1.0,
    }
}
