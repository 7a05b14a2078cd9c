//! Dense symmetric linear algebra.
//!
//! [`SymMatrix`] owns a full row-major copy of a symmetric matrix whose
//! symmetry is checked (or produced) exactly at construction. Eigen-problems
//! and Cholesky factorizations are delegated to `faer`, which is compiled
//! without its rayon feature and is therefore sequential and deterministic.

use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Side};

use crate::error::{Error, Result};

/// Eigenvalues at or above `-PSD_TOLERANCE * l_1` are treated as numerically
/// non-negative.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Build from an entry function evaluated on the lower triangle and mirrored,
    /// so the result is symmetric bit-for-bit.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; order * order];
        for i in 0..order {
            for j in 0..=i {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                data[i * order + j] = v;
                data[j * order + i] = v;
            }
        }
        Ok(Self { order, data })
    }

    /// Wrap row-major data, rejecting anything not exactly symmetric or not finite.
    pub fn from_row_major(order: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != order * order {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot form a {order}x{order} matrix",
                data.len()
            )));
        }
        for i in 0..order {
            for j in 0..order {
                let v = data[i * order + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if j < i && v != data[j * order + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { order, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("row {i} has {} entries in a matrix with {n} rows", r.len())));
        }
        Self::from_row_major(n, rows.concat())
    }

    pub fn zeros(order: usize) -> Self {
        Self { order, data: vec![0.0; order * order] }
    }

    pub fn identity(order: usize) -> Self {
        Self::scaled_identity(order, 1.0)
    }

    pub fn scaled_identity(order: usize, scale: f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.data[i * order + i] = scale;
        }
        m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.order).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("matrix-vector product", self.order, x.len())?;
        Ok((0..self.order).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius norm of the strictly off-diagonal part.
    pub fn off_diagonal_norm(&self) -> f64 {
        let n = self.order;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.data[i * n + j].powi(2);
                }
            }
        }
        s.sqrt()
    }

    /// `P A P^T` for a permutation given as `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len("permutation", self.order, perm.len())?;
        Self::from_fn(self.order, |i, j| self.get(perm[i], perm[j]))
    }

    pub(crate) fn to_faer(&self) -> Mat<f64> {
        let n = self.order;
        Mat::from_fn(n, n, |i, j| self.data[i * n + j])
    }
}

/// Eigenpairs of a symmetric matrix, eigenvalues in non-increasing order.
///
/// Each eigenvector is oriented so that its largest-magnitude entry (first one
/// on ties) is positive, which makes the decomposition a deterministic
/// function of the input.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    order: usize,
    values: Vec<f64>,
    // column-major: vector k occupies [k * order, (k + 1) * order)
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.order..(k + 1) * self.order]
    }

    /// Coordinates `V^T x` of `x` in the eigenbasis.
    pub fn coefficients(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("eigenbasis projection", self.order, x.len())?;
        Ok((0..self.order).map(|k| dot(self.vector(k), x)).collect())
    }

    /// `V c` for coordinates `c`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_len("eigenbasis synthesis", self.order, coeffs.len())?;
        let n = self.order;
        let mut out = vec![0.0; n];
        for (k, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(self.vector(k)) {
                    *o += c * v;
                }
            }
        }
        Ok(out)
    }

    /// `V diag(f(l_1), ..., f(l_n)) V^T x`.
    pub fn apply(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let c: Vec<f64> = self.coefficients(x)?.into_iter().zip(&self.values).map(|(c, &l)| c * f(l)).collect();
        self.synthesize(&c)
    }

    pub fn reconstruct(&self) -> Result<SymMatrix> {
        let n = self.order;
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.values[k] * self.vectors[k * n + i] * self.vectors[k * n + j]).sum()
        })
    }

    /// Fails when the smallest eigenvalue is below `-PSD_TOLERANCE * l_1`.
    pub fn check_psd(&self) -> Result<()> {
        let (Some(&max), Some(&min)) = (self.values.first(), self.values.last()) else {
            return Ok(());
        };
        if min < -PSD_TOLERANCE * max.max(0.0) {
            return Err(Error::NotPositiveSemidefinite { min, max });
        }
        Ok(())
    }
}

/// Symmetric eigendecomposition.
pub fn eigh(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.order();
    if n == 0 {
        return Ok(EigenDecomposition { order: 0, values: Vec::new(), vectors: Vec::new() });
    }
    let evd = a
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::EigenNonConvergence { order: n, residual: a.off_diagonal_norm() })?;
    let s = evd.S().column_vector();
    let u = evd.U();
    // faer returns ascending order
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for k in (0..n).rev() {
        values.push(s[k]);
        let col: Vec<f64> = (0..n).map(|i| u[(i, k)]).collect();
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.extend(col.into_iter().map(|v| v * sign));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNonConvergence { order: n, residual: a.off_diagonal_norm() });
    }
    Ok(EigenDecomposition { order: n, values, vectors })
}

/// Solve `(A + shift I) x = b` by Cholesky factorization with one round of
/// iterative refinement.
pub fn solve_spd_shifted(a: &SymMatrix, shift: f64, b: &[f64]) -> Result<Vec<f64>> {
    if !(shift > 0.0 && shift.is_finite()) {
        return Err(Error::param("shift", format!("must be positive and finite, got {shift}")));
    }
    let n = a.order();
    check_len("shifted solve", n, b.len())?;
    let mut m = a.to_faer();
    for i in 0..n {
        m[(i, i)] += shift;
    }
    let llt = m.llt(Side::Lower).map_err(|e| match e {
        faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index } => {
            Error::NotPositiveDefinite { order: n, pivot: index }
        }
    })?;
    let rhs = Col::from_fn(n, |i| b[i]);
    let x0 = llt.solve(&rhs);
    let x: Vec<f64> = (0..n).map(|i| x0[i]).collect();
    let residual = Col::from_fn(n, |i| b[i] - dot(a.row(i), &x) - shift * x[i]);
    let dx = llt.solve(&residual);
    Ok((0..n).map(|i| x[i] + dx[i]).collect())
}

/// Apply the centering projector `I - J/n`: subtract the mean from every entry.
pub fn center(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::param("v", "cannot center an empty vector"));
    }
    let m = pairwise_sum(v) / v.len() as f64;
    Ok(v.iter().map(|x| x - m).collect())
}

pub fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Sample variance with divisor `n - 1`. Zero for fewer than two values.
pub fn sample_variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (v.len() - 1) as f64
}

/// Recursive pairwise summation; the grouping depends only on the length.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if v.len() <= BLOCK {
        v.iter().sum()
    } else {
        let mid = v.len() / 2;
        pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch(format!("{what}: expected length {expected}, found {found}")));
    }
    Ok(())
}
