//! Dense real matrices and the two decompositions the fusion pipeline needs.
//!
//! Storage is row-major. Decompositions are delegated to nalgebra behind the
//! [`svd`] / [`sym_eig_topk`] contracts; everything else is implemented
//! directly on the row-major buffer.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense matrix of finite `f64` entries in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "entry buffer has length {}, expected {}x{}={}",
                data.len(),
                rows,
                cols,
                rows * cols
            )));
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry {} at flat index {}",
                data[bad], bad
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix by evaluating `f(i, j)` at every position.
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
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

    /// Row `i` as a contiguous slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// `self * rhs`. Panics on an inner-dimension mismatch; shape errors here
    /// are programming bugs, not data errors.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a_il = self.get(i, l);
                if a_il == 0.0 {
                    continue;
                }
                let rhs_row = rhs.row(l);
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, r) in out_row.iter_mut().zip(rhs_row) {
                    *o += a_il * r;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest absolute deviation from symmetry, 0 for empty matrices.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// Thin singular value decomposition `A = U diag(sigma) V^T`.
///
/// `u` is m-by-r, `vt` is r-by-n with `r = min(m, n)`; singular values are
/// non-negative and sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub vt: DenseMatrix,
}

impl SvdResult {
    /// `U diag(sigma) V^T`, mainly for reconstruction checks.
    pub fn reconstruct(&self) -> DenseMatrix {
        let r = self.singular_values.len();
        let scaled = DenseMatrix::from_fn(self.u.rows(), r, |i, j| {
            self.u.get(i, j) * self.singular_values[j]
        });
        scaled.matmul(&self.vt)
    }
}

/// Thin SVD with singular values sorted non-increasing.
///
/// Backed by a one-sided Jacobi iteration: the orthogonality of the factors
/// has to be trustworthy on rank-deficient targets because the polar factors
/// built from them carry the optimization steps downstream.
pub fn svd(a: &DenseMatrix) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("svd of a non-finite matrix".into()));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("svd of an empty matrix".into()));
    }
    if a.rows() >= a.cols() {
        jacobi_svd_tall(a)
    } else {
        // A = U S V^T  <=>  A^T = V S U^T.
        let t = jacobi_svd_tall(&a.transpose())?;
        Ok(SvdResult {
            u: t.vt.transpose(),
            singular_values: t.singular_values,
            vt: t.u.transpose(),
        })
    }
}

const JACOBI_SVD_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD for m >= n: rotates column pairs of a working copy
/// until they are mutually orthogonal, then reads off singular values as
/// column norms.
fn jacobi_svd_tall(a: &DenseMatrix) -> Result<SvdResult> {
    let m = a.rows();
    let n = a.cols();
    // Column-major working copies of A and V.
    let mut w: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    for _ in 0..JACOBI_SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = w[p].iter().map(|x| x * x).sum();
                let beta: f64 = w[q].iter().map(|x| x * x).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-30 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wip = w[p][i];
                    let wiq = w[q][i];
                    w[p][i] = c * wip - s * wiq;
                    w[q][i] = s * wip + c * wiq;
                }
                for i in 0..n {
                    let vip = v[p][i];
                    let viq = v[q][i];
                    v[p][i] = c * vip - s * viq;
                    v[q][i] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalFailure(
            "one-sided Jacobi svd did not converge".into(),
        ));
    }

    let mut norms: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).expect("finite norms"));

    // Normalized left vectors; near-zero columns get orthonormal
    // completions so U stays exactly column-orthonormal.
    let cutoff = norms[order[0]].max(1.0) * 1e-300.max(f64::EPSILON * m as f64);
    let mut u_cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for &j in &order {
        if norms[j] > cutoff {
            u_cols.push(w[j].iter().map(|x| x / norms[j]).collect());
        } else {
            norms[j] = 0.0;
            u_cols.push(complete_orthonormal(&u_cols, m));
        }
    }

    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = DenseMatrix::from_fn(m, n, |i, j| u_cols[j][i]);
    let vt = DenseMatrix::from_fn(n, n, |i, j| v[order[i]][j]);
    Ok(SvdResult {
        u,
        singular_values,
        vt,
    })
}

/// A unit vector orthogonal to every column in `existing`, found by
/// projecting standard basis vectors.
fn complete_orthonormal(existing: &[Vec<f64>], m: usize) -> Vec<f64> {
    for axis in 0..m {
        let mut candidate = vec![0.0; m];
        candidate[axis] = 1.0;
        for col in existing {
            let dot: f64 = candidate.iter().zip(col).map(|(a, b)| a * b).sum();
            for (c, e) in candidate.iter_mut().zip(col) {
                *c -= dot * e;
            }
        }
        let norm: f64 = candidate.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            for c in candidate.iter_mut() {
                *c /= norm;
            }
            return candidate;
        }
    }
    unreachable!("fewer than m orthonormal columns always leave room for one more");
}

/// Full eigendecomposition of a symmetric matrix, eigenvalues sorted
/// non-increasing with matching eigenvector columns.
pub fn sym_eigendecomposition(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if a.rows() != a.cols() {
        return Err(Error::InvalidInput(format!(
            "eigendecomposition of a {}x{} matrix",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if a.asymmetry() > 1e-8 * scale.max(1.0) {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (asymmetry {:.3e})",
            a.asymmetry()
        )));
    }
    // Symmetrize before handing off so round-off in the caller cannot leak in.
    let sym = a.add(&a.transpose()).scale(0.5);
    let eig = sym
        .to_nalgebra()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;

    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Orthonormal eigenvectors for the `k` largest eigenvalues of a symmetric
/// matrix, as the columns of an n-by-k matrix.
pub fn sym_eig_topk(a: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if k == 0 || k > a.rows() {
        return Err(Error::InvalidInput(format!(
            "k={} out of range for a {}x{} matrix",
            k,
            a.rows(),
            a.cols()
        )));
    }
    let (_, vectors) = sym_eigendecomposition(a)?;
    Ok(DenseMatrix::from_fn(a.rows(), k, |i, j| vectors.get(i, j)))
}

/// Orthogonal polar factor `U V^T` of a matrix, the orthogonal matrix nearest
/// to `a` in Frobenius norm and the maximizer of `Tr(Q^T a)` over orthogonal Q.
pub fn orthogonal_factor(a: &DenseMatrix) -> Result<DenseMatrix> {
    let d = svd(a)?;
    Ok(d.u.matmul(&d.vt))
}
