//! Basic clustering partitions: the spectral relaxation of kernel k-means.

use crate::error::{Error, Result};
use crate::kernels::KernelMatrix;
use crate::linalg::{sym_eigendecomposition, DenseMatrix};

/// Column-orthonormal n-by-k partition matrix produced from one view.
#[derive(Debug, Clone)]
pub struct BasicPartition {
    h: DenseMatrix,
}

impl BasicPartition {
    /// Wraps an n-by-k matrix, verifying `H^T H = I_k` within 1e-6.
    pub fn new(h: DenseMatrix) -> Result<Self> {
        if h.rows() < h.cols() || h.cols() == 0 {
            return Err(Error::InvalidInput(format!(
                "partition matrix is {}x{}",
                h.rows(),
                h.cols()
            )));
        }
        let gram = h.transpose().matmul(&h);
        let k = h.cols();
        for i in 0..k {
            for j in 0..k {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (gram.get(i, j) - expected).abs() > 1e-6 {
                    return Err(Error::InvalidInput(format!(
                        "columns are not orthonormal: (H^T H)[{},{}] = {}",
                        i,
                        j,
                        gram.get(i, j)
                    )));
                }
            }
        }
        Ok(Self { h })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.h
    }

    pub fn n_samples(&self) -> usize {
        self.h.rows()
    }

    pub fn k(&self) -> usize {
        self.h.cols()
    }
}

/// Solves `max Tr(H^T K H)` over column-orthonormal n-by-k matrices: the
/// top-k eigenvectors of the kernel.
///
/// The basis is returned as the eigensolver produced it; rotation and sign
/// ambiguity inside the top-k eigenspace is deliberate, the downstream
/// alignment step absorbs it. A near-zero eigengap at position k is only
/// logged because the aligned result does not depend on the basis choice.
pub fn kernel_kmeans_partition(kernel: &KernelMatrix, k: usize) -> Result<BasicPartition> {
    let n = kernel.n_samples();
    if k < 2 || k > n {
        return Err(Error::InvalidInput(format!(
            "cluster count k={} out of range for {} samples",
            k, n
        )));
    }
    let (values, vectors) = sym_eigendecomposition(kernel.gram())?;
    if k < n {
        let gap = values[k - 1] - values[k];
        let scale = values[0].abs().max(1.0);
        if gap.abs() <= 1e-10 * scale {
            log::warn!(
                "near-degenerate eigengap at position {} ({:.3e}); partition basis is arbitrary within the eigenspace",
                k,
                gap
            );
        }
    }
    let h = DenseMatrix::from_fn(n, k, |i, j| vectors.get(i, j));
    BasicPartition::new(h)
}
