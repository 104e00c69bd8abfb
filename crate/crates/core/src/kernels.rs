//! Per-view kernel (Gram) matrices and squared-weight linear combinations.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// One view of the data: the same n samples described by d view-specific
/// features.
#[derive(Debug, Clone)]
pub struct ViewData {
    pub view_id: usize,
    features: DenseMatrix,
}

impl ViewData {
    pub fn new(view_id: usize, features: DenseMatrix) -> Result<Self> {
        if features.rows() < 2 {
            return Err(Error::InvalidInput(format!(
                "view {} has {} samples, need at least 2",
                view_id,
                features.rows()
            )));
        }
        if features.cols() < 1 {
            return Err(Error::InvalidInput(format!(
                "view {} has no feature columns",
                view_id
            )));
        }
        Ok(Self { view_id, features })
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    /// Returns a copy with each feature column standardized to zero mean and
    /// unit variance. Constant columns are centered and left unscaled, so an
    /// all-zero column stays all-zero.
    pub fn zscored(&self) -> ViewData {
        let n = self.features.rows();
        let d = self.features.cols();
        let mut means = vec![0.0; d];
        let mut stds = vec![0.0; d];
        for j in 0..d {
            let mut sum = 0.0;
            for i in 0..n {
                sum += self.features.get(i, j);
            }
            means[j] = sum / n as f64;
        }
        for j in 0..d {
            let mut ss = 0.0;
            for i in 0..n {
                let c = self.features.get(i, j) - means[j];
                ss += c * c;
            }
            let std = (ss / n as f64).sqrt();
            stds[j] = if std > 1e-12 { std } else { 1.0 };
        }
        let features =
            DenseMatrix::from_fn(n, d, |i, j| (self.features.get(i, j) - means[j]) / stds[j]);
        ViewData {
            view_id: self.view_id,
            features,
        }
    }
}

/// Symmetric positive semidefinite Gram matrix for one view.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    gram: DenseMatrix,
}

impl KernelMatrix {
    /// Wraps a Gram matrix, rejecting non-square or asymmetric input.
    /// Positive semidefiniteness is an invariant of the constructions in
    /// this module and is asserted spectrally by the test suite rather than
    /// re-verified on every call.
    pub fn new(gram: DenseMatrix) -> Result<Self> {
        if gram.rows() != gram.cols() {
            return Err(Error::InvalidInput(format!(
                "gram matrix is {}x{}",
                gram.rows(),
                gram.cols()
            )));
        }
        let scale = gram.frobenius_norm().max(1.0);
        if gram.asymmetry() > 1e-8 * scale {
            return Err(Error::InvalidInput(format!(
                "gram matrix asymmetry {:.3e} exceeds tolerance",
                gram.asymmetry()
            )));
        }
        Ok(Self { gram })
    }

    pub fn n_samples(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    /// Double-centered copy: `(I - 11^T/n) K (I - 11^T/n)`, the usual
    /// preprocessing before the spectral relaxation.
    pub fn centered(&self) -> KernelMatrix {
        let n = self.gram.rows();
        let nf = n as f64;
        let mut row_mean = vec![0.0; n];
        let mut total = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.gram.get(i, j);
            }
            row_mean[i] = s / nf;
            total += s;
        }
        let grand = total / (nf * nf);
        let centered = DenseMatrix::from_fn(n, n, |i, j| {
            self.gram.get(i, j) - row_mean[i] - row_mean[j] + grand
        });
        // Symmetric by construction; PSD is preserved because the centering
        // is a congruence with a symmetric projector.
        KernelMatrix { gram: centered }
    }
}

/// Kernel family for one view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `K(x, y) = <x, y>`.
    Linear,
    /// `K(x, y) = exp(-||x - y||^2 / (2 sigma^2))`.
    Rbf(Bandwidth),
}

/// RBF bandwidth selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Median of the pairwise Euclidean distances.
    MedianHeuristic,
    /// Fixed positive sigma.
    Fixed(f64),
}

/// Squared-weight coefficients for combining per-view kernels.
#[derive(Debug, Clone)]
pub struct KernelCombination {
    beta: Vec<f64>,
}

impl KernelCombination {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidInput("empty coefficient vector".into()));
        }
        if beta.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidInput(
                "kernel coefficients must be finite and non-negative".into(),
            ));
        }
        Ok(Self { beta })
    }

    /// Uniform weights `1/sqrt(m)` so the squared weights sum to one.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("zero views".into()));
        }
        Ok(Self {
            beta: vec![1.0 / (m as f64).sqrt(); m],
        })
    }

    /// Rescaled so the squared weights sum to one.
    pub fn normalized(&self) -> Result<Self> {
        let ss: f64 = self.beta.iter().map(|b| b * b).sum();
        if ss <= 0.0 {
            return Err(Error::DegenerateData(
                "cannot normalize an all-zero coefficient vector".into(),
            ));
        }
        let s = ss.sqrt();
        Ok(Self {
            beta: self.beta.iter().map(|b| b / s).collect(),
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Median of the pairwise Euclidean distances over all i < j.
fn median_pairwise_distance(features: &DenseMatrix) -> f64 {
    let n = features.rows();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(squared_distance(features.row(i), features.row(j)).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let mid = dists.len() / 2;
    if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    }
}

/// Builds the Gram matrix of one view under the requested kernel.
pub fn build_kernel(view: &ViewData, spec: KernelSpec) -> Result<KernelMatrix> {
    let x = view.features();
    let n = x.rows();
    let gram = match spec {
        KernelSpec::Linear => {
            DenseMatrix::from_fn(n, n, |i, j| {
                x.row(i).iter().zip(x.row(j)).map(|(a, b)| a * b).sum()
            })
        }
        KernelSpec::Rbf(bandwidth) => {
            let sigma = match bandwidth {
                Bandwidth::Fixed(s) => {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "rbf bandwidth must be positive and finite, got {s}"
                        )));
                    }
                    s
                }
                Bandwidth::MedianHeuristic => {
                    let med = median_pairwise_distance(x);
                    if med <= 0.0 {
                        return Err(Error::DegenerateData(
                            "median pairwise distance is zero; cannot pick an rbf bandwidth"
                                .into(),
                        ));
                    }
                    med
                }
            };
            let denom = 2.0 * sigma * sigma;
            let mut gram = DenseMatrix::zeros(n, n);
            for i in 0..n {
                gram.set(i, i, 1.0);
                for j in (i + 1)..n {
                    let v = (-squared_distance(x.row(i), x.row(j)) / denom).exp();
                    gram.set(i, j, v);
                    gram.set(j, i, v);
                }
            }
            gram
        }
    };
    KernelMatrix::new(gram)
}

/// Entrywise combination `sum_p beta_p^2 K_p`.
pub fn combine_kernels(
    kernels: &[KernelMatrix],
    combo: &KernelCombination,
) -> Result<KernelMatrix> {
    if kernels.is_empty() {
        return Err(Error::InvalidInput("no kernels to combine".into()));
    }
    if kernels.len() != combo.len() {
        return Err(Error::InvalidInput(format!(
            "{} kernels but {} coefficients",
            kernels.len(),
            combo.len()
        )));
    }
    let n = kernels[0].n_samples();
    if let Some(bad) = kernels.iter().find(|k| k.n_samples() != n) {
        return Err(Error::InvalidInput(format!(
            "kernel size mismatch: expected {}x{}, found {}x{}",
            n,
            n,
            bad.n_samples(),
            bad.n_samples()
        )));
    }
    let mut gram = DenseMatrix::zeros(n, n);
    for (kernel, beta) in kernels.iter().zip(combo.beta()) {
        let w = beta * beta;
        gram = gram.add(&kernel.gram().scale(w));
    }
    KernelMatrix::new(gram)
}
