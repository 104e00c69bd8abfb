//! Continual fusion of per-view partitions.
//!
//! The stream state is deliberately tiny: an n-by-k consensus partition
//! accumulated over the views seen so far plus a k-by-k orthogonal category
//! memory. Absorbing a view runs a three-step alternating maximization
//! (hard assignment, memory, alignment) and then folds the aligned partition
//! into the consensus; the view's own partition is dropped afterwards.

use crate::error::{Error, Result};
use crate::kmeans::kmeans_rows;
use crate::linalg::{orthogonal_factor, DenseMatrix};
use crate::partition::BasicPartition;

/// Hard one-hot-per-row cluster assignment, n-by-k.
#[derive(Debug, Clone)]
pub struct AssignmentMatrix {
    e: DenseMatrix,
    labels: Vec<usize>,
}

impl AssignmentMatrix {
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("assignment needs k >= 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidInput(format!(
                "label {bad} out of range for k={k}"
            )));
        }
        let e = DenseMatrix::from_fn(labels.len(), k, |i, j| {
            if labels[i] == j {
                1.0
            } else {
                0.0
            }
        });
        Ok(Self { e, labels })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.e
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.e.cols()
    }
}

/// Orthogonal k-by-k matrix whose rows store the learned category
/// directions carried across views.
#[derive(Debug, Clone)]
pub struct CategoryMemory {
    b: DenseMatrix,
}

impl CategoryMemory {
    pub fn new(b: DenseMatrix) -> Result<Self> {
        check_orthogonal(&b, "category memory")?;
        Ok(Self { b })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.b
    }

    pub fn k(&self) -> usize {
        self.b.rows()
    }
}

/// Orthogonal k-by-k rotation aligning a new view's partition with the
/// consensus frame.
#[derive(Debug, Clone)]
pub struct AlignmentMatrix {
    w: DenseMatrix,
}

impl AlignmentMatrix {
    pub fn new(w: DenseMatrix) -> Result<Self> {
        check_orthogonal(&w, "alignment")?;
        Ok(Self { w })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            w: DenseMatrix::identity(k),
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.w
    }
}

fn check_orthogonal(q: &DenseMatrix, what: &str) -> Result<()> {
    if q.rows() != q.cols() || q.rows() == 0 {
        return Err(Error::InvalidInput(format!(
            "{what} matrix is {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let gram = q.transpose().matmul(q);
    let k = q.rows();
    for i in 0..k {
        for j in 0..k {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (gram.get(i, j) - expected).abs() > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "{what} matrix is not orthogonal: (Q^T Q)[{i},{j}] = {}",
                    gram.get(i, j)
                )));
            }
        }
    }
    Ok(())
}

/// Running sum of aligned partitions; the only per-sample state kept
/// across views.
#[derive(Debug, Clone)]
pub struct ConsensusPartition {
    h_star: DenseMatrix,
    views_absorbed: usize,
}

impl ConsensusPartition {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.h_star
    }

    pub fn views_absorbed(&self) -> usize {
        self.views_absorbed
    }

    pub fn n_samples(&self) -> usize {
        self.h_star.rows()
    }

    pub fn k(&self) -> usize {
        self.h_star.cols()
    }

    /// Mean of the aligned partitions absorbed so far. Its Frobenius norm
    /// stays near sqrt(k) regardless of how many views contributed, which
    /// keeps the regularization weight on a stable scale.
    pub fn normalized(&self) -> DenseMatrix {
        self.h_star.scale(1.0 / self.views_absorbed as f64)
    }
}

/// Knobs for one continual stream.
#[derive(Debug, Clone)]
pub struct StreamConfig {
    /// Weight of the consensus regularizer.
    pub lambda: f64,
    /// Relative objective-change bound that ends the inner loop.
    pub epsilon: f64,
    pub max_inner_iters: usize,
    /// Seed for every randomized step (memory init, final labels).
    pub seed: u64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            epsilon: 1e-4,
            max_inner_iters: 100,
            seed: 0,
        }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::InvalidInput("max_inner_iters must be >= 1".into()));
        }
        Ok(())
    }
}

/// Intermediates from the last inner iteration plus the full objective trace.
#[derive(Debug, Clone)]
pub struct IterationWorkspace {
    /// Assignment score matrix `(H_t W + lambda H~) B^T`, n-by-k.
    pub a: DenseMatrix,
    /// Memory target `E^T (H_t W + lambda H~)`, k-by-k.
    pub d: DenseMatrix,
    /// Alignment target `H_t^T E B`, k-by-k.
    pub r: DenseMatrix,
    /// Objective value after each inner iteration, non-decreasing.
    pub objective_trace: Vec<f64>,
}

/// Everything absorb produces besides the updated state.
#[derive(Debug, Clone)]
pub struct AbsorbReport {
    pub assignment: AssignmentMatrix,
    pub workspace: IterationWorkspace,
    /// False when the loop hit `max_inner_iters` without meeting epsilon.
    pub converged: bool,
    pub iterations: usize,
    /// Frobenius norm of the normalized consensus at loop entry; together
    /// with lambda and k it pins the objective's upper bound.
    pub h_tilde_norm: f64,
}

fn check_same_shape(a: &DenseMatrix, b: &DenseMatrix, what: &str) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::InvalidInput(format!(
            "{what}: {}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `H_t W + lambda H~`, the fused target both the assignment and the memory
/// step score against.
fn fused_target(ht_aligned: &DenseMatrix, h_tilde: &DenseMatrix, lambda: f64) -> DenseMatrix {
    ht_aligned.add(&h_tilde.scale(lambda))
}

/// Assignment scores `A = (H_t W + lambda H~) B^T`.
pub fn assignment_scores(
    ht_aligned: &DenseMatrix,
    h_tilde: &DenseMatrix,
    memory: &CategoryMemory,
    lambda: f64,
) -> Result<DenseMatrix> {
    check_same_shape(ht_aligned, h_tilde, "aligned partition vs consensus")?;
    if ht_aligned.cols() != memory.k() {
        return Err(Error::InvalidInput(format!(
            "partition has k={} but memory has k={}",
            ht_aligned.cols(),
            memory.k()
        )));
    }
    Ok(fused_target(ht_aligned, h_tilde, lambda).matmul(&memory.matrix().transpose()))
}

/// Row-argmax one-hot assignment; ties go to the lowest column index.
pub fn assignment_from_scores(scores: &DenseMatrix) -> AssignmentMatrix {
    let labels: Vec<usize> = (0..scores.rows())
        .map(|i| {
            let row = scores.row(i);
            let mut best = 0;
            let mut best_v = row[0];
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > best_v {
                    best_v = v;
                    best = j;
                }
            }
            best
        })
        .collect();
    AssignmentMatrix::from_labels(labels, scores.cols()).expect("labels within range")
}

/// Maximizes `Tr(E A^T)` over one-hot-per-row assignments.
pub fn update_assignment(
    ht_aligned: &DenseMatrix,
    h_tilde: &DenseMatrix,
    memory: &CategoryMemory,
    lambda: f64,
) -> Result<AssignmentMatrix> {
    let scores = assignment_scores(ht_aligned, h_tilde, memory, lambda)?;
    Ok(assignment_from_scores(&scores))
}

/// Memory target `D = E^T (H_t W + lambda H~)`, computed by accumulating
/// rows into their assigned category.
pub fn memory_target(
    assignment: &AssignmentMatrix,
    ht_aligned: &DenseMatrix,
    h_tilde: &DenseMatrix,
    lambda: f64,
) -> Result<DenseMatrix> {
    check_same_shape(ht_aligned, h_tilde, "aligned partition vs consensus")?;
    if assignment.n_samples() != ht_aligned.rows() || assignment.k() != ht_aligned.cols() {
        return Err(Error::InvalidInput(format!(
            "assignment is {}x{} but partition is {}x{}",
            assignment.n_samples(),
            assignment.k(),
            ht_aligned.rows(),
            ht_aligned.cols()
        )));
    }
    let fused = fused_target(ht_aligned, h_tilde, lambda);
    let k = ht_aligned.cols();
    let mut d = DenseMatrix::zeros(k, k);
    for (i, &label) in assignment.labels().iter().enumerate() {
        for j in 0..k {
            d.set(label, j, d.get(label, j) + fused.get(i, j));
        }
    }
    Ok(d)
}

/// Maximizes `Tr(B^T D)` over orthogonal B: the polar factor of D. The
/// maximum equals the nuclear norm of D. An all-zero row of D (an empty
/// category) is fine; the factor is still orthogonal.
pub fn update_memory(
    assignment: &AssignmentMatrix,
    ht_aligned: &DenseMatrix,
    h_tilde: &DenseMatrix,
    lambda: f64,
) -> Result<CategoryMemory> {
    let d = memory_target(assignment, ht_aligned, h_tilde, lambda)?;
    CategoryMemory::new(orthogonal_factor(&d)?)
}

/// Alignment target `R = H_t^T E B`.
pub fn alignment_target(
    partition: &BasicPartition,
    assignment: &AssignmentMatrix,
    memory: &CategoryMemory,
) -> Result<DenseMatrix> {
    if assignment.n_samples() != partition.n_samples()
        || assignment.k() != partition.k()
        || memory.k() != partition.k()
    {
        return Err(Error::InvalidInput(
            "alignment target dimension mismatch".into(),
        ));
    }
    // E B is n-by-k with row i equal to row label(i) of B.
    let k = partition.k();
    let n = partition.n_samples();
    let eb = DenseMatrix::from_fn(n, k, |i, j| memory.matrix().get(assignment.labels()[i], j));
    Ok(partition.matrix().transpose().matmul(&eb))
}

/// Maximizes `Tr(W^T R)` over orthogonal W: the polar factor of R.
pub fn update_alignment(
    partition: &BasicPartition,
    assignment: &AssignmentMatrix,
    memory: &CategoryMemory,
) -> Result<AlignmentMatrix> {
    let r = alignment_target(partition, assignment, memory)?;
    AlignmentMatrix::new(orthogonal_factor(&r)?)
}

/// The fusion objective
/// `sqrt(k/n) * (Tr(B^T E^T H_t W) + lambda Tr(B^T E^T H~))`.
///
/// The sqrt(k/n) factor puts the one-hot assignment on the same Frobenius
/// scale (sqrt(k)) as the orthonormal partitions it is compared against, so
/// the value is independent of the sample count. Under this scale
/// Cauchy-Schwarz bounds the objective by `k + lambda * ||H~||_F * sqrt(k)`.
pub fn objective(
    assignment: &AssignmentMatrix,
    memory: &CategoryMemory,
    alignment: &AlignmentMatrix,
    partition: &BasicPartition,
    h_tilde: &DenseMatrix,
    lambda: f64,
) -> f64 {
    let ht_aligned = partition.matrix().matmul(alignment.matrix());
    objective_from_aligned(assignment, memory, &ht_aligned, h_tilde, lambda)
}

fn objective_from_aligned(
    assignment: &AssignmentMatrix,
    memory: &CategoryMemory,
    ht_aligned: &DenseMatrix,
    h_tilde: &DenseMatrix,
    lambda: f64,
) -> f64 {
    let n = ht_aligned.rows();
    let k = ht_aligned.cols();
    let fused = fused_target(ht_aligned, h_tilde, lambda);
    let mut total = 0.0;
    for (i, &label) in assignment.labels().iter().enumerate() {
        let b_row = memory.matrix().row(label);
        total += fused
            .row(i)
            .iter()
            .zip(b_row)
            .map(|(f, b)| f * b)
            .sum::<f64>();
    }
    (k as f64 / n as f64).sqrt() * total
}

/// The whole retained state of one continual stream.
#[derive(Debug, Clone)]
pub struct StreamState {
    consensus: ConsensusPartition,
    memory: CategoryMemory,
}

impl StreamState {
    /// Starts a stream from the first view: the consensus is the partition
    /// itself and the memory is the orthogonal polar factor of the k-means
    /// centroids of its rows.
    pub fn init(h1: &BasicPartition, config: &StreamConfig) -> Result<Self> {
        config.validate()?;
        let k = h1.k();
        let km = kmeans_rows(h1.matrix(), k, 10, config.seed)?;
        let b = orthogonal_factor(&km.centroids)?;
        Ok(Self {
            consensus: ConsensusPartition {
                h_star: h1.matrix().clone(),
                views_absorbed: 1,
            },
            memory: CategoryMemory::new(b)?,
        })
    }

    pub fn consensus(&self) -> &ConsensusPartition {
        &self.consensus
    }

    pub fn memory(&self) -> &CategoryMemory {
        &self.memory
    }

    pub fn n_samples(&self) -> usize {
        self.consensus.n_samples()
    }

    pub fn k(&self) -> usize {
        self.consensus.k()
    }

    /// Count of retained floating-point numbers: exactly n*k + k*k.
    pub fn retained_numbers(&self) -> usize {
        self.consensus.h_star.rows() * self.consensus.h_star.cols()
            + self.memory.b.rows() * self.memory.b.cols()
    }

    /// Folds one incoming view into the stream. The partition is consumed;
    /// nothing view-specific survives beyond the updated consensus, the
    /// updated memory and the returned report.
    pub fn absorb(&mut self, ht: BasicPartition, config: &StreamConfig) -> Result<AbsorbReport> {
        config.validate()?;
        let k = self.k();
        if ht.n_samples() != self.n_samples() || ht.k() != k {
            return Err(Error::InvalidInput(format!(
                "incoming partition is {}x{}, state is {}x{}",
                ht.n_samples(),
                ht.k(),
                self.n_samples(),
                k
            )));
        }

        let h_tilde = self.consensus.normalized();
        let h_tilde_norm = h_tilde.frobenius_norm();
        let mut alignment = AlignmentMatrix::identity(k);
        let mut trace: Vec<f64> = Vec::new();
        let mut converged = false;
        let mut last: Option<(AssignmentMatrix, DenseMatrix, DenseMatrix, DenseMatrix)> = None;

        for _ in 0..config.max_inner_iters {
            let ht_aligned = ht.matrix().matmul(alignment.matrix());

            let a = assignment_scores(&ht_aligned, &h_tilde, &self.memory, config.lambda)?;
            let assignment = assignment_from_scores(&a);

            let d = memory_target(&assignment, &ht_aligned, &h_tilde, config.lambda)?;
            self.memory = CategoryMemory::new(orthogonal_factor(&d)?)?;

            let r = alignment_target(&ht, &assignment, &self.memory)?;
            alignment = AlignmentMatrix::new(orthogonal_factor(&r)?)?;

            let ht_realigned = ht.matrix().matmul(alignment.matrix());
            let obj = objective_from_aligned(
                &assignment,
                &self.memory,
                &ht_realigned,
                &h_tilde,
                config.lambda,
            );
            last = Some((assignment, a, d, r));

            if let Some(&prev) = trace.last() {
                let rel = (obj - prev).abs() / obj.abs().max(1e-12);
                trace.push(obj);
                if rel <= config.epsilon {
                    converged = true;
                    break;
                }
            } else {
                trace.push(obj);
            }
        }

        let (assignment, a, d, r) = last.expect("max_inner_iters >= 1");
        self.consensus.h_star = self
            .consensus
            .h_star
            .add(&ht.matrix().matmul(alignment.matrix()));
        self.consensus.views_absorbed += 1;

        Ok(AbsorbReport {
            assignment,
            workspace: IterationWorkspace {
                a,
                d,
                r,
                objective_trace: trace.clone(),
            },
            converged,
            iterations: trace.len(),
            h_tilde_norm,
        })
    }

    /// Hard labels from seeded multi-restart k-means on the rows of the
    /// normalized consensus.
    pub fn final_labels(&self, seed: u64) -> Result<Vec<usize>> {
        let points = self.consensus.normalized();
        Ok(kmeans_rows(&points, self.k(), 10, seed)?.labels)
    }
}
