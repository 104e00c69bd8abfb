//! Batch late fusion over all views at once, the non-streaming comparator.
//!
//! Uses the same assignment/memory/alignment steps as the continual path but
//! holds every per-view partition in memory and re-fuses them each outer
//! iteration. View weights stay fixed at the uniform `1/sqrt(m)`.

use crate::continual::{
    assignment_from_scores, AlignmentMatrix, AssignmentMatrix, CategoryMemory, StreamConfig,
};
use crate::error::{Error, Result};
use crate::kernels::KernelCombination;
use crate::kmeans::kmeans_rows;
use crate::linalg::{orthogonal_factor, DenseMatrix};
use crate::partition::BasicPartition;

/// Final state of a batch fusion run.
#[derive(Debug, Clone)]
pub struct BatchState {
    pub assignment: AssignmentMatrix,
    pub memory: CategoryMemory,
    pub alignments: Vec<AlignmentMatrix>,
    pub beta: KernelCombination,
    /// Mean of the aligned partitions at convergence.
    pub m_avg: DenseMatrix,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Weighted fusion `X = sum_p beta_p H_p W_p` and the average `M`.
fn fuse(
    partitions: &[BasicPartition],
    alignments: &[AlignmentMatrix],
    beta: &[f64],
) -> (DenseMatrix, DenseMatrix) {
    let n = partitions[0].n_samples();
    let k = partitions[0].k();
    let mut x = DenseMatrix::zeros(n, k);
    let mut m_avg = DenseMatrix::zeros(n, k);
    for ((p, w), &b) in partitions.iter().zip(alignments).zip(beta) {
        let aligned = p.matrix().matmul(w.matrix());
        x = x.add(&aligned.scale(b));
        m_avg = m_avg.add(&aligned);
    }
    let m_avg = m_avg.scale(1.0 / partitions.len() as f64);
    (x, m_avg)
}

fn batch_objective(
    assignment: &AssignmentMatrix,
    memory: &CategoryMemory,
    x: &DenseMatrix,
    m_avg: &DenseMatrix,
    lambda: f64,
) -> f64 {
    let n = x.rows();
    let k = x.cols();
    let fused = x.add(&m_avg.scale(lambda));
    let mut total = 0.0;
    for (i, &label) in assignment.labels().iter().enumerate() {
        total += fused
            .row(i)
            .iter()
            .zip(memory.matrix().row(label))
            .map(|(f, b)| f * b)
            .sum::<f64>();
    }
    (k as f64 / n as f64).sqrt() * total
}

/// Alternating maximization over assignment, memory and all per-view
/// alignments, with the view weights held uniform. Labels come from
/// k-means on the fused matrix.
pub fn batch_late_fusion(
    partitions: &[BasicPartition],
    lambda: f64,
    config: &StreamConfig,
) -> Result<(BatchState, Vec<usize>)> {
    config.validate()?;
    if partitions.is_empty() {
        return Err(Error::InvalidInput("no partitions to fuse".into()));
    }
    let n = partitions[0].n_samples();
    let k = partitions[0].k();
    for p in partitions {
        if p.n_samples() != n || p.k() != k {
            return Err(Error::InvalidInput(format!(
                "partition shape mismatch: expected {}x{}, found {}x{}",
                n,
                k,
                p.n_samples(),
                p.k()
            )));
        }
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )));
    }
    let m = partitions.len();
    let beta = KernelCombination::uniform(m)?;

    let km = kmeans_rows(partitions[0].matrix(), k, 10, config.seed)?;
    let mut memory = CategoryMemory::new(orthogonal_factor(&km.centroids)?)?;
    let mut alignments: Vec<AlignmentMatrix> =
        (0..m).map(|_| AlignmentMatrix::identity(k)).collect();
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut assignment = AssignmentMatrix::from_labels(vec![0; n], k)?;

    for _ in 0..config.max_inner_iters {
        let (x, m_avg) = fuse(partitions, &alignments, beta.beta());
        let fused = x.add(&m_avg.scale(lambda));

        let scores = fused.matmul(&memory.matrix().transpose());
        assignment = assignment_from_scores(&scores);

        // D = E^T (X + lambda M), accumulated one row at a time.
        let mut d = DenseMatrix::zeros(k, k);
        for (i, &label) in assignment.labels().iter().enumerate() {
            for j in 0..k {
                d.set(label, j, d.get(label, j) + fused.get(i, j));
            }
        }
        memory = CategoryMemory::new(orthogonal_factor(&d)?)?;

        // Each view's alignment detaches: maximize Tr(W_p^T H_p^T E B).
        let eb = DenseMatrix::from_fn(n, k, |i, j| {
            memory.matrix().get(assignment.labels()[i], j)
        });
        for (p, w) in partitions.iter().zip(alignments.iter_mut()) {
            let r = p.matrix().transpose().matmul(&eb);
            *w = AlignmentMatrix::new(orthogonal_factor(&r)?)?;
        }

        let (x, m_avg) = fuse(partitions, &alignments, beta.beta());
        let obj = batch_objective(&assignment, &memory, &x, &m_avg, lambda);
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

    let (x, m_avg) = fuse(partitions, &alignments, beta.beta());
    let labels = kmeans_rows(&x, k, 10, config.seed)?.labels;

    Ok((
        BatchState {
            assignment,
            memory,
            alignments,
            beta,
            m_avg,
            objective_trace: trace,
            converged,
        },
        labels,
    ))
}
