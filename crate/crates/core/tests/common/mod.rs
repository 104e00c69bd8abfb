//! Shared helpers for the integration suites: an independent Jacobi
//! eigensolver used as the decomposition oracle, seeded samplers for
//! orthogonal/orthonormal/PSD matrices, and brute-force enumerators.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use cmvc::linalg::DenseMatrix;
use cmvc::partition::BasicPartition;

/// Cyclic Jacobi eigendecomposition for small symmetric matrices.
/// Independent of the library's eigensolver on purpose: it is the oracle
/// the library is checked against. Returns eigenvalues sorted
/// non-increasing and matching eigenvector columns.
pub fn jacobi_symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut v = vec![vec![0.0f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..300 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i][j] * m[i][j];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    let mip = m[i][p];
                    let miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m[p][j];
                    let mqj = m[q][j];
                    m[p][j] = c * mpj - s * mqj;
                    m[q][j] = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v[i][p];
                    let viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[i][i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| v[i][order[j]]);
    (values, vectors)
}

pub fn standard_normal_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let normal = Normal::new(0.0, 1.0).unwrap();
    DenseMatrix::from_fn(rows, cols, |_, _| normal.sample(rng))
}

/// Gram-Schmidt orthonormalization of the columns of a random Gaussian
/// matrix; re-draws a column if it degenerates.
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    assert!(cols <= rows);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut candidate: Vec<f64> = (0..rows).map(|_| normal.sample(rng)).collect();
        for existing in &columns {
            let dot: f64 = candidate.iter().zip(existing).map(|(a, b)| a * b).sum();
            for (c, e) in candidate.iter_mut().zip(existing) {
                *c -= dot * e;
            }
        }
        let norm: f64 = candidate.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for c in candidate.iter_mut() {
                *c /= norm;
            }
            columns.push(candidate);
        }
    }
    DenseMatrix::from_fn(rows, cols, |i, j| columns[j][i])
}

/// Random square orthogonal matrix.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    random_orthonormal(n, n, rng)
}

/// Random symmetric positive semidefinite matrix `G^T G / n`.
pub fn random_psd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let g = standard_normal_matrix(n, n, rng);
    let p = g.transpose().matmul(&g).scale(1.0 / n as f64);
    // Symmetrize away round-off.
    p.add(&p.transpose()).scale(0.5)
}

/// Column-orthonormal partition built from labels: a normalized one-hot
/// matrix optionally rotated by a random orthogonal k-by-k matrix.
pub fn partition_from_labels(
    labels: &[usize],
    k: usize,
    rotate: Option<&mut ChaCha8Rng>,
) -> BasicPartition {
    let n = labels.len();
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    assert!(counts.iter().all(|&c| c > 0), "labels must cover 0..k");
    let h = DenseMatrix::from_fn(n, k, |i, j| {
        if labels[i] == j {
            1.0 / (counts[j] as f64).sqrt()
        } else {
            0.0
        }
    });
    let h = match rotate {
        Some(rng) => h.matmul(&random_orthogonal(k, rng)),
        None => h,
    };
    BasicPartition::new(h).unwrap()
}

/// Balanced labels `i % k` with `flips` random reassignments.
pub fn noisy_labels(n: usize, k: usize, flips: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    for _ in 0..flips {
        let i = rng.random_range(0..n);
        labels[i] = rng.random_range(0..k);
    }
    labels
}

/// Exhaustive maximum of `sum_i A[i, c_i]` over all k^n one-hot-per-row
/// assignments, summed in row order to match the implementation exactly.
pub fn exhaustive_assignment_max(scores: &DenseMatrix) -> f64 {
    let n = scores.rows();
    let k = scores.cols();
    let mut choice = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    loop {
        let total: f64 = (0..n).map(|i| scores.get(i, choice[i])).sum();
        if total > best {
            best = total;
        }
        // Odometer increment.
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Exhaustive best one-to-one label mapping accuracy for small class
/// counts: max over permutations of the matched fraction.
pub fn exhaustive_permutation_accuracy(pred: &[usize], truth: &[usize], classes: usize) -> f64 {
    assert_eq!(pred.len(), truth.len());
    let mut perm: Vec<usize> = (0..classes).collect();
    let mut best = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let matched = pred
            .iter()
            .zip(truth)
            .filter(|&(&a, &b)| p[a] == b)
            .count();
        if matched > best {
            best = matched;
        }
    });
    best as f64 / pred.len() as f64
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
