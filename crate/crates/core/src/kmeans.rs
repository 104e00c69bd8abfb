//! Seeded multi-restart Lloyd k-means on the rows of a dense matrix.
//!
//! This is the hard-assignment workhorse behind memory initialization and
//! final label extraction. Restarts use k-means++ seeding; a restart that
//! ends with an empty cluster is discarded.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

const LLOYD_MAX_ITERS: usize = 200;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// k-by-d centroid matrix, row j is the centroid of cluster j.
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
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

/// Nearest centroid by squared distance; ties resolve to the lowest index.
fn nearest(point: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for c in 0..centroids.rows() {
        let d = squared_distance(point, centroids.row(c));
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// k-means++ seeding.
fn plus_plus_init(points: &DenseMatrix, k: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let n = points.rows();
    let d = points.cols();
    let mut centroids = DenseMatrix::zeros(k, d);
    let first = rng.random_range(0..n);
    for j in 0..d {
        centroids.set(0, j, points.get(first, j));
    }
    let mut min_d: Vec<f64> = (0..n)
        .map(|i| squared_distance(points.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = min_d.iter().sum();
        let idx = if total > 0.0 {
            let threshold = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, w) in min_d.iter().enumerate() {
                acc += w;
                if acc >= threshold {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining points coincide with existing centers.
            rng.random_range(0..n)
        };
        for j in 0..d {
            centroids.set(c, j, points.get(idx, j));
        }
        for i in 0..n {
            let dd = squared_distance(points.row(i), centroids.row(c));
            if dd < min_d[i] {
                min_d[i] = dd;
            }
        }
    }
    centroids
}

/// One Lloyd run; `None` if a cluster empties.
fn lloyd(points: &DenseMatrix, k: usize, mut centroids: DenseMatrix) -> Option<KMeansResult> {
    let n = points.rows();
    let d = points.cols();
    let mut labels = vec![0usize; n];
    for _ in 0..LLOYD_MAX_ITERS {
        let mut changed = false;
        for i in 0..n {
            let (c, _) = nearest(points.row(i), &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let mut sums = DenseMatrix::zeros(k, d);
        for i in 0..n {
            counts[labels[i]] += 1;
            for j in 0..d {
                sums.set(labels[i], j, sums.get(labels[i], j) + points.get(i, j));
            }
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }
        for c in 0..k {
            for j in 0..d {
                centroids.set(c, j, sums.get(c, j) / counts[c] as f64);
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = (0..n)
        .map(|i| squared_distance(points.row(i), centroids.row(labels[i])))
        .sum();
    Some(KMeansResult {
        labels,
        centroids,
        inertia,
    })
}

/// Clusters the rows of `points` into `k` groups, keeping the best of
/// `restarts` seeded runs. Fails with `DegenerateData` if every restart
/// ends with an empty cluster.
pub fn kmeans_rows(
    points: &DenseMatrix,
    k: usize,
    restarts: usize,
    seed: u64,
) -> Result<KMeansResult> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k={} out of range for {} points",
            k, n
        )));
    }
    if restarts == 0 {
        return Err(Error::InvalidInput("need at least one restart".into()));
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(r as u64)));
        let init = plus_plus_init(points, k, &mut rng);
        if let Some(result) = lloyd(points, k, init) {
            let better = best
                .as_ref()
                .map(|b| result.inertia < b.inertia)
                .unwrap_or(true);
            if better {
                best = Some(result);
            }
        }
    }
    best.ok_or_else(|| {
        Error::DegenerateData(format!(
            "every k-means restart produced an empty cluster (k={}, n={})",
            k, n
        ))
    })
}
