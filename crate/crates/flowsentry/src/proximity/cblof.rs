//! Clustering-Based Local Outlier Factor, unweighted variant.
//!
//! An internal seeded k-means partitions the train set; clusters are split
//! into large and small by the alpha/beta boundary rule, and a point's score
//! is its distance to its own centroid (large cluster) or the nearest large
//! centroid (small cluster).

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::rng_from;

use super::euclidean;

const MAX_LLOYD_ITERS: usize = 100;
const CENTROID_SHIFT_TOL: f64 = 1e-4;
const EMPTY_CLUSTER_RETRIES: usize = 10;

#[derive(Debug, Clone)]
pub struct CblofModel {
    /// Centroids ordered by cluster size, descending.
    pub centroids: Vec<Vec<f64>>,
    pub cluster_sizes: Vec<usize>,
    /// Indices into `centroids` forming the large-cluster set, i.e. 0..boundary.
    pub large_set: Vec<usize>,
    pub alpha: f64,
    pub beta: f64,
}

/// Index of the nearest centroid; ties break toward the lowest index.
fn nearest_centroid(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = super::squared_distance(centroid, x);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// Farthest-point initialization: random first centroid, then repeatedly the
/// point farthest from its nearest chosen centroid.
fn init_centroids(data: &FeatureMatrix, k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = data.n_rows();
    let first = rng.random_range(0..n);
    let mut centroids = vec![data.row(first).to_vec()];
    while centroids.len() < k {
        let mut far_idx = 0usize;
        let mut far_d = -1.0;
        for i in 0..n {
            let (_, d) = nearest_centroid(&centroids, data.row(i));
            if d > far_d {
                far_d = d;
                far_idx = i;
            }
        }
        centroids.push(data.row(far_idx).to_vec());
    }
    centroids
}

fn lloyd(data: &FeatureMatrix, k: usize, rng: &mut impl Rng) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let n = data.n_rows();
    let p = data.n_cols();
    let mut centroids = init_centroids(data, k, rng);
    let mut assignment = vec![0usize; n];

    for _ in 0..MAX_LLOYD_ITERS {
        for i in 0..n {
            assignment[i] = nearest_centroid(&centroids, data.row(i)).0;
        }

        let mut sums = vec![vec![0.0; p]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignment[i]] += 1;
            for j in 0..p {
                sums[assignment[i]][j] += data.get(i, j);
            }
        }

        let mut retries = 0;
        while let Some(empty) = counts.iter().position(|&c| c == 0) {
            if retries >= EMPTY_CLUSTER_RETRIES {
                return Err(Error::FitFailure {
                    kind: "cblof",
                    stage: "kmeans",
                    message: "could not repopulate empty cluster".into(),
                });
            }
            retries += 1;
            // Re-seed the empty cluster at the point farthest from its centroid.
            let mut far_idx = 0usize;
            let mut far_d = -1.0;
            for i in 0..n {
                let d = super::squared_distance(&centroids[assignment[i]], data.row(i));
                if d > far_d && counts[assignment[i]] > 1 {
                    far_d = d;
                    far_idx = i;
                }
            }
            let old = assignment[far_idx];
            for j in 0..p {
                sums[old][j] -= data.get(far_idx, j);
                sums[empty][j] += data.get(far_idx, j);
            }
            counts[old] -= 1;
            counts[empty] += 1;
            assignment[far_idx] = empty;
            centroids[empty] = data.row(far_idx).to_vec();
        }

        let mut max_shift: f64 = 0.0;
        for c in 0..k {
            let mut shift = 0.0;
            for j in 0..p {
                let new = sums[c][j] / counts[c] as f64;
                shift += (new - centroids[c][j]) * (new - centroids[c][j]);
                centroids[c][j] = new;
            }
            max_shift = max_shift.max(shift.sqrt());
        }
        if max_shift < CENTROID_SHIFT_TOL {
            break;
        }
    }

    for i in 0..n {
        assignment[i] = nearest_centroid(&centroids, data.row(i)).0;
    }
    let mut counts = vec![0usize; k];
    for &a in &assignment {
        counts[a] += 1;
    }
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::FitFailure {
            kind: "cblof",
            stage: "kmeans",
            message: "empty cluster after convergence".into(),
        });
    }
    Ok((centroids, counts))
}

/// Smallest boundary b (count of large clusters, sizes sorted descending)
/// with either prefix mass >= alpha*n or a size ratio drop >= beta.
pub fn boundary_index(sizes: &[usize], n: usize, alpha: f64, beta: f64) -> usize {
    let k = sizes.len();
    let mut prefix = 0usize;
    for b in 1..=k {
        prefix += sizes[b - 1];
        if prefix as f64 >= alpha * n as f64 {
            return b;
        }
        if b < k && sizes[b - 1] as f64 / sizes[b] as f64 >= beta {
            return b;
        }
    }
    k
}

pub fn fit_cblof(
    train: &FeatureMatrix,
    k_clusters: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<CblofModel> {
    if k_clusters < 2 {
        return Err(Error::InvalidParameter("cblof.k_clusters must be >= 2".into()));
    }
    if train.n_rows() < k_clusters {
        return Err(Error::InvalidParameter(format!(
            "cblof.k_clusters = {k_clusters} exceeds n_train = {}",
            train.n_rows()
        )));
    }
    if !(0.0 < alpha && alpha <= 1.0) || beta < 1.0 {
        return Err(Error::InvalidParameter("cblof requires 0 < alpha <= 1 and beta >= 1".into()));
    }

    let mut rng = rng_from(seed);
    let (centroids, sizes) = lloyd(train, k_clusters, &mut rng)?;

    // Sort clusters by size descending; tie-break by original index for
    // determinism.
    let mut order: Vec<usize> = (0..k_clusters).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    let centroids: Vec<Vec<f64>> = order.iter().map(|&c| centroids[c].clone()).collect();
    let cluster_sizes: Vec<usize> = order.iter().map(|&c| sizes[c]).collect();

    let b = boundary_index(&cluster_sizes, train.n_rows(), alpha, beta);
    Ok(CblofModel {
        centroids,
        cluster_sizes,
        large_set: (0..b).collect(),
        alpha,
        beta,
    })
}

fn score_row(model: &CblofModel, x: &[f64]) -> f64 {
    let (own, _) = nearest_centroid(&model.centroids, x);
    if model.large_set.contains(&own) {
        euclidean(&model.centroids[own], x)
    } else {
        model
            .large_set
            .iter()
            .map(|&c| euclidean(&model.centroids[c], x))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn score_cblof(model: &CblofModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let p = model.centroids[0].len();
    if x.n_cols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| score_row(model, x.row(i)))
        .collect())
}
