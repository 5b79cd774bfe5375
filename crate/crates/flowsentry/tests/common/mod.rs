//! Independent reference implementations and shared helpers for the
//! integration suites. Nothing here calls into the library's scoring paths
//! it is used to check.

// Each test binary compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use flowsentry::FeatureMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> FeatureMatrix {
    let names = (0..rows[0].len()).map(|j| format!("c{j}")).collect();
    FeatureMatrix::from_rows(rows, names).unwrap()
}

pub fn random_rows(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..p).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

/// Brute-force k-th nearest-neighbor distance with one zero self-distance
/// excluded, evaluated over every pairwise distance.
pub fn knn_oracle(train: &[Vec<f64>], query: &[f64], k: usize) -> f64 {
    let mut dists: Vec<f64> = train
        .iter()
        .map(|row| {
            row.iter()
                .zip(query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    if let Some(pos) = dists.iter().position(|&d| d == 0.0) {
        dists.remove(pos);
    }
    dists.sort_by(f64::total_cmp);
    dists[k - 1]
}

/// O(n_pos * n_neg) pairwise AUC: each positive-negative pair contributes 1
/// if the positive outranks, 1/2 on a tie.
pub fn auc_oracle(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut out = vec![0.0; n];
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && v[order[j + 1]] == v[order[i]] {
                j += 1;
            }
            let avg = (i + j + 2) as f64 / 2.0;
            for &idx in &order[i..=j] {
                out[idx] = avg;
            }
            i = j + 1;
        }
        out
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx.sqrt() * vy.sqrt()).max(1e-300)
}

/// Dense projected-gradient solver for the one-class SVM dual on small
/// instances: min 1/2 a'Qa over the C-capped simplex.
pub struct QpOracle {
    pub alphas: Vec<f64>,
    pub objective: f64,
}

pub fn ocsvm_qp_oracle(rows: &[Vec<f64>], gamma: f64, nu: f64, iterations: usize) -> QpOracle {
    let n = rows.len();
    let cap = 1.0 / (nu * n as f64);
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d2: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            q[i][j] = (-gamma * d2).exp();
        }
    }

    // Projection onto {0 <= a <= cap, sum a = 1} by bisection on the shift.
    let project = |v: &[f64]| -> Vec<f64> {
        let clip_sum = |t: f64| v.iter().map(|x| (x - t).clamp(0.0, cap)).sum::<f64>();
        let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - cap - 1.0;
        let mut hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if clip_sum(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        v.iter().map(|x| (x - t).clamp(0.0, cap)).collect()
    };

    let step = 1.0 / n as f64;
    let mut alpha = vec![1.0 / n as f64; n];
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..n)
            .map(|i| q[i].iter().zip(&alpha).map(|(k, a)| k * a).sum())
            .collect();
        let moved: Vec<f64> = alpha.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
        alpha = project(&moved);
    }

    let mut objective = 0.0;
    for i in 0..n {
        for j in 0..n {
            objective += 0.5 * alpha[i] * q[i][j] * alpha[j];
        }
    }
    QpOracle { alphas: alpha, objective }
}
