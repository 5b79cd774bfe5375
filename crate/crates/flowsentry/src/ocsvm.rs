//! One-class SVM with RBF kernel.
//!
//! Solves min 1/2 a'Qa subject to 0 <= a_i <= 1/(nu*n), sum a_i = 1 with
//! Q_ij = exp(-gamma ||x_i - x_j||^2), by pairwise coordinate updates on the
//! maximally KKT-violating pair. The anomaly score is the negated decision
//! function, rho - sum_i a_i K(x_i, x).

use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

const ALPHA_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct OcsvmParams {
    pub nu: f64,
    /// None selects the scale heuristic 1/(p * mean feature variance).
    pub gamma: Option<f64>,
    pub tol: f64,
    pub max_updates: usize,
    /// Quadratic-cost guard: larger train sets are uniformly subsampled.
    pub max_train_rows: usize,
}

impl Default for OcsvmParams {
    fn default() -> Self {
        Self {
            nu: 0.5,
            gamma: None,
            tol: 1e-3,
            max_updates: 100_000,
            max_train_rows: 20_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OcsvmModel {
    /// Rows with alpha_i > 0.
    pub support_rows: FeatureMatrix,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub gamma: f64,
    pub nu: f64,
    pub converged: bool,
    /// Maximal KKT violation at the final iterate.
    pub achieved_violation: f64,
    /// True when max_train_rows forced a subsample.
    pub subsampled: bool,
    /// Dual objective after every accepted pairwise update; non-increasing.
    pub objective_trace: Vec<f64>,
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

fn kernel_row(data: &FeatureMatrix, i: usize, gamma: f64, out: &mut [f64]) {
    let xi = data.row(i);
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = rbf_kernel(xi, data.row(j), gamma);
    }
}

fn scale_gamma(train: &FeatureMatrix) -> f64 {
    let n = train.n_rows() as f64;
    let p = train.n_cols();
    let mut total_var = 0.0;
    for j in 0..p {
        let mean = train.column(j).sum::<f64>() / n;
        total_var += train.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    }
    let mean_var = total_var / p as f64;
    if mean_var > 0.0 {
        1.0 / (p as f64 * mean_var)
    } else {
        1.0
    }
}

pub fn fit_ocsvm(train: &FeatureMatrix, params: &OcsvmParams, seed: u64) -> Result<OcsvmModel> {
    if !(params.nu > 0.0 && params.nu <= 1.0) {
        return Err(Error::InvalidParameter(format!("ocsvm.nu must be in (0,1], got {}", params.nu)));
    }
    if train.n_rows() < 2 {
        return Err(Error::InvalidParameter("ocsvm requires n_train >= 2".into()));
    }

    let (train, subsampled) = if train.n_rows() > params.max_train_rows {
        let mut rng = rng_from(derive_seed(seed, 0x05c5));
        let mut idx = rand::seq::index::sample(&mut rng, train.n_rows(), params.max_train_rows).into_vec();
        idx.sort_unstable();
        (train.select_rows(&idx), true)
    } else {
        (train.clone(), false)
    };

    let n = train.n_rows();
    let gamma = params.gamma.unwrap_or_else(|| scale_gamma(&train));
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter("ocsvm.gamma must be > 0".into()));
    }
    let bound = 1.0 / (params.nu * n as f64);

    // Uniform feasible start; with nu = 1 it is already the unique optimum.
    let mut alpha = vec![1.0 / n as f64; n];

    // Gradient g = Q * alpha.
    let rows: Vec<&[f64]> = (0..n).map(|i| train.row(i)).collect();
    let mut grad: Vec<f64> = rows
        .par_iter()
        .map(|xi| {
            rows.iter()
                .zip(&alpha)
                .map(|(xj, &a)| a * rbf_kernel(xi, xj, gamma))
                .sum()
        })
        .collect();

    let mut ki = vec![0.0; n];
    let mut kj = vec![0.0; n];
    let mut objective_trace = Vec::new();
    let mut converged = false;
    let mut violation = 0.0;

    for _ in 0..params.max_updates {
        // Most violating pair: raise the smallest gradient below the bound,
        // lower the largest gradient with mass to give.
        let mut up: Option<usize> = None;
        let mut down: Option<usize> = None;
        for i in 0..n {
            if alpha[i] < bound - ALPHA_EPS && up.is_none_or(|u| grad[i] < grad[u]) {
                up = Some(i);
            }
            if alpha[i] > ALPHA_EPS && down.is_none_or(|d| grad[i] > grad[d]) {
                down = Some(i);
            }
        }
        let (Some(i), Some(j)) = (up, down) else {
            converged = true;
            violation = 0.0;
            break;
        };
        violation = grad[j] - grad[i];
        if violation < params.tol {
            converged = true;
            break;
        }

        kernel_row(&train, i, gamma, &mut ki);
        kernel_row(&train, j, gamma, &mut kj);

        let eta = ki[i] + kj[j] - 2.0 * ki[j];
        let max_step = (bound - alpha[i]).min(alpha[j]);
        let step = if eta > 0.0 {
            (violation / eta).min(max_step)
        } else {
            max_step
        };
        if step <= 0.0 {
            converged = true;
            break;
        }

        alpha[i] += step;
        alpha[j] -= step;
        for k in 0..n {
            grad[k] += step * (ki[k] - kj[k]);
        }
        objective_trace.push(0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>());
    }

    // rho from margin support vectors; fall back to the midpoint between the
    // bounded-alpha and zero-alpha sides when none exist.
    let margin_tol = bound * 1e-6;
    let margin: Vec<f64> = (0..n)
        .filter(|&i| alpha[i] > margin_tol && alpha[i] < bound - margin_tol)
        .map(|i| grad[i])
        .collect();
    let rho = if !margin.is_empty() {
        margin.iter().sum::<f64>() / margin.len() as f64
    } else {
        let at_bound = (0..n)
            .filter(|&i| alpha[i] >= bound - margin_tol)
            .map(|i| grad[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let at_zero = (0..n)
            .filter(|&i| alpha[i] <= margin_tol)
            .map(|i| grad[i])
            .fold(f64::INFINITY, f64::min);
        match (at_bound.is_finite(), at_zero.is_finite()) {
            (true, true) => 0.5 * (at_bound + at_zero),
            (true, false) => at_bound,
            (false, true) => at_zero,
            (false, false) => 0.0,
        }
    };

    let support_idx: Vec<usize> = (0..n).filter(|&i| alpha[i] > ALPHA_EPS).collect();
    let alphas: Vec<f64> = support_idx.iter().map(|&i| alpha[i]).collect();
    if !converged {
        eprintln!("warning: ocsvm hit the update cap with KKT violation {violation:.3e}");
    }
    Ok(OcsvmModel {
        support_rows: train.select_rows(&support_idx),
        alphas,
        rho,
        gamma,
        nu: params.nu,
        converged,
        achieved_violation: violation,
        subsampled,
        objective_trace,
    })
}

pub fn score_ocsvm(model: &OcsvmModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.n_cols() != model.support_rows.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: model.support_rows.n_cols(),
            got: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let q = x.row(i);
            let f: f64 = model
                .support_rows
                .rows()
                .zip(&model.alphas)
                .map(|(sv, &a)| a * rbf_kernel(sv, q, model.gamma))
                .sum();
            model.rho - f
        })
        .collect())
}
