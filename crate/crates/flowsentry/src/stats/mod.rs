//! Covariance-based detectors: PCA score and FAST-MCD robust Mahalanobis.

mod mcd;
mod pca;

pub use mcd::{fit_mcd, score_mcd, McdModel};
pub use pca::{fit_pca, score_pca, ComponentSelector, PcaModel};

use nalgebra::{DMatrix, DVector};

use crate::dataset::FeatureMatrix;

/// Column means of a row subset.
pub(crate) fn subset_mean(x: &FeatureMatrix, rows: &[usize]) -> DVector<f64> {
    let p = x.n_cols();
    let mut mean = DVector::zeros(p);
    for &i in rows {
        for j in 0..p {
            mean[j] += x.get(i, j);
        }
    }
    mean / rows.len() as f64
}

/// Sample covariance (divisor n-1) of a row subset around its own mean.
pub(crate) fn subset_covariance(x: &FeatureMatrix, rows: &[usize], mean: &DVector<f64>) -> DMatrix<f64> {
    let p = x.n_cols();
    let mut cov = DMatrix::zeros(p, p);
    for &i in rows {
        for a in 0..p {
            let da = x.get(i, a) - mean[a];
            for b in a..p {
                cov[(a, b)] += da * (x.get(i, b) - mean[b]);
            }
        }
    }
    let denom = (rows.len() - 1).max(1) as f64;
    for a in 0..p {
        for b in a..p {
            cov[(a, b)] /= denom;
            cov[(b, a)] = cov[(a, b)];
        }
    }
    cov
}
