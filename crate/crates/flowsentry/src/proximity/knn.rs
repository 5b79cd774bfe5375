//! k-NN outlier score: distance to the k-th nearest train row (the
//! "largest" variant, not mean-of-k). Brute-force search is the reference
//! path; it is exact by construction.

use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KnnModel {
    pub train_rows: FeatureMatrix,
    pub k: usize,
}

pub fn fit_knn(train: &FeatureMatrix, k: usize) -> Result<KnnModel> {
    if k == 0 {
        return Err(Error::InvalidParameter("knn.k must be >= 1".into()));
    }
    if k >= train.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "knn.k = {k} must be < n_train = {}",
            train.n_rows()
        )));
    }
    Ok(KnnModel {
        train_rows: train.clone(),
        k,
    })
}

/// Score one query row: k-th smallest Euclidean distance to the train rows.
/// A query that is an exact member of the train set has one zero
/// self-distance excluded before taking the k-th.
fn score_row(model: &KnnModel, x: &[f64]) -> f64 {
    let mut dists: Vec<f64> = model
        .train_rows
        .rows()
        .map(|row| super::squared_distance(row, x))
        .collect();
    if let Some(pos) = dists.iter().position(|&d| d == 0.0) {
        dists.swap_remove(pos);
    }
    // Partial sort would do; n stays small enough that a full sort is fine.
    dists.sort_by(f64::total_cmp);
    dists[model.k - 1].sqrt()
}

pub fn score_knn(model: &KnnModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.n_cols() != model.train_rows.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: model.train_rows.n_cols(),
            got: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| score_row(model, x.row(i)))
        .collect())
}
