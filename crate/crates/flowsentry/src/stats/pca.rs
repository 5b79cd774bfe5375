//! PCA outlier score: squared projections onto principal axes, each scaled
//! by its eigenvalue. With all components selected this is the Mahalanobis
//! distance squared under the train covariance.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

use super::{subset_covariance, subset_mean};

/// Relative eigenvalue floor guarding near-singular covariances.
const EIGENVALUE_FLOOR_RATIO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComponentSelector {
    /// Every component; equivalent to Mahalanobis distance in the PCA basis.
    All,
    /// Only components with eigenvalue <= variance_floor * lambda_1; probes
    /// the minor-subspace flavor of PCA outlier scoring.
    Minor { variance_floor: f64 },
}

#[derive(Debug, Clone)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    /// Sorted descending, non-negative.
    pub eigenvalues: Vec<f64>,
    /// Column j is the eigenvector paired with eigenvalues[j]; orthonormal.
    pub eigenvectors: DMatrix<f64>,
    pub selector: ComponentSelector,
}

pub fn fit_pca(train: &FeatureMatrix, selector: ComponentSelector) -> Result<PcaModel> {
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    let mean = subset_mean(train, &rows);
    let cov = subset_covariance(train, &rows, &mean);
    if cov.iter().all(|&v| v == 0.0) {
        return Err(Error::FitFailure {
            kind: "pca",
            stage: "covariance",
            message: "zero covariance (all rows identical)".into(),
        });
    }

    let eig = cov.symmetric_eigen();
    let p = train.n_cols();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j].max(0.0)).collect();
    let mut eigenvectors = DMatrix::zeros(p, p);
    for (out, &j) in order.iter().enumerate() {
        eigenvectors.set_column(out, &eig.eigenvectors.column(j));
    }
    Ok(PcaModel {
        mean,
        eigenvalues,
        eigenvectors,
        selector,
    })
}

fn selected_components(model: &PcaModel) -> Vec<usize> {
    match model.selector {
        ComponentSelector::All => (0..model.eigenvalues.len()).collect(),
        ComponentSelector::Minor { variance_floor } => {
            let lead = model.eigenvalues[0];
            (0..model.eigenvalues.len())
                .filter(|&j| model.eigenvalues[j] <= variance_floor * lead)
                .collect()
        }
    }
}

pub fn score_pca(model: &PcaModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let p = model.mean.len();
    if x.n_cols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: x.n_cols(),
        });
    }
    let floor = EIGENVALUE_FLOOR_RATIO * model.eigenvalues[0];
    let components = selected_components(model);
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            components
                .iter()
                .map(|&j| {
                    let proj: f64 = (0..p)
                        .map(|a| (row[a] - model.mean[a]) * model.eigenvectors[(a, j)])
                        .sum();
                    proj * proj / model.eigenvalues[j].max(floor)
                })
                .sum()
        })
        .collect())
}
