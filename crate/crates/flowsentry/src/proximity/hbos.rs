//! Histogram-Based Outlier Score with static-width bins.
//!
//! Per feature: a uniform-width histogram over the train min..max, heights
//! normalized so the tallest bin is 1, empty bins floored at `HEIGHT_FLOOR`.
//! Score is the sum over features of log2(1/height) at the value's bin;
//! out-of-range values clamp to the edge bins.

use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

pub const HEIGHT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct FeatureHistogram {
    /// B+1 edges, strictly increasing unless the feature was constant.
    pub bin_edges: Vec<f64>,
    /// B heights in [HEIGHT_FLOOR, 1], max exactly 1.
    pub normalized_heights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HbosModel {
    pub histograms: Vec<FeatureHistogram>,
    pub bins: usize,
}

fn bin_of(hist: &FeatureHistogram, v: f64) -> usize {
    let b = hist.normalized_heights.len();
    let lo = hist.bin_edges[0];
    let hi = hist.bin_edges[b];
    if hi <= lo {
        return 0; // constant feature collapses to one bin
    }
    let t = (v - lo) / (hi - lo);
    let idx = (t * b as f64).floor();
    (idx.max(0.0) as usize).min(b - 1)
}

pub fn fit_hbos(train: &FeatureMatrix, bins: usize) -> Result<HbosModel> {
    if bins < 2 {
        return Err(Error::InvalidParameter("hbos.bins must be >= 2".into()));
    }
    let histograms = (0..train.n_cols())
        .map(|j| {
            let lo = train.column(j).fold(f64::INFINITY, f64::min);
            let hi = train.column(j).fold(f64::NEG_INFINITY, f64::max);
            let width = (hi - lo) / bins as f64;
            let bin_edges: Vec<f64> = (0..=bins).map(|b| lo + b as f64 * width).collect();

            let mut counts = vec![0usize; bins];
            let probe = FeatureHistogram {
                bin_edges: bin_edges.clone(),
                normalized_heights: vec![0.0; bins],
            };
            for v in train.column(j) {
                counts[bin_of(&probe, v)] += 1;
            }
            let max = *counts.iter().max().expect("bins >= 2") as f64;
            let normalized_heights = counts
                .iter()
                .map(|&c| if c == 0 { HEIGHT_FLOOR } else { c as f64 / max })
                .collect();
            FeatureHistogram {
                bin_edges,
                normalized_heights,
            }
        })
        .collect();
    Ok(HbosModel { histograms, bins })
}

fn score_row(model: &HbosModel, x: &[f64]) -> f64 {
    model
        .histograms
        .iter()
        .zip(x)
        .map(|(hist, &v)| {
            let h = hist.normalized_heights[bin_of(hist, v)];
            (1.0 / h).log2()
        })
        .sum()
}

pub fn score_hbos(model: &HbosModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.n_cols() != model.histograms.len() {
        return Err(Error::DimensionMismatch {
            expected: model.histograms.len(),
            got: x.n_cols(),
        });
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| score_row(model, x.row(i)))
        .collect())
}
