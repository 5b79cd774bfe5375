//! Isolation Forest: random partition trees over subsamples, path-length
//! aggregation, score s(x) = 2^(-E(h(x))/c(psi)).

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

const EULER_MASCHERONI: f64 = 0.577_215_664_9;

/// Average unsuccessful-search path length in a binary search tree of m
/// nodes; normalizes isolation path lengths.
pub fn average_path_length(m: usize) -> f64 {
    match m {
        0 | 1 => 0.0,
        2 => 1.0,
        _ => {
            let m = m as f64;
            let harmonic = (m - 1.0).ln() + EULER_MASCHERONI;
            2.0 * harmonic - 2.0 * (m - 1.0) / m
        }
    }
}

#[derive(Debug, Clone)]
pub enum TreeNode {
    Internal {
        split_feature: usize,
        split_value: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    External {
        size: usize,
    },
}

#[derive(Debug, Clone)]
pub struct IsolationTree {
    pub root: TreeNode,
    pub height_limit: usize,
}

#[derive(Debug, Clone)]
pub struct IforestModel {
    pub trees: Vec<IsolationTree>,
    pub subsample_size: usize,
    pub normalizer: f64,
}

fn build_node(
    data: &FeatureMatrix,
    rows: &[usize],
    depth: usize,
    height_limit: usize,
    rng: &mut impl Rng,
) -> TreeNode {
    if rows.len() <= 1 || depth >= height_limit {
        return TreeNode::External { size: rows.len() };
    }

    // Uniform random feature; constant features are discarded and redrawn.
    let p = data.n_cols();
    let mut candidates: Vec<usize> = (0..p).collect();
    let (feature, lo, hi) = loop {
        if candidates.is_empty() {
            // All features constant within this node: the rows are identical.
            return TreeNode::External { size: rows.len() };
        }
        let pick = rng.random_range(0..candidates.len());
        let f = candidates.swap_remove(pick);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &i in rows {
            let v = data.get(i, f);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi > lo {
            break (f, lo, hi);
        }
    };

    // Uniform split on the open interval (lo, hi); both children non-empty
    // because lo < split <= values at hi.
    let split_value = loop {
        let s = lo + rng.random_range(0.0..1.0) * (hi - lo);
        if s > lo && s < hi {
            break s;
        }
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&i| data.get(i, feature) < split_value);
    TreeNode::Internal {
        split_feature: feature,
        split_value,
        left: Box::new(build_node(data, &left_rows, depth + 1, height_limit, rng)),
        right: Box::new(build_node(data, &right_rows, depth + 1, height_limit, rng)),
    }
}

pub fn fit_iforest(train: &FeatureMatrix, trees: usize, subsample: usize, seed: u64) -> Result<IforestModel> {
    if trees == 0 || subsample == 0 {
        return Err(Error::InvalidParameter("iforest.trees and iforest.subsample must be >= 1".into()));
    }
    if train.n_rows() < 2 {
        return Err(Error::InvalidParameter("iforest requires n_train >= 2".into()));
    }
    let psi = subsample.min(train.n_rows());
    let height_limit = (psi as f64).log2().ceil() as usize;

    let built: Vec<IsolationTree> = (0..trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(derive_seed(seed, t as u64));
            let rows: Vec<usize> = rand::seq::index::sample(&mut rng, train.n_rows(), psi).into_vec();
            IsolationTree {
                root: build_node(train, &rows, 0, height_limit, &mut rng),
                height_limit,
            }
        })
        .collect();

    Ok(IforestModel {
        trees: built,
        subsample_size: psi,
        normalizer: average_path_length(psi),
    })
}

fn path_length(tree: &IsolationTree, x: &[f64]) -> f64 {
    let mut node = &tree.root;
    let mut edges = 0usize;
    loop {
        match node {
            TreeNode::External { size } => return edges as f64 + average_path_length(*size),
            TreeNode::Internal {
                split_feature,
                split_value,
                left,
                right,
            } => {
                node = if x[*split_feature] < *split_value { left } else { right };
                edges += 1;
            }
        }
    }
}

pub fn score_iforest(model: &IforestModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    let expected = expect_cols(model);
    if let Some(p) = expected {
        if x.n_cols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                got: x.n_cols(),
            });
        }
    }
    Ok((0..x.n_rows())
        .into_par_iter()
        .map(|i| {
            let row = x.row(i);
            let mean_path: f64 =
                model.trees.iter().map(|t| path_length(t, row)).sum::<f64>() / model.trees.len() as f64;
            2f64.powf(-mean_path / model.normalizer.max(f64::MIN_POSITIVE))
        })
        .collect())
}

/// Highest split-feature index seen in the forest; trees of all-identical
/// data carry no splits, in which case any width is accepted.
fn expect_cols(model: &IforestModel) -> Option<usize> {
    fn walk(node: &TreeNode, max: &mut Option<usize>) {
        if let TreeNode::Internal {
            split_feature,
            left,
            right,
            ..
        } = node
        {
            *max = Some(max.map_or(*split_feature, |m| m.max(*split_feature)));
            walk(left, max);
            walk(right, max);
        }
    }
    let mut max = None;
    for t in &model.trees {
        walk(&t.root, &mut max);
    }
    max.map(|m| m + 1)
}
