//! Distance- and density-flavored detectors: kNN, CBLOF, HBOS.

mod cblof;
mod hbos;
mod knn;

pub use cblof::{fit_cblof, score_cblof, CblofModel};
pub use hbos::{fit_hbos, score_hbos, HbosModel};
pub use knn::{fit_knn, score_knn, KnnModel};

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}
