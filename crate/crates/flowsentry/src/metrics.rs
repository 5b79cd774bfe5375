//! Rank-based ROC AUC with tie handling, plus thresholded accuracy.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

/// AUC = (R_pos - n_pos(n_pos+1)/2) / (n_pos * n_neg), with tied scores
/// receiving the mean of their rank range. Equals the probability that a
/// random positive outranks a random negative, ties counted one-half.
pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<f64> {
    assert_eq!(labels.len(), scores.len(), "labels/scores length mismatch");
    let n = labels.len();
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Average 1-based rank over the tie block [i, j].
        let avg_rank = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j + 1;
    }

    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Fraction of matching entries.
pub fn accuracy(labels: &[u8], predictions: &[u8]) -> f64 {
    assert_eq!(labels.len(), predictions.len(), "labels/predictions length mismatch");
    if labels.is_empty() {
        return 0.0;
    }
    let hits = labels.iter().zip(predictions).filter(|(a, b)| a == b).count();
    hits as f64 / labels.len() as f64
}
