//! Flow-record ingestion and preparation: CSV loading with sanitization,
//! class-ratio resampling, constant-column pruning, train/test splitting,
//! z-score standardization and a synthetic fixture generator.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

/// Dense n×p matrix of finite flow features, row-major, with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    values: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
    column_names: Vec<String>,
}

impl FeatureMatrix {
    /// Build a matrix, enforcing the type invariants: at least one row and
    /// column, all entries finite, no duplicate column names.
    pub fn new(values: Vec<f64>, n_rows: usize, n_cols: usize, column_names: Vec<String>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidMatrix("matrix must be at least 1x1".into()));
        }
        if values.len() != n_rows * n_cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} values for {}x{}, got {}",
                n_rows * n_cols,
                n_rows,
                n_cols,
                values.len()
            )));
        }
        if column_names.len() != n_cols {
            return Err(Error::InvalidMatrix("column name count != column count".into()));
        }
        let unique: HashSet<&str> = column_names.iter().map(|s| s.as_str()).collect();
        if unique.len() != n_cols {
            return Err(Error::InvalidMatrix("duplicate column names".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self {
            values,
            n_rows,
            n_cols,
            column_names,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], column_names: Vec<String>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = column_names.len();
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            if r.len() != n_cols {
                return Err(Error::InvalidMatrix("ragged rows".into()));
            }
            values.extend_from_slice(r);
        }
        Self::new(values, n_rows, n_cols, column_names)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).map(move |i| self.get(i, j))
    }

    /// New matrix keeping `indices` rows in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self {
            values,
            n_rows: indices.len(),
            n_cols: self.n_cols,
            column_names: self.column_names.clone(),
        }
    }

    /// New matrix keeping `keep` columns in the given order.
    pub fn select_cols(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::AllColumnsConstant);
        }
        let mut values = Vec::with_capacity(self.n_rows * keep.len());
        for i in 0..self.n_rows {
            let row = self.row(i);
            for &j in keep {
                values.push(row[j]);
            }
        }
        let names = keep.iter().map(|&j| self.column_names[j].clone()).collect();
        Self::new(values, self.n_rows, keep.len(), names)
    }
}

/// Features plus binary ground truth: 1 = Attack, 0 = Benign.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: FeatureMatrix,
    pub labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(features: FeatureMatrix, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::InvalidMatrix("label length != row count".into()));
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidMatrix("labels must be 0 or 1".into()));
        }
        Ok(Self { features, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.features.n_rows()
    }

    pub fn n_attack(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    pub fn n_benign(&self) -> usize {
        self.n_rows() - self.n_attack()
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Outcome of [`load_csv`]: the dataset plus how many rows were dropped
/// because they contained non-finite or unparseable feature values.
#[derive(Debug)]
pub struct LoadReport {
    pub data: LabeledDataset,
    pub dropped_rows: usize,
}

/// Load a flow CSV: header row, one textual label column, all other columns
/// numeric. Rows with NaN/Inf or unparseable feature values are dropped and
/// counted (flow datasets contain divide-by-zero rate features).
pub fn load_csv(path: &Path, label_column: &str, attack_value: &str) -> Result<LoadReport> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;

    let column_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    let n_cols = column_names.len();
    if n_cols == 0 {
        return Err(Error::InvalidMatrix("no feature columns".into()));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = 0usize;
    let mut row_buf = Vec::with_capacity(n_cols);
    for record in reader.records() {
        let record = record?;
        row_buf.clear();
        let mut ok = true;
        for (i, field) in record.iter().enumerate() {
            if i == label_idx {
                continue;
            }
            match field.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => row_buf.push(v),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok || row_buf.len() != n_cols {
            dropped += 1;
            continue;
        }
        values.extend_from_slice(&row_buf);
        labels.push(u8::from(record.get(label_idx).map(str::trim) == Some(attack_value)));
    }

    if labels.is_empty() {
        return Err(Error::EmptyAfterSanitize);
    }
    let features = FeatureMatrix::new(values, labels.len(), n_cols, column_names)?;
    Ok(LoadReport {
        data: LabeledDataset::new(features, labels)?,
        dropped_rows: dropped,
    })
}

/// Resample to a target benign fraction without replacement.
///
/// Keeps whichever class must stay whole intact and subsamples the other so
/// that `n_minority = N_majority / (benign_ratio/(1-benign_ratio))` (or the
/// mirrored formula when the attack class is the one kept whole), then
/// shuffles by `seed`. Infeasible requests error with the nearest achievable
/// ratio instead of clamping.
pub fn resample_to_ratio(data: &LabeledDataset, benign_ratio: f64, seed: u64) -> Result<LabeledDataset> {
    if !(benign_ratio > 0.0 && benign_ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "benign_ratio must be in (0,1), got {benign_ratio}"
        )));
    }
    let benign_idx: Vec<usize> = (0..data.n_rows()).filter(|&i| data.labels[i] == 0).collect();
    let attack_idx: Vec<usize> = (0..data.n_rows()).filter(|&i| data.labels[i] == 1).collect();
    let (n_benign, n_attack) = (benign_idx.len(), attack_idx.len());
    if n_benign == 0 || n_attack == 0 {
        return Err(Error::InvalidParameter("both classes must be non-empty".into()));
    }

    let odds = benign_ratio / (1.0 - benign_ratio);
    // Attack count needed if the benign pool is kept whole.
    let attack_needed = n_benign as f64 / odds;

    let mut rng = rng_from(seed);
    let (kept, sampled_from, sample_count) = if attack_needed <= n_attack as f64 {
        let want = attack_needed.round() as usize;
        if want == 0 {
            let nearest = n_benign as f64 / (n_benign as f64 + 1.0);
            return Err(Error::InfeasibleRatio {
                requested: benign_ratio,
                nearest,
            });
        }
        (&benign_idx, &attack_idx, want)
    } else {
        // Attack pool kept whole; shrink benign instead.
        let benign_needed = n_attack as f64 * odds;
        let want = benign_needed.round() as usize;
        if want == 0 {
            let nearest = 1.0 / (n_attack as f64 + 1.0);
            return Err(Error::InfeasibleRatio {
                requested: benign_ratio,
                nearest,
            });
        }
        if want > n_benign {
            let nearest = n_benign as f64 / (n_benign as f64 + n_attack as f64);
            return Err(Error::InfeasibleRatio {
                requested: benign_ratio,
                nearest,
            });
        }
        (&attack_idx, &benign_idx, want)
    };

    let picked = rand::seq::index::sample(&mut rng, sampled_from.len(), sample_count);
    let mut indices: Vec<usize> = kept.clone();
    indices.extend(picked.iter().map(|i| sampled_from[i]));
    indices.shuffle(&mut rng);
    Ok(data.select_rows(&indices))
}

/// Remove feature columns with a single distinct value in this dataset.
/// Column order is otherwise preserved. Runs on the combined resample,
/// before splitting.
pub fn drop_constant_columns(data: &LabeledDataset) -> Result<LabeledDataset> {
    let fm = &data.features;
    let keep: Vec<usize> = (0..fm.n_cols())
        .filter(|&j| {
            let first = fm.get(0, j);
            fm.column(j).any(|v| v != first)
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::AllColumnsConstant);
    }
    if keep.len() == fm.n_cols() {
        return Ok(data.clone());
    }
    Ok(LabeledDataset {
        features: fm.select_cols(&keep)?,
        labels: data.labels.clone(),
    })
}

/// Disjoint train/test row split.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub seed: u64,
}

/// Uniform random split without replacement; |train| = round(fraction · n).
pub fn split_train_test(data: &LabeledDataset, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::DegenerateSplit("need at least 2 rows".into()));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut rng = rng_from(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let (train_idx, test_idx) = order.split_at(n_train);
    Ok(SplitPair {
        train: data.select_rows(train_idx),
        test: data.select_rows(test_idx),
        seed,
    })
}

/// Per-column z-score parameters fitted on the train split only.
#[derive(Debug, Clone)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stddevs: Vec<f64>,
    /// Columns flagged constant in train; passed through unscaled.
    pub constant: Vec<bool>,
}

pub fn fit_standardizer(train: &FeatureMatrix) -> Standardizer {
    let n = train.n_rows() as f64;
    let p = train.n_cols();
    let mut means = vec![0.0; p];
    let mut stddevs = vec![0.0; p];
    let mut constant = vec![false; p];
    for j in 0..p {
        let mean = train.column(j).sum::<f64>() / n;
        let var = train.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        means[j] = mean;
        if var > 0.0 {
            stddevs[j] = var.sqrt();
        } else {
            stddevs[j] = 1.0;
            constant[j] = true;
        }
    }
    Standardizer {
        means,
        stddevs,
        constant,
    }
}

pub fn apply_standardizer(s: &Standardizer, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.n_cols() != s.means.len() {
        return Err(Error::DimensionMismatch {
            expected: s.means.len(),
            got: x.n_cols(),
        });
    }
    if s.constant.iter().any(|&c| c) {
        eprintln!("warning: constant column passed through standardizer unscaled");
    }
    let p = x.n_cols();
    let mut values = Vec::with_capacity(x.n_rows() * p);
    for row in x.rows() {
        for j in 0..p {
            if s.constant[j] {
                values.push(row[j]);
            } else {
                values.push((row[j] - s.means[j]) / s.stddevs[j]);
            }
        }
    }
    FeatureMatrix::new(values, x.n_rows(), p, x.column_names().to_vec())
}

/// Invert [`apply_standardizer`].
pub fn invert_standardizer(s: &Standardizer, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.n_cols() != s.means.len() {
        return Err(Error::DimensionMismatch {
            expected: s.means.len(),
            got: x.n_cols(),
        });
    }
    let p = x.n_cols();
    let mut values = Vec::with_capacity(x.n_rows() * p);
    for row in x.rows() {
        for j in 0..p {
            if s.constant[j] {
                values.push(row[j]);
            } else {
                values.push(row[j] * s.stddevs[j] + s.means[j]);
            }
        }
    }
    FeatureMatrix::new(values, x.n_rows(), p, x.column_names().to_vec())
}

/// Per-coordinate standard deviation of the benign cloud. Kept well above
/// 1 so that at realistic `separation` values the attack cloud overlaps
/// the benign tails instead of sitting in empty space; fully separated
/// classes make every detector trivially perfect.
const BENIGN_SPREAD: f64 = 2.5;

/// Per-coordinate standard deviation of the diffuse attack component;
/// slightly wider than the benign cloud, as spread-out attacks are the
/// regime the detectors are meant for.
const ATTACK_SPREAD: f64 = 3.0;

/// Fraction of attack rows emitted as "bursts": tight clumps of
/// near-identical flows at benign-typical feature values, the way one
/// attack tool replays the same flow shape many times. Bursts are nearly
/// unlearnable for any unsupervised detector and keep the benchmark away
/// from the ceiling; density-based methods additionally mistake them for
/// dense inlier regions.
const BURST_FRACTION: f64 = 0.5;

/// Per-coordinate standard deviation within one burst clump.
const BURST_SPREAD: f64 = 0.3;

/// Target number of rows per burst clump in the generated pool.
const BURST_CLUSTER_SIZE: usize = 200;

/// Fraction of attack rows emitted as "mismatch" flows: every feature value
/// individually unremarkable, but the correlations benign traffic always
/// carries (bytes vs. packets, duration vs. idle time) are absent, as in
/// crafted or spoofed flows. Only detectors that model joint structure can
/// see these.
const MISMATCH_FRACTION: f64 = 0.3;

/// Correlation between the two features of each benign feature pair.
const PAIR_CORRELATION: f64 = 0.9;

/// Desk-scale stand-in for a real flow dataset: benign rows from a Gaussian
/// with strongly correlated feature pairs; attack rows split between a
/// wider diffuse cloud shifted by `separation` along a random direction,
/// marginally-typical "mismatch" rows with the pair correlations broken,
/// and a few tight burst clumps anchored on benign rows.
///
/// Row order is part of the contract: all benign rows first, then diffuse
/// attacks, then mismatch attacks, then bursts.
pub fn generate_synthetic(
    n_benign: usize,
    n_attack: usize,
    p: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if n_benign == 0 || n_attack == 0 || p == 0 {
        return Err(Error::InvalidParameter("all counts must be positive".into()));
    }
    let mut rng = rng_from(derive_seed(seed, 0xf10));

    let mut direction: Vec<f64> = (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
    for d in &mut direction {
        *d *= separation / norm;
    }

    let n = n_benign + n_attack;
    let mut values = Vec::with_capacity(n * p);
    let mut labels = Vec::with_capacity(n);
    let shared_weight = PAIR_CORRELATION.sqrt();
    let noise_weight = (1.0 - PAIR_CORRELATION).sqrt();
    for _ in 0..n_benign {
        let mut j = 0;
        while j + 1 < p {
            let shared: f64 = rng.sample(StandardNormal);
            for _ in 0..2 {
                let own: f64 = rng.sample(StandardNormal);
                values.push(BENIGN_SPREAD * (shared_weight * shared + noise_weight * own));
            }
            j += 2;
        }
        if j < p {
            values.push(BENIGN_SPREAD * rng.sample::<f64, _>(StandardNormal));
        }
        labels.push(0);
    }
    let n_burst = (n_attack as f64 * BURST_FRACTION).round() as usize;
    let n_mismatch = (n_attack as f64 * MISMATCH_FRACTION).round() as usize;
    for _ in 0..n_attack - n_burst - n_mismatch {
        for d in direction.iter().take(p) {
            values.push(d + ATTACK_SPREAD * rng.sample::<f64, _>(StandardNormal));
        }
        labels.push(1);
    }
    for _ in 0..n_mismatch {
        for _ in 0..p {
            values.push(BENIGN_SPREAD * rng.sample::<f64, _>(StandardNormal));
        }
        labels.push(1);
    }
    if n_burst > 0 {
        let n_clusters = (n_burst / BURST_CLUSTER_SIZE).max(1);
        let centers: Vec<Vec<f64>> = (0..n_clusters)
            .map(|_| {
                // Anchor each clump on an actual benign row so its
                // location is indistinguishable from ordinary traffic.
                let row = rng.random_range(0..n_benign);
                values[row * p..(row + 1) * p].to_vec()
            })
            .collect();
        for i in 0..n_burst {
            for c in &centers[i % n_clusters] {
                values.push(c + BURST_SPREAD * rng.sample::<f64, _>(StandardNormal));
            }
            labels.push(1);
        }
    }
    let names = (1..=p).map(|j| format!("f{j}")).collect();
    let features = FeatureMatrix::new(values, n, p, names)?;
    LabeledDataset::new(features, labels)
}

/// Write a dataset in the ingestion CSV format (feature columns plus a
/// textual label column). `f64` Display round-trips exactly, so
/// `load_csv(write_csv(d)) == d`.
pub fn write_csv(
    data: &LabeledDataset,
    path: &Path,
    label_column: &str,
    attack_value: &str,
    benign_value: &str,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header: Vec<&str> = data.features.column_names().iter().map(String::as_str).collect();
    header.push(label_column);
    writeln!(out, "{}", header.join(","))?;
    for (row, &label) in data.features.rows().zip(&data.labels) {
        for v in row {
            write!(out, "{v},")?;
        }
        writeln!(out, "{}", if label == 1 { attack_value } else { benign_value })?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn make(labels: &[u8], col: &[f64]) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = col.iter().map(|&v| vec![v]).collect();
        let fm = FeatureMatrix::from_rows(&rows, vec!["x".into()]).unwrap();
        LabeledDataset::new(fm, labels.to_vec()).unwrap()
    }

    #[test]
    fn load_maps_labels() {
        let f = tiny_csv("a,b,Label\n1,2,Attack\n3,4,Benign\n5,6,Attack\n");
        let report = load_csv(f.path(), "Label", "Attack").unwrap();
        assert_eq!(report.data.labels, vec![1, 0, 1]);
        assert_eq!(report.dropped_rows, 0);
        assert_eq!(report.data.features.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn load_drops_nonfinite_rows() {
        let f = tiny_csv("a,b,Label\n1,inf,Attack\n3,4,Benign\n");
        let report = load_csv(f.path(), "Label", "Attack").unwrap();
        assert_eq!(report.dropped_rows, 1);
        assert_eq!(report.data.n_rows(), 1);
        assert_eq!(report.data.labels, vec![0]);
    }

    #[test]
    fn load_missing_label_column_errors() {
        let f = tiny_csv("a,b,c\n1,2,3\n");
        assert!(matches!(
            load_csv(f.path(), "Label", "Attack"),
            Err(Error::MissingLabelColumn(_))
        ));
    }

    #[test]
    fn load_all_rows_dropped_errors() {
        let f = tiny_csv("a,Label\nnan,Attack\ninf,Benign\n");
        assert!(matches!(load_csv(f.path(), "Label", "Attack"), Err(Error::EmptyAfterSanitize)));
    }

    #[test]
    fn resample_listing_arithmetic() {
        // N_benign = 9000, ratio 0.9 -> n_attack = 9000/(0.9/0.1) = 1000.
        let mut labels = vec![0u8; 9000];
        labels.extend(vec![1u8; 2000]);
        let col: Vec<f64> = (0..11000).map(|i| i as f64).collect();
        let data = make(&labels, &col);
        let out = resample_to_ratio(&data, 0.9, 7).unwrap();
        assert_eq!(out.n_attack(), 1000);
        assert_eq!(out.n_benign(), 9000);
    }

    #[test]
    fn resample_symmetric_keeps_both_whole() {
        let mut labels = vec![0u8; 100];
        labels.extend(vec![1u8; 100]);
        let col: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let out = resample_to_ratio(&make(&labels, &col), 0.5, 3).unwrap();
        assert_eq!(out.n_rows(), 200);
        assert_eq!(out.n_attack(), 100);
    }

    #[test]
    fn resample_attack_heavy_shrinks_benign() {
        // Mirrors the source dataset shape at ratio 0.2: benign must shrink.
        let mut labels = vec![0u8; 40000];
        labels.extend(vec![1u8; 17462]);
        let col: Vec<f64> = (0..57462).map(|i| i as f64).collect();
        let out = resample_to_ratio(&make(&labels, &col), 0.2, 11).unwrap();
        assert_eq!(out.n_attack(), 17462);
        let expect = 17462.0 * 0.2 / 0.8;
        assert!((out.n_benign() as f64 - expect).abs() <= 1.0);
    }

    #[test]
    fn resample_infeasible_errors_with_nearest() {
        let mut labels = vec![0u8; 10];
        labels.extend(vec![1u8; 10]);
        let col: Vec<f64> = (0..20).map(|i| i as f64).collect();
        // 0.99 benign needs ~990 benign rows from a pool of 10.
        match resample_to_ratio(&make(&labels, &col), 0.99, 1) {
            Err(Error::InfeasibleRatio { nearest, .. }) => assert!(nearest > 0.0 && nearest < 1.0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn resample_fraction_within_tolerance() {
        let mut labels = vec![0u8; 5000];
        labels.extend(vec![1u8; 5000]);
        let col: Vec<f64> = (0..10000).map(|i| i as f64).collect();
        let data = make(&labels, &col);
        for &r in &[0.01, 0.1, 0.5, 0.9, 0.99] {
            let out = resample_to_ratio(&data, r, 5).unwrap();
            let achieved = out.n_attack() as f64 / out.n_rows() as f64;
            assert!(
                (achieved - (1.0 - r)).abs() <= 1.0 / out.n_rows() as f64,
                "ratio {r}: achieved {achieved}"
            );
        }
    }

    #[test]
    fn drop_constant_removes_and_is_idempotent() {
        let rows = vec![vec![0.0, 1.0, 5.0], vec![0.0, 2.0, 5.0], vec![0.0, 3.0, 5.0]];
        let fm = FeatureMatrix::from_rows(&rows, vec!["z".into(), "v".into(), "c".into()]).unwrap();
        let data = LabeledDataset::new(fm, vec![0, 1, 0]).unwrap();
        let once = drop_constant_columns(&data).unwrap();
        assert_eq!(once.features.column_names(), &["v".to_string()]);
        let twice = drop_constant_columns(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn drop_constant_identity_when_none() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 2.0]];
        let fm = FeatureMatrix::from_rows(&rows, vec!["a".into(), "b".into()]).unwrap();
        let data = LabeledDataset::new(fm, vec![0, 1]).unwrap();
        assert_eq!(drop_constant_columns(&data).unwrap(), data);
    }

    #[test]
    fn drop_constant_all_constant_errors() {
        let rows = vec![vec![1.0], vec![1.0]];
        let fm = FeatureMatrix::from_rows(&rows, vec!["a".into()]).unwrap();
        let data = LabeledDataset::new(fm, vec![0, 1]).unwrap();
        assert!(matches!(drop_constant_columns(&data), Err(Error::AllColumnsConstant)));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let col: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let data = make(&[0, 1, 0, 1, 0, 1, 0, 1, 0, 1], &col);
        let a = split_train_test(&data, 0.7, 42).unwrap();
        assert_eq!(a.train.n_rows(), 7);
        assert_eq!(a.test.n_rows(), 3);
        let b = split_train_test(&data, 0.7, 42).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        // Disjoint by value: feature column is a permutation of 0..10.
        let mut all: Vec<f64> = a.train.features.column(0).chain(a.test.features.column(0)).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, col);
    }

    #[test]
    fn standardizer_two_point_column() {
        let fm = FeatureMatrix::from_rows(&[vec![0.0], vec![2.0]], vec!["x".into()]).unwrap();
        let s = fit_standardizer(&fm);
        let z = apply_standardizer(&s, &fm).unwrap();
        assert_eq!(z.row(0), &[-1.0]);
        assert_eq!(z.row(1), &[1.0]);
    }

    #[test]
    fn standardizer_uses_train_statistics_on_test() {
        let train = FeatureMatrix::from_rows(&[vec![0.0], vec![2.0]], vec!["x".into()]).unwrap();
        let test = FeatureMatrix::from_rows(&[vec![10.0]], vec!["x".into()]).unwrap();
        let s = fit_standardizer(&train);
        let z = apply_standardizer(&s, &test).unwrap();
        // (10 - 1) / 1, not z-scored by the test column's own stats.
        assert_eq!(z.row(0), &[9.0]);
    }

    #[test]
    fn standardizer_round_trip() {
        let data = generate_synthetic(50, 10, 4, 3.0, 9).unwrap();
        let s = fit_standardizer(&data.features);
        let z = apply_standardizer(&s, &data.features).unwrap();
        let back = invert_standardizer(&s, &z).unwrap();
        for (a, b) in data.features.rows().zip(back.rows()) {
            for (x, y) in a.iter().zip(b) {
                let scale = x.abs().max(1.0);
                assert!((x - y).abs() / scale < 1e-9);
            }
        }
    }

    #[test]
    fn synthetic_label_count_and_determinism() {
        let a = generate_synthetic(30, 7, 3, 6.0, 123).unwrap();
        assert_eq!(a.n_attack(), 7);
        assert_eq!(a.n_rows(), 37);
        let b = generate_synthetic(30, 7, 3, 6.0, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_exact() {
        let data = generate_synthetic(20, 5, 3, 4.0, 77).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.csv");
        write_csv(&data, &path, "Label", "Attack", "Benign").unwrap();
        let report = load_csv(&path, "Label", "Attack").unwrap();
        assert_eq!(report.data, data);
        assert_eq!(report.dropped_rows, 0);
    }
}
