//! Class-imbalance sweep: for each benign ratio and detector, resample,
//! prune, split, standardize, fit on the unlabeled train features, then
//! score and evaluate both splits.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{
    apply_standardizer, drop_constant_columns, fit_standardizer, resample_to_ratio, split_train_test,
    LabeledDataset,
};
use crate::detector::{fit, predict, score, DetectorConfig};
use crate::error::{Error, Result};
use crate::metrics::{accuracy, roc_auc};
use crate::rng::derive_seed;

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub ratios: Vec<f64>,
    pub detectors: Vec<DetectorConfig>,
    pub train_fraction: f64,
    pub master_seed: u64,
    pub repeats: usize,
    pub standardize: bool,
    /// 0 lets rayon pick; otherwise caps the worker pool for this sweep.
    pub workers: usize,
    /// Timing columns are wall-clock and vary run to run; switch them off
    /// when byte-identical output files are required.
    pub record_timings: bool,
}

/// The ratio grid used on real data; the low-benign end of the full 0.01 to
/// 0.99 range needs attack-heavy pools that flow captures rarely have.
pub const DEFAULT_RATIOS: [f64; 7] = [0.50, 0.60, 0.70, 0.80, 0.90, 0.95, 0.99];

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            ratios: DEFAULT_RATIOS.to_vec(),
            detectors: Vec::new(),
            train_fraction: 0.7,
            master_seed: 200,
            repeats: 1,
            standardize: true,
            workers: 0,
            record_timings: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub detector: String,
    pub benign_ratio: f64,
    pub repeat: usize,
    pub split: Split,
    /// None when the split held a single class or the fit failed; emitted
    /// as an empty CSV field / JSON null, never zero-filled.
    pub auc: Option<f64>,
    pub accuracy: Option<f64>,
    pub n_rows: usize,
    pub n_attack: usize,
    pub fit_ms: f64,
    pub score_ms: f64,
    pub seed: u64,
    pub warnings: String,
}

fn failure_records(
    detector: &DetectorConfig,
    ratio: f64,
    repeat: usize,
    seed: u64,
    message: &str,
) -> Vec<SweepResult> {
    [Split::Train, Split::Test]
        .into_iter()
        .map(|split| SweepResult {
            detector: detector.kind.name().to_string(),
            benign_ratio: ratio,
            repeat,
            split,
            auc: None,
            accuracy: None,
            n_rows: 0,
            n_attack: 0,
            fit_ms: 0.0,
            score_ms: 0.0,
            seed,
            warnings: message.replace([',', '\n'], ";"),
        })
        .collect()
}

fn run_point(
    config: &SweepConfig,
    data: &LabeledDataset,
    ratio_idx: usize,
    repeat: usize,
) -> Vec<SweepResult> {
    let ratio = config.ratios[ratio_idx];
    let point_seed = derive_seed(config.master_seed, (ratio_idx as u64) << 20 | repeat as u64);

    let prepared = (|| -> Result<_> {
        let resampled = resample_to_ratio(data, ratio, derive_seed(point_seed, 1))?;
        let pruned = drop_constant_columns(&resampled)?;
        let split = split_train_test(&pruned, config.train_fraction, derive_seed(point_seed, 2))?;
        let (train_x, test_x) = if config.standardize {
            let s = fit_standardizer(&split.train.features);
            (
                apply_standardizer(&s, &split.train.features)?,
                apply_standardizer(&s, &split.test.features)?,
            )
        } else {
            (split.train.features.clone(), split.test.features.clone())
        };
        Ok((split.train.labels.clone(), split.test.labels.clone(), train_x, test_x))
    })();

    let (train_labels, test_labels, train_x, test_x) = match prepared {
        Ok(parts) => parts,
        Err(err) => {
            let msg = format!("point skipped: {err}");
            return config
                .detectors
                .iter()
                .flat_map(|d| failure_records(d, ratio, repeat, point_seed, &msg))
                .collect();
        }
    };

    let mut out = Vec::with_capacity(config.detectors.len() * 2);
    for (d_idx, detector) in config.detectors.iter().enumerate() {
        let mut detector = detector.clone();
        detector.seed = derive_seed(point_seed, 16 + d_idx as u64);

        let fit_start = Instant::now();
        let model = match fit(&detector, &train_x) {
            Ok(m) => m,
            Err(err) => {
                out.extend(failure_records(&detector, ratio, repeat, point_seed, &err.to_string()));
                continue;
            }
        };
        let fit_ms = fit_start.elapsed().as_secs_f64() * 1e3;

        let evaluated = (|| -> Result<Vec<SweepResult>> {
            let mut records = Vec::with_capacity(2);
            for (split, x, labels) in [
                (Split::Train, &train_x, &train_labels),
                (Split::Test, &test_x, &test_labels),
            ] {
                let score_start = Instant::now();
                let scores = score(&model, x)?;
                let preds = predict(&model, x)?;
                let score_ms = score_start.elapsed().as_secs_f64() * 1e3;
                let mut warnings = model.warnings.join("; ");
                let auc = match roc_auc(labels, &scores) {
                    Ok(a) => Some(a),
                    Err(Error::UndefinedAuc) => {
                        if !warnings.is_empty() {
                            warnings.push_str("; ");
                        }
                        warnings.push_str("auc undefined (single-class split)");
                        None
                    }
                    Err(err) => return Err(err),
                };
                records.push(SweepResult {
                    detector: detector.kind.name().to_string(),
                    benign_ratio: ratio,
                    repeat,
                    split,
                    auc,
                    accuracy: Some(accuracy(labels, &preds)),
                    n_rows: labels.len(),
                    n_attack: labels.iter().filter(|&&l| l == 1).count(),
                    fit_ms: if config.record_timings { fit_ms } else { 0.0 },
                    score_ms: if config.record_timings { score_ms } else { 0.0 },
                    seed: point_seed,
                    warnings: warnings.replace(',', ";"),
                });
            }
            Ok(records)
        })();
        match evaluated {
            Ok(records) => out.extend(records),
            Err(err) => out.extend(failure_records(&detector, ratio, repeat, point_seed, &err.to_string())),
        }
    }
    out
}

/// Run the full grid. Per-point failures become warning records; the sweep
/// itself only errors when every point failed.
pub fn run_sweep(config: &SweepConfig, data: &LabeledDataset) -> Result<Vec<SweepResult>> {
    if config.ratios.is_empty() || config.ratios.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(Error::InvalidParameter("ratios must be non-empty and strictly inside (0,1)".into()));
    }
    if config.detectors.is_empty() {
        return Err(Error::InvalidParameter("no detectors selected".into()));
    }
    if config.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be >= 1".into()));
    }
    if data.n_attack() == 0 || data.n_benign() == 0 {
        return Err(Error::InvalidParameter("sweep data must contain both classes".into()));
    }

    let points: Vec<(usize, usize)> = (0..config.ratios.len())
        .flat_map(|r| (0..config.repeats).map(move |rep| (r, rep)))
        .collect();

    let job = || -> Vec<SweepResult> {
        points
            .par_iter()
            .flat_map(|&(ratio_idx, repeat)| run_point(config, data, ratio_idx, repeat))
            .collect()
    };
    let results = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Sweep(e.to_string()))?
            .install(job)
    } else {
        job()
    };

    if results.iter().all(|r| r.accuracy.is_none()) {
        return Err(Error::Sweep("every sweep point failed".into()));
    }
    Ok(results)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

fn csv_field(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the flat results table plus per-detector plot-data files
/// (`<kind>_auc.dat`, `<kind>_acc.dat`: ratio, train value, test value,
/// averaged over repeats).
pub fn emit_results(results: &[SweepResult], out_dir: &Path, format: OutputFormat) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Sweep("no results to emit".into()));
    }
    std::fs::create_dir_all(out_dir)?;

    match format {
        OutputFormat::Csv => {
            let mut body = String::from(
                "detector,benign_ratio,repeat,split,auc,accuracy,n_rows,n_attack,fit_ms,score_ms,seed,warnings\n",
            );
            for r in results {
                writeln!(
                    body,
                    "{},{},{},{},{},{},{},{},{:.3},{:.3},{},{}",
                    r.detector,
                    r.benign_ratio,
                    r.repeat,
                    r.split.name(),
                    csv_field(r.auc),
                    csv_field(r.accuracy),
                    r.n_rows,
                    r.n_attack,
                    r.fit_ms,
                    r.score_ms,
                    r.seed,
                    r.warnings
                )
                .expect("writing to String cannot fail");
            }
            std::fs::write(out_dir.join("results.csv"), body)?;
        }
        OutputFormat::Json => {
            let body = serde_json::to_string_pretty(results).map_err(|e| Error::Sweep(e.to_string()))?;
            std::fs::write(out_dir.join("results.json"), body)?;
        }
    }

    // One pair of gnuplot-ready data files per detector.
    let mut detectors: Vec<&str> = results.iter().map(|r| r.detector.as_str()).collect();
    detectors.sort_unstable();
    detectors.dedup();
    for kind in detectors {
        for (suffix, metric) in [("auc", true), ("acc", false)] {
            let mut body = String::from("# benign_ratio train test\n");
            let mut ratios: Vec<f64> = results
                .iter()
                .filter(|r| r.detector == kind && r.accuracy.is_some())
                .map(|r| r.benign_ratio)
                .collect();
            ratios.sort_by(f64::total_cmp);
            ratios.dedup();
            for ratio in ratios {
                let value = |split: Split| -> Option<f64> {
                    let vals: Vec<f64> = results
                        .iter()
                        .filter(|r| r.detector == kind && r.benign_ratio == ratio && r.split == split)
                        .filter_map(|r| if metric { r.auc } else { r.accuracy })
                        .collect();
                    if vals.is_empty() {
                        None
                    } else {
                        Some(vals.iter().sum::<f64>() / vals.len() as f64)
                    }
                };
                let fmt = |v: Option<f64>| v.map_or("nan".to_string(), |x| x.to_string());
                writeln!(body, "{ratio} {} {}", fmt(value(Split::Train)), fmt(value(Split::Test)))
                    .expect("writing to String cannot fail");
            }
            std::fs::write(out_dir.join(format!("{kind}_{suffix}.dat")), body)?;
        }
    }
    Ok(())
}
