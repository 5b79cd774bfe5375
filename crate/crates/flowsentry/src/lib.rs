//! Unsupervised outlier detection for network-flow records.
//!
//! Seven detectors (CBLOF, HBOS, IForest, k-NN, MCD, OCSVM, PCA) behind one
//! fit/score/predict contract, plus a benchmark harness that sweeps the
//! benign/attack class ratio and reports AUC and accuracy per split.
//!
//! Scores follow a single orientation everywhere: larger means more anomalous.

pub mod dataset;
pub mod detector;
pub mod error;
pub mod iforest;
pub mod metrics;
pub mod ocsvm;
pub mod proximity;
pub mod rng;
pub mod stats;
pub mod sweep;

pub use dataset::{FeatureMatrix, LabeledDataset, SplitPair, Standardizer};
pub use detector::{DetectorConfig, DetectorKind, DetectorModel, Params, ScoreVector};
pub use error::{Error, Result};
pub use metrics::{accuracy, roc_auc, EvalResult};
pub use sweep::{run_sweep, SweepConfig, SweepResult};
