//! Uniform detector contract: fit on unlabeled train features, score with
//! the shared "higher = more anomalous" orientation, threshold into hard
//! predictions at the (1 - contamination) quantile of train scores.

use std::fmt;
use std::str::FromStr;

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::iforest::{fit_iforest, score_iforest, IforestModel};
use crate::ocsvm::{fit_ocsvm, score_ocsvm, OcsvmModel, OcsvmParams};
use crate::proximity::{
    fit_cblof, fit_hbos, fit_knn, score_cblof, score_hbos, score_knn, CblofModel, HbosModel, KnnModel,
};
use crate::stats::{fit_mcd, fit_pca, score_mcd, score_pca, ComponentSelector, McdModel, PcaModel};

pub type ScoreVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Cblof,
    Hbos,
    Iforest,
    Knn,
    Mcd,
    Ocsvm,
    Pca,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 7] = [
        DetectorKind::Cblof,
        DetectorKind::Hbos,
        DetectorKind::Iforest,
        DetectorKind::Knn,
        DetectorKind::Mcd,
        DetectorKind::Ocsvm,
        DetectorKind::Pca,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Cblof => "cblof",
            DetectorKind::Hbos => "hbos",
            DetectorKind::Iforest => "iforest",
            DetectorKind::Knn => "knn",
            DetectorKind::Mcd => "mcd",
            DetectorKind::Ocsvm => "ocsvm",
            DetectorKind::Pca => "pca",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = DetectorKind::ALL.iter().map(|k| k.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown detector `{s}`; valid kinds are {}",
                    names.join(", ")
                ))
            })
    }
}

/// Every tunable across the seven detectors, addressable through dotted
/// `module.key` names for CLI passthrough.
#[derive(Debug, Clone)]
pub struct Params {
    pub knn_k: usize,
    pub cblof_k_clusters: usize,
    pub cblof_alpha: f64,
    pub cblof_beta: f64,
    pub hbos_bins: usize,
    pub iforest_trees: usize,
    pub iforest_subsample: usize,
    pub pca_selector: ComponentSelector,
    pub pca_variance_floor: f64,
    pub mcd_h: Option<usize>,
    pub mcd_starts: usize,
    pub ocsvm: OcsvmParams,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            knn_k: 5,
            cblof_k_clusters: 8,
            cblof_alpha: 0.9,
            cblof_beta: 5.0,
            hbos_bins: 10,
            iforest_trees: 100,
            iforest_subsample: 256,
            pca_selector: ComponentSelector::All,
            pca_variance_floor: 0.2,
            mcd_h: None,
            mcd_starts: 50,
            ocsvm: OcsvmParams::default(),
        }
    }
}

impl Params {
    /// Apply one dotted override, e.g. `iforest.trees=200` or
    /// `pca.selector=minor`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("cannot parse `{value}` for `{key}`")))
        }
        match key {
            "knn.k" => self.knn_k = parse(key, value)?,
            "cblof.k_clusters" => self.cblof_k_clusters = parse(key, value)?,
            "cblof.alpha" => self.cblof_alpha = parse(key, value)?,
            "cblof.beta" => self.cblof_beta = parse(key, value)?,
            "hbos.bins" => self.hbos_bins = parse(key, value)?,
            "iforest.trees" => self.iforest_trees = parse(key, value)?,
            "iforest.subsample" => self.iforest_subsample = parse(key, value)?,
            "pca.selector" => {
                self.pca_selector = match value {
                    "all" => ComponentSelector::All,
                    "minor" => ComponentSelector::Minor {
                        variance_floor: self.pca_variance_floor,
                    },
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "pca.selector must be `all` or `minor`, got `{value}`"
                        )))
                    }
                }
            }
            "pca.variance_floor" => {
                self.pca_variance_floor = parse(key, value)?;
                if let ComponentSelector::Minor { .. } = self.pca_selector {
                    self.pca_selector = ComponentSelector::Minor {
                        variance_floor: self.pca_variance_floor,
                    };
                }
            }
            "mcd.h" => self.mcd_h = Some(parse(key, value)?),
            "mcd.starts" => self.mcd_starts = parse(key, value)?,
            "ocsvm.nu" => self.ocsvm.nu = parse(key, value)?,
            "ocsvm.gamma" => self.ocsvm.gamma = Some(parse(key, value)?),
            "ocsvm.tol" => self.ocsvm.tol = parse(key, value)?,
            "ocsvm.max_updates" => self.ocsvm.max_updates = parse(key, value)?,
            "ocsvm.max_train_rows" => self.ocsvm.max_train_rows = parse(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown hyperparameter key `{key}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    pub params: Params,
    pub contamination: f64,
    pub seed: u64,
}

impl DetectorConfig {
    pub fn new(kind: DetectorKind) -> Self {
        Self {
            kind,
            params: Params::default(),
            contamination: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub enum FittedState {
    Cblof(CblofModel),
    Hbos(HbosModel),
    Iforest(IforestModel),
    Knn(KnnModel),
    Mcd(McdModel),
    Ocsvm(OcsvmModel),
    Pca(PcaModel),
}

/// Min/max/quartiles of the train scores the threshold was set from.
#[derive(Debug, Clone, Copy)]
pub struct ScoreSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct DetectorModel {
    pub kind: DetectorKind,
    pub state: FittedState,
    pub threshold: f64,
    pub train_score_summary: ScoreSummary,
    pub warnings: Vec<String>,
}

fn summarize(sorted: &[f64]) -> ScoreSummary {
    let at = |q: f64| sorted[((q * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1)];
    ScoreSummary {
        min: sorted[0],
        q25: at(0.25),
        median: at(0.5),
        q75: at(0.75),
        max: sorted[sorted.len() - 1],
    }
}

/// Fit a detector on unlabeled train features and set the prediction
/// threshold at the (1 - contamination) empirical quantile of train scores.
pub fn fit(config: &DetectorConfig, train: &FeatureMatrix) -> Result<DetectorModel> {
    if !(config.contamination > 0.0 && config.contamination <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "contamination must be in (0, 0.5], got {}",
            config.contamination
        )));
    }
    let p = &config.params;
    let mut warnings = Vec::new();
    let state = match config.kind {
        DetectorKind::Cblof => FittedState::Cblof(fit_cblof(
            train,
            p.cblof_k_clusters,
            p.cblof_alpha,
            p.cblof_beta,
            config.seed,
        )?),
        DetectorKind::Hbos => FittedState::Hbos(fit_hbos(train, p.hbos_bins)?),
        DetectorKind::Iforest => {
            FittedState::Iforest(fit_iforest(train, p.iforest_trees, p.iforest_subsample, config.seed)?)
        }
        DetectorKind::Knn => FittedState::Knn(fit_knn(train, p.knn_k)?),
        DetectorKind::Mcd => FittedState::Mcd(fit_mcd(train, p.mcd_h, p.mcd_starts, config.seed)?),
        DetectorKind::Ocsvm => {
            let model = fit_ocsvm(train, &p.ocsvm, config.seed)?;
            if !model.converged {
                warnings.push(format!(
                    "ocsvm did not converge (violation {:.3e})",
                    model.achieved_violation
                ));
            }
            if model.subsampled {
                warnings.push(format!("ocsvm train capped at {} rows", p.ocsvm.max_train_rows));
            }
            FittedState::Ocsvm(model)
        }
        DetectorKind::Pca => FittedState::Pca(fit_pca(train, p.pca_selector)?),
    };

    let mut model = DetectorModel {
        kind: config.kind,
        state,
        threshold: 0.0,
        train_score_summary: ScoreSummary {
            min: 0.0,
            q25: 0.0,
            median: 0.0,
            q75: 0.0,
            max: 0.0,
        },
        warnings,
    };
    let mut train_scores = score(&model, train)?;
    train_scores.sort_by(f64::total_cmp);
    let n = train_scores.len();
    let idx = (((1.0 - config.contamination) * n as f64).ceil() as usize).clamp(1, n) - 1;
    model.threshold = train_scores[idx];
    model.train_score_summary = summarize(&train_scores);
    Ok(model)
}

/// Score rows under the shared anomaly-increasing orientation. Pure in
/// (model, X).
pub fn score(model: &DetectorModel, x: &FeatureMatrix) -> Result<ScoreVector> {
    match &model.state {
        FittedState::Cblof(m) => score_cblof(m, x),
        FittedState::Hbos(m) => score_hbos(m, x),
        FittedState::Iforest(m) => score_iforest(m, x),
        FittedState::Knn(m) => score_knn(m, x),
        FittedState::Mcd(m) => score_mcd(m, x),
        FittedState::Ocsvm(m) => score_ocsvm(m, x),
        FittedState::Pca(m) => score_pca(m, x),
    }
}

/// 1 iff score strictly exceeds the threshold; ties keep the benign side.
pub fn predict(model: &DetectorModel, x: &FeatureMatrix) -> Result<Vec<u8>> {
    Ok(score(model, x)?
        .into_iter()
        .map(|s| u8::from(s > model.threshold))
        .collect())
}
