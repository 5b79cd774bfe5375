//! Cross-module pipeline properties: split partitioning, resampling
//! tolerance, pruning idempotence, AUC symmetry, and separation sanity for
//! the detectors on synthetic data.

mod common;

use proptest::prelude::*;

use flowsentry::dataset::{
    drop_constant_columns, generate_synthetic, resample_to_ratio, split_train_test, FeatureMatrix,
    LabeledDataset,
};
use flowsentry::detector::{fit, score, DetectorConfig, DetectorKind};
use flowsentry::roc_auc;

use common::{knn_oracle, matrix_from_rows};

fn indexed_dataset(n: usize) -> LabeledDataset {
    // One feature equals the row index, so rows stay identifiable.
    let rows: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64, (i % 3) as f64]).collect();
    let fm = FeatureMatrix::from_rows(&rows, vec!["idx".into(), "aux".into()]).unwrap();
    let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 4 == 0)).collect();
    LabeledDataset::new(fm, labels).unwrap()
}

#[test]
fn split_partitions_for_many_seeds() {
    let data = indexed_dataset(50);
    for seed in 0..1000u64 {
        let split = split_train_test(&data, 0.7, seed).unwrap();
        assert_eq!(split.train.n_rows(), 35);
        assert_eq!(split.test.n_rows(), 15);
        let mut ids: Vec<f64> = split
            .train
            .features
            .column(0)
            .chain(split.test.features.column(0))
            .collect();
        ids.sort_by(f64::total_cmp);
        let expect: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(ids, expect, "seed {seed}: not a disjoint partition");
    }
}

#[test]
fn constant_in_resample_only_is_removed() {
    // Column "flag" varies in the full dataset (two attack rows carry 5.0)
    // but most subsamples at ratio 0.99 pick a single attack row with
    // flag = 1.0, leaving the column constant in the resample.
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..99 {
        rows.push(vec![i as f64, 1.0]);
        labels.push(0);
    }
    for i in 0..50 {
        let flag = if i < 2 { 5.0 } else { 1.0 };
        rows.push(vec![200.0 + i as f64, flag]);
        labels.push(1);
    }
    let fm = FeatureMatrix::from_rows(&rows, vec!["idx".into(), "flag".into()]).unwrap();
    let data = LabeledDataset::new(fm, labels).unwrap();
    assert_eq!(drop_constant_columns(&data).unwrap().features.n_cols(), 2);

    let mut found = false;
    for seed in 0..50u64 {
        let resampled = resample_to_ratio(&data, 0.99, seed).unwrap();
        let first = resampled.features.get(0, 1);
        if resampled.features.column(1).all(|v| v == first) {
            found = true;
            let pruned = drop_constant_columns(&resampled).unwrap();
            assert_eq!(pruned.features.column_names(), &["idx".to_string()]);
            break;
        }
    }
    assert!(found, "no seed produced a constant-in-resample column");
}

#[test]
fn separation_sanity_iforest_and_knn_oracle() {
    // The generator emits benign rows first, then the diffuse attack
    // component, then the deliberately hard mismatch/burst components.
    // Detectability of the diffuse component is what `separation` controls,
    // so the sanity check scores benign rows against diffuse attacks only.
    let n_benign = 2_000;
    let n_attack = 100;
    let n_diffuse = 20; // n_attack minus the burst (50%) and mismatch (30%) shares
    let data = generate_synthetic(n_benign, n_attack, 8, 6.0, 7).unwrap();
    let subset: Vec<usize> = (0..n_benign + n_diffuse).collect();
    let labels = &data.labels[..n_benign + n_diffuse];
    assert!(labels[n_benign..].iter().all(|&l| l == 1));

    let mut config = DetectorConfig::new(DetectorKind::Iforest);
    config.seed = 3;
    let model = fit(&config, &data.features).unwrap();
    let scores = score(&model, &data.features).unwrap();
    let subset_scores: Vec<f64> = subset.iter().map(|&i| scores[i]).collect();
    let auc = roc_auc(labels, &subset_scores).unwrap();
    assert!(auc > 0.75, "iforest auc on diffuse attacks {auc:.4}");

    // Independent sanity oracle: brute-force 5-NN distances separate too.
    let rows: Vec<Vec<f64>> = data.features.rows().map(|r| r.to_vec()).collect();
    let oracle_scores: Vec<f64> = subset
        .iter()
        .map(|&i| knn_oracle(&rows, &rows[i], 5))
        .collect();
    let oracle_auc = roc_auc(labels, &oracle_scores).unwrap();
    assert!(oracle_auc > 0.85, "knn oracle auc on diffuse attacks {oracle_auc:.4}");
}

#[test]
fn shuffled_labels_give_chance_auc() {
    // The attack cluster is wider than the benign one even at zero
    // separation, so real labels stay detectable; breaking the label/score
    // association instead must drive the AUC to chance.
    use rand::seq::SliceRandom;
    use rand_chacha::rand_core::SeedableRng;

    let data = generate_synthetic(1_000, 1_000, 4, 0.0, 15).unwrap();
    let mut config = DetectorConfig::new(DetectorKind::Hbos);
    config.seed = 1;
    let model = fit(&config, &data.features).unwrap();
    let scores = score(&model, &data.features).unwrap();

    let mut shuffled = data.labels.clone();
    shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
    let auc = roc_auc(&shuffled, &scores).unwrap();
    assert!((auc - 0.5).abs() < 0.06, "shuffled labels should score near chance, got {auc:.3}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn resample_fraction_within_tolerance(
        n_benign in 50usize..400,
        n_attack in 50usize..400,
        ratio in 0.05f64..0.95,
        seed in 0u64..1000,
    ) {
        let rows: Vec<Vec<f64>> = (0..n_benign + n_attack).map(|i| vec![i as f64]).collect();
        let fm = FeatureMatrix::from_rows(&rows, vec!["x".into()]).unwrap();
        let labels: Vec<u8> = (0..n_benign).map(|_| 0).chain((0..n_attack).map(|_| 1)).collect();
        let data = LabeledDataset::new(fm, labels).unwrap();
        match resample_to_ratio(&data, ratio, seed) {
            Ok(out) => {
                let achieved = out.n_attack() as f64 / out.n_rows() as f64;
                prop_assert!((achieved - (1.0 - ratio)).abs() <= 1.0 / out.n_rows() as f64);
            }
            Err(flowsentry::Error::InfeasibleRatio { nearest, .. }) => {
                prop_assert!(nearest > 0.0 && nearest < 1.0);
            }
            Err(e) => prop_assert!(false, "unexpected error: {e}"),
        }
    }

    #[test]
    fn pruning_is_idempotent(rows in proptest::collection::vec(
        proptest::collection::vec(-3i8..=3, 4), 2..30,
    )) {
        let float_rows: Vec<Vec<f64>> = rows.iter()
            .map(|r| r.iter().map(|&v| f64::from(v)).collect())
            .collect();
        let data = LabeledDataset::new(
            matrix_from_rows(&float_rows),
            float_rows.iter().map(|_| 0u8).collect(),
        ).unwrap();
        match drop_constant_columns(&data) {
            Ok(once) => {
                let twice = drop_constant_columns(&once).unwrap();
                prop_assert_eq!(once, twice);
            }
            Err(flowsentry::Error::AllColumnsConstant) => {}
            Err(e) => prop_assert!(false, "unexpected error: {e}"),
        }
    }

    #[test]
    fn auc_complement_under_negation(
        scores in proptest::collection::vec(-10i8..=10, 4..60),
        flip in 1usize..3,
    ) {
        let labels: Vec<u8> = (0..scores.len()).map(|i| u8::from(i % (flip + 1) == 0)).collect();
        let scores: Vec<f64> = scores.iter().map(|&s| f64::from(s) / 2.0).collect();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        if labels.iter().any(|&l| l == 1) && labels.iter().any(|&l| l == 0) {
            let a = roc_auc(&labels, &scores).unwrap();
            let b = roc_auc(&labels, &neg).unwrap();
            prop_assert!((a + b - 1.0).abs() < 1e-12);
        }
    }
}
