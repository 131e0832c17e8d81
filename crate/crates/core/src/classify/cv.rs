//! Seeded stratified cross-validation.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{distinct, fit_classifier, ClassifierKind, ClassifierParams, FeatureVector, TrainedClassifier};
use crate::error::{Error, Result};
use crate::metrics::{f1, mcc, roc_auc, roc_auc_ovr, Averaging, MetricBundle, POSITIVE_CLASS};
use crate::seed::SeedKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitProtocol {
    /// Metrics are computed per held-out fold and averaged.
    StratifiedKFold { folds: usize },
    /// One series (subject) held out at a time; predictions are pooled and
    /// scored once.
    LeaveOneOut,
}

impl Default for SplitProtocol {
    fn default() -> Self {
        SplitProtocol::StratifiedKFold { folds: 5 }
    }
}

/// Test-fold index of every sample. Each class is shuffled with its own
/// stream and dealt round-robin, continuing where the previous class stopped.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter("at least 2 folds are needed".into()));
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for class in distinct(labels) {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut SeedKey::new(seed).tag("folds").index(class as u64).rng());
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

/// Trains on every sample outside `fold`; returns the model and the held-out
/// indices.
pub fn fit_fold(
    features: &[FeatureVector],
    assignment: &[usize],
    fold: usize,
    kind: ClassifierKind,
    params: &ClassifierParams,
) -> Result<(TrainedClassifier, Vec<usize>)> {
    let (test, train): (Vec<usize>, Vec<usize>) = (0..features.len()).partition(|&i| assignment[i] == fold);
    let x: Vec<Vec<f64>> = train.iter().map(|&i| features[i].values.clone()).collect();
    let y: Vec<usize> = train.iter().map(|&i| features[i].label).collect();
    Ok((fit_classifier(kind, params, &x, &y)?, test))
}

struct Scored {
    y_true: Vec<usize>,
    y_pred: Vec<usize>,
    /// Rows follow the dataset's class order.
    scores: Vec<Vec<f64>>,
}

fn score_fold(
    features: &[FeatureVector],
    assignment: &[usize],
    fold: usize,
    kind: ClassifierKind,
    params: &ClassifierParams,
    classes: &[usize],
) -> Result<Scored> {
    let (model, test) = fit_fold(features, assignment, fold, kind, params)?;
    let mut out = Scored {
        y_true: Vec::with_capacity(test.len()),
        y_pred: Vec::with_capacity(test.len()),
        scores: Vec::with_capacity(test.len()),
    };
    for i in test {
        let x = &features[i].values;
        let local = model.scores(x);
        out.y_true.push(features[i].label);
        out.y_pred.push(model.predict(x));
        out.scores.push(
            classes
                .iter()
                .map(|c| model.classes.binary_search(c).map_or(0.0, |k| local[k]))
                .collect(),
        );
    }
    Ok(out)
}

fn metrics_of(s: &Scored, classes: &[usize]) -> Result<MetricBundle> {
    if classes == [0, 1] {
        let positive: Vec<bool> = s.y_true.iter().map(|&y| y == POSITIVE_CLASS).collect();
        let p1: Vec<f64> = s.scores.iter().map(|r| r[1]).collect();
        Ok(MetricBundle {
            mae: None,
            f1: f1(&s.y_true, &s.y_pred, Averaging::BinaryPositive)?,
            auc: roc_auc(&positive, &p1)?,
            mcc: mcc(&s.y_true, &s.y_pred)?,
        })
    } else {
        Ok(MetricBundle {
            mae: None,
            f1: f1(&s.y_true, &s.y_pred, Averaging::Macro)?,
            auc: roc_auc_ovr(&s.y_true, &s.scores, classes)?,
            mcc: mcc(&s.y_true, &s.y_pred)?,
        })
    }
}

/// Binary 0/1 labels are scored with positive-class F1 and AUC on `P(1)`;
/// anything else with macro F1 and one-vs-rest AUC. MCC is the multiclass
/// form in both cases.
pub fn cross_validate(
    features: &[FeatureVector],
    kind: ClassifierKind,
    params: &ClassifierParams,
    protocol: SplitProtocol,
    seed: u64,
) -> Result<MetricBundle> {
    let labels: Vec<usize> = features.iter().map(|f| f.label).collect();
    let classes = distinct(&labels);
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    match protocol {
        SplitProtocol::StratifiedKFold { folds } => {
            let assignment = stratified_folds(&labels, folds, seed)?;
            let per_fold = (0..folds)
                .into_par_iter()
                .map(|fold| metrics_of(&score_fold(features, &assignment, fold, kind, params, &classes)?, &classes))
                .collect::<Result<Vec<_>>>()?;
            let k = per_fold.len() as f64;
            Ok(MetricBundle {
                mae: None,
                f1: per_fold.iter().map(|m| m.f1).sum::<f64>() / k,
                auc: per_fold.iter().map(|m| m.auc).sum::<f64>() / k,
                mcc: per_fold.iter().map(|m| m.mcc).sum::<f64>() / k,
            })
        }
        SplitProtocol::LeaveOneOut => {
            for &class in &classes {
                let count = labels.iter().filter(|&&l| l == class).count();
                if count < 2 {
                    return Err(Error::ClassTooSmall { class, count, folds: 2 });
                }
            }
            let assignment: Vec<usize> = (0..features.len()).collect();
            let parts = (0..features.len())
                .into_par_iter()
                .map(|fold| score_fold(features, &assignment, fold, kind, params, &classes))
                .collect::<Result<Vec<_>>>()?;
            let mut pooled = Scored {
                y_true: Vec::new(),
                y_pred: Vec::new(),
                scores: Vec::new(),
            };
            for p in parts {
                pooled.y_true.extend(p.y_true);
                pooled.y_pred.extend(p.y_pred);
                pooled.scores.extend(p.scores);
            }
            metrics_of(&pooled, &classes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn vectors(x: Vec<Vec<f64>>, y: Vec<usize>) -> Vec<FeatureVector> {
        x.into_iter()
            .zip(y)
            .enumerate()
            .map(|(i, (values, label))| FeatureVector {
                series_id: format!("s{i}"),
                label,
                values,
            })
            .collect()
    }

    fn gaussian_classes(n: usize, shift: f64, seed: u64) -> Vec<FeatureVector> {
        let mut rng = SeedKey::new(seed).tag("test-data").rng();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = y
            .iter()
            .map(|&l| (0..3).map(|_| normal.sample(&mut rng) + shift * l as f64).collect())
            .collect();
        vectors(x, y)
    }

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<usize> = (0..23).map(|i| usize::from(i % 3 == 0)).collect();
        let a = stratified_folds(&labels, 5, 7).unwrap();
        assert_eq!(a, stratified_folds(&labels, 5, 7).unwrap());
        assert_ne!(a, stratified_folds(&labels, 5, 8).unwrap());
        for fold in 0..5 {
            let members: Vec<usize> = (0..23).filter(|&i| a[i] == fold).collect();
            assert!((4..=5).contains(&members.len()));
            let positives = members.iter().filter(|&&i| labels[i] == 1).count();
            assert!((1..=2).contains(&positives));
        }
        assert!(a.iter().all(|&f| f < 5));
    }

    #[test]
    fn small_class_is_rejected() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1];
        assert!(matches!(
            stratified_folds(&labels, 5, 0),
            Err(Error::ClassTooSmall { class: 1, count: 3, folds: 5 })
        ));
    }

    #[test]
    fn separable_data_scores_perfectly() {
        let data = gaussian_classes(60, 50.0, 1);
        let m = cross_validate(&data, ClassifierKind::Logreg, &ClassifierParams::default(), SplitProtocol::default(), 0)
            .unwrap();
        assert!((m.f1 - 1.0).abs() < 1e-9 && (m.auc - 1.0).abs() < 1e-9 && (m.mcc - 1.0).abs() < 1e-9);
        assert_eq!(m.mae, None);
    }

    /// Permutation null: with labels unrelated to the features, fold MCC is
    /// centred on zero with spread about 1/sqrt(n) per fold.
    #[test]
    fn shuffled_labels_give_chance_mcc() {
        for seed in 0..5 {
            let mut data = gaussian_classes(200, 4.0, 100 + seed);
            let mut labels: Vec<usize> = data.iter().map(|f| f.label).collect();
            labels.shuffle(&mut SeedKey::new(seed).tag("permute").rng());
            for (f, l) in data.iter_mut().zip(labels) {
                f.label = l;
            }
            let m = cross_validate(&data, ClassifierKind::Logreg, &ClassifierParams::default(), SplitProtocol::default(), seed)
                .unwrap();
            assert!(m.mcc.abs() < 0.25, "seed {seed}: {}", m.mcc);
        }
    }

    #[test]
    fn held_out_features_do_not_leak_into_training() {
        let data = gaussian_classes(40, 1.0, 3);
        let labels: Vec<usize> = data.iter().map(|f| f.label).collect();
        let assignment = stratified_folds(&labels, 5, 3).unwrap();
        let params = ClassifierParams::default();
        for kind in [ClassifierKind::Logreg, ClassifierKind::Adaboost, ClassifierKind::Knn] {
            let (clean, test) = fit_fold(&data, &assignment, 2, kind, &params).unwrap();
            let mut mutated = data.clone();
            for &i in &test {
                mutated[i].values.iter_mut().for_each(|v| *v += 1000.0);
            }
            let (dirty, _) = fit_fold(&mutated, &assignment, 2, kind, &params).unwrap();
            assert_eq!(clean, dirty, "{kind}");
            for &i in &test {
                assert_eq!(clean.scores(&data[i].values), dirty.scores(&data[i].values));
            }
        }
    }

    #[test]
    fn multiclass_knn_and_leave_one_out() {
        let mut rng = SeedKey::new(5).tag("mc").rng();
        let y: Vec<usize> = (0..45).map(|i| i % 3).collect();
        let x: Vec<Vec<f64>> = y
            .iter()
            .map(|&l| vec![l as f64 * 10.0 + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let data = vectors(x, y);
        let params = ClassifierParams::default();
        let kfold = cross_validate(&data, ClassifierKind::Knn, &params, SplitProtocol::default(), 1).unwrap();
        assert_eq!((kfold.f1, kfold.auc, kfold.mcc), (1.0, 1.0, 1.0));
        let loo = cross_validate(&data, ClassifierKind::Knn, &params, SplitProtocol::LeaveOneOut, 1).unwrap();
        assert_eq!((loo.f1, loo.auc, loo.mcc), (1.0, 1.0, 1.0));
        assert!(matches!(
            cross_validate(&data, ClassifierKind::Logreg, &params, SplitProtocol::default(), 1),
            Err(Error::MulticlassUnsupported)
        ));
    }

    #[test]
    fn adaboost_and_knn_learn_a_shifted_class() {
        let data = gaussian_classes(100, 4.0, 9);
        for kind in [ClassifierKind::Adaboost, ClassifierKind::Knn] {
            let m = cross_validate(&data, kind, &ClassifierParams::default(), SplitProtocol::default(), 2).unwrap();
            assert!(m.f1 > 0.9 && m.auc > 0.9 && m.mcc > 0.8, "{kind}: {m:?}");
        }
    }
}
