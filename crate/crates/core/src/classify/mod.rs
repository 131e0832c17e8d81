//! Downstream classification of (imputed) series.
//!
//! Series are summarised into per-channel feature vectors and scored with one
//! of three classifiers: L2 logistic regression, discrete AdaBoost over
//! stumps, or k-nearest neighbours. Features are standardised with statistics
//! from the training rows only.

mod adaboost;
mod cv;
mod knn;
mod logreg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

pub use adaboost::{fit_adaboost, AdaBoostModel, AdaBoostParams, BoostRound, Stump};
pub use cv::{cross_validate, fit_fold, stratified_folds, SplitProtocol};
pub use knn::{fit_knn, knn_classify, KnnModel};
pub use logreg::{fit_logreg, sigmoid, LogRegParams, LogisticModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Mean,
    /// Population standard deviation.
    Std,
    /// Fraction of epochs exactly equal to zero.
    ZeroFraction,
    Median,
    Min,
    Max,
}

pub const DEFAULT_FEATURES: [FeatureKind; 3] = [FeatureKind::Mean, FeatureKind::Std, FeatureKind::ZeroFraction];

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub series_id: String,
    pub label: usize,
    pub values: Vec<f64>,
}

/// Default summary: per channel `[mean, std, zero fraction]`, channel 0 first.
pub fn extract_features(series: &TimeSeries) -> FeatureVector {
    extract_features_with(series, &DEFAULT_FEATURES)
}

pub fn extract_features_with(series: &TimeSeries, kinds: &[FeatureKind]) -> FeatureVector {
    let mut values = Vec::with_capacity(kinds.len() * series.channels());
    for c in 0..series.channels() {
        let (channel, _) = series.channel(c);
        let n = channel.len() as f64;
        let mean = channel.iter().sum::<f64>() / n;
        for kind in kinds {
            values.push(match kind {
                FeatureKind::Mean => mean,
                FeatureKind::Std => (channel.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt(),
                FeatureKind::ZeroFraction => channel.iter().filter(|v| **v == 0.0).count() as f64 / n,
                FeatureKind::Median => {
                    let mut sorted = channel.clone();
                    sorted.sort_by(f64::total_cmp);
                    let mid = sorted.len() / 2;
                    if sorted.len() % 2 == 0 {
                        0.5 * (sorted[mid - 1] + sorted[mid])
                    } else {
                        sorted[mid]
                    }
                }
                FeatureKind::Min => channel.iter().copied().fold(f64::INFINITY, f64::min),
                FeatureKind::Max => channel.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            });
        }
    }
    FeatureVector {
        series_id: series.id.clone(),
        label: series.label,
        values,
    }
}

/// Per-feature centring and scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Constant features get scale 1.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().ok_or(Error::EmptyTrainingSet)?.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::ShapeMismatch("ragged feature rows".into()));
        }
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..p)
            .map(|j| {
                let sd = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Logreg,
    Adaboost,
    Knn,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Adaboost => "adaboost",
            ClassifierKind::Knn => "knn",
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "logreg" => Ok(ClassifierKind::Logreg),
            "adaboost" => Ok(ClassifierKind::Adaboost),
            "knn" => Ok(ClassifierKind::Knn),
            other => Err(format!("unknown classifier '{other}' (valid: logreg, adaboost, knn)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifierParams {
    pub logreg: LogRegParams,
    pub adaboost: AdaBoostParams,
    pub knn_k: usize,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            logreg: LogRegParams::default(),
            adaboost: AdaBoostParams::default(),
            knn_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Logistic(LogisticModel),
    AdaBoost(AdaBoostModel),
    Knn(KnnModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedClassifier {
    pub standardizer: Standardizer,
    pub model: Model,
    /// Sorted training classes; score vectors follow this order.
    pub classes: Vec<usize>,
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self.model {
            Model::Logistic(_) => ClassifierKind::Logreg,
            Model::AdaBoost(_) => ClassifierKind::Adaboost,
            Model::Knn(_) => ClassifierKind::Knn,
        }
    }

    /// Per-class scores for a raw (unstandardised) feature vector.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let z = self.standardizer.transform(x);
        match &self.model {
            Model::Logistic(m) => {
                let p = m.probability(&z);
                vec![1.0 - p, p]
            }
            Model::AdaBoost(m) => {
                let p = m.probability(&z);
                vec![1.0 - p, p]
            }
            Model::Knn(m) => m.vote(&z).1,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let z = self.standardizer.transform(x);
        match &self.model {
            Model::Logistic(m) => usize::from(m.probability(&z) > 0.5),
            Model::AdaBoost(m) => m.predict(&z),
            Model::Knn(m) => m.vote(&z).0,
        }
    }
}

/// Sorted distinct labels; binary models need exactly `{0, 1}`.
pub(crate) fn binary_classes(labels: &[usize]) -> Result<Vec<usize>> {
    let classes = distinct(labels);
    match classes.as_slice() {
        [] => Err(Error::EmptyTrainingSet),
        [_] => Err(Error::SingleClass),
        [0, 1] => Ok(classes),
        _ => Err(Error::MulticlassUnsupported),
    }
}

pub(crate) fn distinct(labels: &[usize]) -> Vec<usize> {
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    classes
}

pub fn fit_classifier(
    kind: ClassifierKind,
    params: &ClassifierParams,
    x: &[Vec<f64>],
    y: &[usize],
) -> Result<TrainedClassifier> {
    match kind {
        ClassifierKind::Logreg => fit_logreg(x, y, &params.logreg),
        ClassifierKind::Adaboost => fit_adaboost(x, y, &params.adaboost),
        ClassifierKind::Knn => fit_knn(x, y, params.knn_k),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_features() {
        let s = TimeSeries::univariate("c", vec![5.0; 10], 0).unwrap();
        assert_eq!(extract_features(&s).values, vec![5.0, 0.0, 0.0]);
        let s = TimeSeries::univariate("z", vec![0.0, 0.0, 2.0, 2.0], 1).unwrap();
        let f = extract_features(&s);
        assert_eq!(f.values, vec![1.0, 1.0, 0.5]);
        assert_eq!((f.series_id.as_str(), f.label), ("z", 1));
    }

    #[test]
    fn channels_concatenate_in_order() {
        let rows: Vec<Vec<Option<f64>>> = (0..4).map(|t| vec![Some(t as f64), Some(10.0)]).collect();
        let s = TimeSeries::from_rows("m", &rows, 0).unwrap();
        let f = extract_features(&s);
        assert_eq!(f.values.len(), 6);
        assert_eq!(f.values[0], 1.5);
        assert_eq!(&f.values[3..], &[10.0, 0.0, 0.0]);
    }

    #[test]
    fn richer_feature_lists() {
        let s = TimeSeries::univariate("r", vec![3.0, 1.0, 2.0, 10.0], 0).unwrap();
        let f = extract_features_with(&s, &[FeatureKind::Median, FeatureKind::Min, FeatureKind::Max]);
        assert_eq!(f.values, vec![2.5, 1.0, 10.0]);
    }

    #[test]
    fn standardizer_handles_constant_columns() {
        let s = Standardizer::fit(&[vec![1.0, 4.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.mean, vec![2.0, 4.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        assert_eq!(s.transform(&[3.0, 4.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn binary_label_check() {
        assert!(matches!(binary_classes(&[1, 1]), Err(Error::SingleClass)));
        assert!(matches!(binary_classes(&[0, 1, 2]), Err(Error::MulticlassUnsupported)));
        assert_eq!(binary_classes(&[1, 0, 1]).unwrap(), vec![0, 1]);
    }
}
