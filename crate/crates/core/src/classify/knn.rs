//! k-nearest-neighbour vote on standardised features.

use super::{distinct, Model, Standardizer, TrainedClassifier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    /// Standardised training rows.
    pub train: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: Vec<usize>,
    pub k: usize,
}

impl KnnModel {
    /// Winning label and per-class vote fractions (in `classes` order).
    pub fn vote(&self, z: &[f64]) -> (usize, Vec<f64>) {
        knn_classify(&self.train, &self.labels, &self.classes, self.k, z)
    }
}

/// Votes among the `k` rows of `train` nearest to `query` (Euclidean). Equal
/// distances favour the lower training index; equal vote counts favour the
/// smaller class id. `classes` must be sorted and cover `labels`.
pub fn knn_classify(
    train: &[Vec<f64>],
    labels: &[usize],
    classes: &[usize],
    k: usize,
    query: &[f64],
) -> (usize, Vec<f64>) {
    let mut order: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| (row.iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum::<f64>(), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut counts = vec![0usize; classes.len()];
    for &(_, i) in order.iter().take(k) {
        if let Ok(pos) = classes.binary_search(&labels[i]) {
            counts[pos] += 1;
        }
    }
    let mut winner = 0;
    for (pos, &c) in counts.iter().enumerate() {
        if c > counts[winner] {
            winner = pos;
        }
    }
    let used = k.min(train.len()) as f64;
    (classes[winner], counts.iter().map(|&c| c as f64 / used).collect())
}

pub fn fit_knn(x: &[Vec<f64>], y: &[usize], k: usize) -> Result<TrainedClassifier> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if k > x.len() {
        return Err(Error::KTooLarge { k, n: x.len() });
    }
    let standardizer = Standardizer::fit(x)?;
    let classes = distinct(y);
    let train = x.iter().map(|r| standardizer.transform(r)).collect();
    Ok(TrainedClassifier {
        standardizer,
        model: Model::Knn(KnnModel {
            train,
            labels: y.to_vec(),
            classes: classes.clone(),
            k,
        }),
        classes,
    })
}
