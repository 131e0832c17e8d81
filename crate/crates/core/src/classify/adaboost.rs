//! Discrete AdaBoost over decision stumps, labels mapped to ±1.

use serde::{Deserialize, Serialize};

use super::{binary_classes, sigmoid, Model, Standardizer, TrainedClassifier};
use crate::error::{Error, Result};
use crate::forest::FeatureMatrix;

/// Error used in place of a perfect stump's zero when computing its weight.
pub const EPSILON_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaBoostParams {
    pub rounds: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            rounds: 50,
            learning_rate: 1.0,
        }
    }
}

/// Votes `left` when `x[feature] < threshold`, `-left` otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub left: f64,
}

impl Stump {
    pub fn vote(&self, x: &[f64]) -> f64 {
        if x[self.feature] < self.threshold {
            self.left
        } else {
            -self.left
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostRound {
    pub stump: Stump,
    pub alpha: f64,
    pub weighted_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostModel {
    pub rounds: Vec<BoostRound>,
    /// Training share of class 1, used when no round was accepted.
    pub prior: f64,
}

impl AdaBoostModel {
    pub fn margin(&self, z: &[f64]) -> f64 {
        self.rounds.iter().map(|r| r.alpha * r.stump.vote(z)).sum()
    }

    pub fn probability(&self, z: &[f64]) -> f64 {
        if self.rounds.is_empty() {
            self.prior
        } else {
            sigmoid(self.margin(z))
        }
    }

    /// Positive margin means class 1; a zero margin or an empty ensemble with
    /// balanced classes gives class 0.
    pub fn predict(&self, z: &[f64]) -> usize {
        if self.rounds.is_empty() {
            usize::from(self.prior > 0.5)
        } else {
            usize::from(self.margin(z) > 0.0)
        }
    }
}

/// Lowest weighted-error stump; ties go to the lower feature, then the lower
/// threshold, then a left vote of −1.
fn best_stump(x: &FeatureMatrix, y: &[f64], w: &[f64]) -> Option<(Stump, f64)> {
    let total: f64 = w.iter().sum();
    let mut best: Option<(Stump, f64)> = None;
    for f in 0..x.cols() {
        let mut order: Vec<usize> = (0..x.rows()).collect();
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
        // weight of points misclassified by a stump voting −1 on the left:
        // positives on the left plus negatives on the right
        let mut err_neg_left: f64 = order.iter().filter(|&&i| y[i] < 0.0).map(|&i| w[i]).sum();
        for k in 0..order.len() - 1 {
            let i = order[k];
            err_neg_left += if y[i] > 0.0 { w[i] } else { -w[i] };
            let (lo, hi) = (x.get(i, f), x.get(order[k + 1], f));
            if lo == hi {
                continue;
            }
            let threshold = crate::forest::midpoint(lo, hi);
            for (left, err) in [(-1.0, err_neg_left), (1.0, total - err_neg_left)] {
                let err = err.max(0.0) / total;
                if best.is_none_or(|(_, e)| err < e - 1e-12) {
                    best = Some((Stump { feature: f, threshold, left }, err));
                }
            }
        }
    }
    best
}

pub fn fit_adaboost(x: &[Vec<f64>], y: &[usize], params: &AdaBoostParams) -> Result<TrainedClassifier> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::InvalidParameter("learning_rate must be positive".into()));
    }
    let classes = binary_classes(y)?;
    let standardizer = Standardizer::fit(x)?;
    let z: Vec<Vec<f64>> = x.iter().map(|r| standardizer.transform(r)).collect();
    let features = FeatureMatrix::from_rows(&z)?;
    let signs: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let n = y.len() as f64;
    let mut weights = vec![1.0 / n; y.len()];
    let mut rounds = Vec::new();

    for _ in 0..params.rounds {
        let Some((stump, _)) = best_stump(&features, &signs, &weights) else {
            break;
        };
        // recomputed directly so a perfect stump gives exactly zero
        let eps = z
            .iter()
            .zip(&signs)
            .zip(&weights)
            .filter(|((zi, yi), _)| stump.vote(zi) != **yi)
            .map(|(_, wi)| wi)
            .sum::<f64>()
            / weights.iter().sum::<f64>();
        if eps >= 0.5 {
            break;
        }
        let perfect = eps <= 0.0;
        let e = eps.max(EPSILON_FLOOR);
        let alpha = params.learning_rate * 0.5 * ((1.0 - e) / e).ln();
        rounds.push(BoostRound {
            stump,
            alpha,
            weighted_error: eps,
        });
        if perfect {
            break;
        }
        for ((wi, zi), yi) in weights.iter_mut().zip(&z).zip(&signs) {
            *wi *= (-alpha * yi * stump.vote(zi)).exp();
        }
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|wi| *wi /= sum);
    }

    let prior = y.iter().filter(|&&l| l == 1).count() as f64 / n;
    Ok(TrainedClassifier {
        standardizer,
        model: Model::AdaBoost(AdaBoostModel { rounds, prior }),
        classes,
    })
}
