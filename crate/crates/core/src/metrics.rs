//! Imputation error and classification scores: MAE, F1, ROC AUC, MCC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Scores for one evaluation. `mae` is present only when imputation was scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub mae: Option<f64>,
    pub f1: f64,
    pub auc: f64,
    pub mcc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaeScope {
    /// Only the artificially hidden slots.
    #[default]
    MaskedOnly,
    /// Every slot; observed slots contribute zero error.
    WholeSeries,
}

/// Mean absolute error over the slots flagged in `sim_mask`.
pub fn mae(ground_truth: &TimeSeries, imputed: &TimeSeries, sim_mask: &[bool]) -> Result<f64> {
    let (sum, n) = abs_error_sum(ground_truth, imputed, sim_mask)?;
    if n == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sum / n as f64)
}

pub fn mae_with_scope(
    ground_truth: &TimeSeries,
    imputed: &TimeSeries,
    sim_mask: &[bool],
    scope: MaeScope,
) -> Result<f64> {
    match scope {
        MaeScope::MaskedOnly => mae(ground_truth, imputed, sim_mask),
        MaeScope::WholeSeries => {
            let (sum, _) = abs_error_sum(ground_truth, imputed, sim_mask)?;
            Ok(sum / sim_mask.len() as f64)
        }
    }
}

/// Sum of absolute errors over masked slots and the number of such slots.
pub fn abs_error_sum(ground_truth: &TimeSeries, imputed: &TimeSeries, sim_mask: &[bool]) -> Result<(f64, usize)> {
    let truth = ground_truth.values();
    let guess = imputed.values();
    if truth.len() != guess.len()
        || truth.len() != sim_mask.len()
        || ground_truth.channels() != imputed.channels()
    {
        return Err(Error::ShapeMismatch(format!(
            "truth has {} slots, imputed {}, mask {}",
            truth.len(),
            guess.len(),
            sim_mask.len()
        )));
    }
    let mut sum = 0.0;
    let mut n = 0;
    for i in (0..sim_mask.len()).filter(|&i| sim_mask[i]) {
        sum += (guess[i] - truth[i]).abs();
        n += 1;
    }
    Ok((sum, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

pub fn confusion_counts(y_true: &[usize], y_pred: &[usize], positive_class: usize) -> Result<Confusion> {
    check_lengths(y_true, y_pred)?;
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
    };
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t == positive_class, p == positive_class) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn check_lengths(a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// `2TP / (2TP + FP + FN)`, zero when the denominator is zero.
pub fn f1_from_counts(c: Confusion) -> f64 {
    let denom = 2 * c.tp + c.fp + c.fn_;
    if denom == 0 {
        0.0
    } else {
        (2 * c.tp) as f64 / denom as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Averaging {
    /// F1 of the positive class (label 1).
    BinaryPositive,
    /// Unweighted mean of one-vs-rest F1 over every label seen.
    Macro,
}

pub const POSITIVE_CLASS: usize = 1;

pub fn f1(y_true: &[usize], y_pred: &[usize], averaging: Averaging) -> Result<f64> {
    match averaging {
        Averaging::BinaryPositive => Ok(f1_from_counts(confusion_counts(y_true, y_pred, POSITIVE_CLASS)?)),
        Averaging::Macro => {
            check_lengths(y_true, y_pred)?;
            let classes = label_set(y_true.iter().chain(y_pred));
            let total: f64 = classes
                .iter()
                .map(|&k| confusion_counts(y_true, y_pred, k).map(f1_from_counts))
                .sum::<Result<f64>>()?;
            Ok(total / classes.len() as f64)
        }
    }
}

fn label_set<'a>(labels: impl Iterator<Item = &'a usize>) -> Vec<usize> {
    let mut set: Vec<usize> = labels.copied().collect();
    set.sort_unstable();
    set.dedup();
    set
}

/// Average 1-based ranks, ties sharing the mean of their positions.
fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean of (i+1)..=j
        let rank = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        i = j;
    }
    ranks
}

/// Binary ROC AUC via the Mann–Whitney statistic with average ranks for ties.
pub fn roc_auc(y_true: &[bool], scores: &[f64]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch(y_true.len(), scores.len()));
    }
    let n_pos = y_true.iter().filter(|y| **y).count();
    let n_neg = y_true.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(y_true).filter(|(_, y)| **y).map(|(r, _)| r).sum();
    let (p, n) = (n_pos as f64, n_neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Macro one-vs-rest AUC. `scores[i][k]` is the score of sample `i` for
/// `classes[k]`; classes absent from `y_true` are skipped.
pub fn roc_auc_ovr(y_true: &[usize], scores: &[Vec<f64>], classes: &[usize]) -> Result<f64> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch(y_true.len(), scores.len()));
    }
    let mut total = 0.0;
    let mut counted = 0;
    for (k, &class) in classes.iter().enumerate() {
        let labels: Vec<bool> = y_true.iter().map(|&y| y == class).collect();
        if labels.iter().all(|l| *l) || !labels.iter().any(|l| *l) {
            continue;
        }
        let column: Vec<f64> = scores.iter().map(|row| row[k]).collect();
        total += roc_auc(&labels, &column)?;
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::SingleClass);
    }
    Ok(total / counted as f64)
}

/// Matthews correlation, generalised to K classes from the full confusion
/// matrix. Zero when the denominator vanishes.
pub fn mcc(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let classes = label_set(y_true.iter().chain(y_pred));
    let index = |label: usize| classes.binary_search(&label).unwrap();
    let k = classes.len();
    let mut true_counts = vec![0f64; k];
    let mut pred_counts = vec![0f64; k];
    let mut correct = 0f64;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        true_counts[index(t)] += 1.0;
        pred_counts[index(p)] += 1.0;
        if t == p {
            correct += 1.0;
        }
    }
    let s = y_true.len() as f64;
    let cov_tp = correct * s - true_counts.iter().zip(&pred_counts).map(|(t, p)| t * p).sum::<f64>();
    let cov_pp = s * s - pred_counts.iter().map(|p| p * p).sum::<f64>();
    let cov_tt = s * s - true_counts.iter().map(|t| t * t).sum::<f64>();
    let denom = (cov_pp * cov_tt).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((cov_tp / denom).clamp(-1.0, 1.0))
}

/// Binary MCC from counts; any zero marginal gives 0.
pub fn mcc_from_counts(c: Confusion) -> f64 {
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let denom = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        (tp * tn - fp * fn_) / denom
    }
}
