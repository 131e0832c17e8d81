//! Greedy CART regression trees with variance-reduction splits.

use std::cmp::Ordering;
use std::ops::Range;

use rand::seq::index;
use rand::Rng;

use super::{FeatureMatrix, ForestParams};
use crate::error::{Error, Result};

/// Two candidate reductions closer than `TIE_TOLERANCE × Var(targets)` are a
/// tie; ties keep the earlier candidate (lower feature, then lower threshold).
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub variance_reduction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    /// Rows with `x[feature] < threshold` go left, everything else right.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    /// Routes `x` to a leaf. The caller guarantees dimensionality.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] < *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

/// A fitted tree together with its input width.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    pub root: TreeNode,
    pub n_features: usize,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        Ok(self.root.predict(x))
    }
}

/// Best variance-reduction split over all rows and the candidate features.
pub fn best_split(features: &FeatureMatrix, targets: &[f64], candidate_features: &[usize]) -> Option<Split> {
    let rows: Vec<usize> = (0..features.rows()).collect();
    let mut candidates = candidate_features.to_vec();
    candidates.sort_unstable();
    candidates.dedup();
    search_split(features, targets, &rows, &candidates, 1)
}

/// Split search restricted to `rows`, with both children holding at least
/// `min_leaf` rows. `candidates` must be sorted ascending.
pub(crate) fn search_split(
    features: &FeatureMatrix,
    targets: &[f64],
    rows: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let order = NodeOrder::new(features, targets, rows);
    order.best_split(features, targets, 0..rows.len(), candidates, min_leaf)
}

/// Row indices sorted by target and by each feature (ties by target). A node
/// owns the same index range in every list; splitting a node partitions that
/// range stably in place. Sums run in these orders, so results do not depend
/// on row order.
struct NodeOrder {
    by_target: Vec<usize>,
    by_feature: Vec<Vec<usize>>,
    scratch: Vec<usize>,
}

impl NodeOrder {
    fn new(features: &FeatureMatrix, targets: &[f64], rows: &[usize]) -> Self {
        let mut by_target = rows.to_vec();
        by_target.sort_by(|&a, &b| targets[a].total_cmp(&targets[b]));
        let by_feature = (0..features.cols())
            .map(|f| {
                let mut order = by_target.clone();
                order.sort_by(|&a, &b| features.get(a, f).total_cmp(&features.get(b, f)));
                order
            })
            .collect();
        NodeOrder {
            scratch: Vec::with_capacity(rows.len()),
            by_target,
            by_feature,
        }
    }

    /// Reorders `range` of every list so rows with `goes_left` come first,
    /// keeping relative order; returns the boundary.
    fn partition(&mut self, range: Range<usize>, goes_left: impl Fn(usize) -> bool) -> usize {
        let scratch = &mut self.scratch;
        let mut stable = |list: &mut [usize]| -> usize {
            scratch.clear();
            let mut n_left = 0;
            for i in 0..list.len() {
                if goes_left(list[i]) {
                    list[n_left] = list[i];
                    n_left += 1;
                } else {
                    scratch.push(list[i]);
                }
            }
            list[n_left..].copy_from_slice(scratch);
            n_left
        };
        let n_left = stable(&mut self.by_target[range.clone()]);
        for list in &mut self.by_feature {
            stable(&mut list[range.clone()]);
        }
        range.start + n_left
    }

    fn best_split(
        &self,
        features: &FeatureMatrix,
        targets: &[f64],
        range: Range<usize>,
        candidates: &[usize],
        min_leaf: usize,
    ) -> Option<Split> {
        let m = range.len();
        if m < 2 || candidates.is_empty() {
            return None;
        }
        let by_target = &self.by_target[range.clone()];
        let mean = by_target.iter().map(|&r| targets[r]).sum::<f64>() / m as f64;
        let (sum_all, sq_all) = by_target.iter().fold((0.0, 0.0), |(s, q), &r| {
            let c = targets[r] - mean;
            (s + c, q + c * c)
        });
        let sse_all = sq_all - sum_all * sum_all / m as f64;
        let tolerance = TIE_TOLERANCE * (sse_all / m as f64).max(0.0);

        let mut best: Option<Split> = None;
        for &feature in candidates {
            let rows = &self.by_feature[feature][range.clone()];
            let (mut sum_left, mut sq_left) = (0.0, 0.0);
            for i in 0..m - 1 {
                let c = targets[rows[i]] - mean;
                sum_left += c;
                sq_left += c * c;
                let (lo, hi) = (features.get(rows[i], feature), features.get(rows[i + 1], feature));
                if lo.partial_cmp(&hi) != Some(Ordering::Less) {
                    continue;
                }
                let n_left = i + 1;
                let n_right = m - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let sum_right = sum_all - sum_left;
                let sq_right = sq_all - sq_left;
                let sse_left = sq_left - sum_left * sum_left / n_left as f64;
                let sse_right = sq_right - sum_right * sum_right / n_right as f64;
                let reduction = (sse_all - sse_left - sse_right) / m as f64;
                let improves = match best {
                    None => reduction > tolerance,
                    Some(b) => reduction > b.variance_reduction + tolerance,
                };
                if improves {
                    best = Some(Split {
                        feature,
                        threshold: midpoint(lo, hi),
                        variance_reduction: reduction,
                    });
                }
            }
        }
        best
    }
}

/// Midpoint of `lo < hi` that still separates them under the strict-`<` rule.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * lo + 0.5 * hi;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Fits one tree on every row.
pub fn fit_tree<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    targets: &[f64],
    params: &ForestParams,
    rng: &mut R,
) -> Result<RegressionTree> {
    let rows: Vec<usize> = (0..features.rows()).collect();
    fit_tree_on_rows(features, targets, rows, params, rng)
}

pub(crate) fn fit_tree_on_rows<R: Rng + ?Sized>(
    features: &FeatureMatrix,
    targets: &[f64],
    rows: Vec<usize>,
    params: &ForestParams,
    rng: &mut R,
) -> Result<RegressionTree> {
    if rows.is_empty() || targets.len() != features.rows() {
        return Err(Error::EmptyTrainingSet);
    }
    let p = features.cols();
    let n_try = params.features_per_split(p);
    let mut grower = Grower {
        features,
        targets,
        params,
        n_try,
        rng,
        order: NodeOrder::new(features, targets, &rows),
    };
    let root = grower.grow(0..rows.len(), 0);
    Ok(RegressionTree { root, n_features: p })
}

struct Grower<'a, R: Rng + ?Sized> {
    features: &'a FeatureMatrix,
    targets: &'a [f64],
    params: &'a ForestParams,
    n_try: usize,
    rng: &'a mut R,
    order: NodeOrder,
}

impl<R: Rng + ?Sized> Grower<'_, R> {
    fn grow(&mut self, range: Range<usize>, depth: usize) -> TreeNode {
        let rows = &self.order.by_target[range.clone()];
        let constant = self.targets[rows[0]] == self.targets[rows[rows.len() - 1]];
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if constant || depth_reached || rows.len() < self.params.min_samples_split {
            return self.leaf(rows);
        }
        let p = self.features.cols();
        let candidates: Vec<usize> = if self.n_try >= p {
            (0..p).collect()
        } else {
            let mut picked = index::sample(self.rng, p, self.n_try).into_vec();
            picked.sort_unstable();
            picked
        };
        let Some(split) = self.order.best_split(
            self.features,
            self.targets,
            range.clone(),
            &candidates,
            self.params.min_samples_leaf,
        ) else {
            return self.leaf(&self.order.by_target[range]);
        };
        let features = self.features;
        let mid = self
            .order
            .partition(range.clone(), |r| features.get(r, split.feature) < split.threshold);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(range.start..mid, depth + 1)),
            right: Box::new(self.grow(mid..range.end, depth + 1)),
        }
    }

    fn leaf(&self, rows: &[usize]) -> TreeNode {
        TreeNode::Leaf {
            value: bounded_mean(rows.iter().map(|&r| self.targets[r])),
        }
    }
}

/// Arithmetic mean clamped to the range of its inputs, so rounding can never
/// push it outside `[min, max]`. Summed in sorted order.
pub(crate) fn bounded_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut values: Vec<f64> = values.collect();
    values.sort_by(f64::total_cmp);
    let (mut sum, mut n, mut lo, mut hi) = (0.0, 0usize, f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        sum += v;
        n += 1;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (sum / n as f64).clamp(lo, hi)
}
