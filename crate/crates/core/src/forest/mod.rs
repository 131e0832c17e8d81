//! Random-forest regression built from bagged CART trees.
//!
//! Each tree draws its randomness (bootstrap rows, per-split feature subsets)
//! from its own stream keyed by `(seed, tree index)`, so fitting trees in
//! parallel yields the same forest as fitting them one after another.

mod tree;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedKey;

pub use tree::{best_split, fit_tree, RegressionTree, Split, TreeNode, TIE_TOLERANCE};
pub(crate) use tree::midpoint;

/// Dense row-major matrix of training features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::ShapeMismatch("ragged feature rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Fraction of features tried at each split.
    pub max_features: f64,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: 1.0,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    /// Desk-scale profile: the default forest with 25 trees.
    pub fn desk() -> Self {
        ForestParams {
            n_trees: 25,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be positive");
        }
        if self.min_samples_split < 2 {
            return bad("min_samples_split must be at least 2");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1");
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return bad("max_features must lie in (0, 1]");
        }
        Ok(())
    }

    /// Features tried per split for `p` inputs: `ceil(max_features · p)`, at least 1.
    pub fn features_per_split(&self, p: usize) -> usize {
        ((self.max_features * p as f64).ceil() as usize).clamp(1, p.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
    pub params: ForestParams,
}

impl Forest {
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    /// Mean of the per-tree predictions.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                got: x.len(),
            });
        }
        Ok(tree::bounded_mean(self.trees.iter().map(|t| t.root.predict(x))))
    }
}

/// Random stream for tree `index` of a forest seeded with `seed`.
pub fn tree_rng(seed: u64, index: usize) -> rand_chacha::ChaCha8Rng {
    SeedKey::new(seed).tag("tree").index(index as u64).rng()
}

pub fn fit_forest(features: &FeatureMatrix, targets: &[f64], params: &ForestParams) -> Result<Forest> {
    params.validate()?;
    let m = features.rows();
    if m == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if targets.len() != m {
        return Err(Error::LengthMismatch(m, targets.len()));
    }
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = tree_rng(params.seed, t);
            let rows: Vec<usize> = if params.bootstrap {
                (0..m).map(|_| rng.random_range(0..m)).collect()
            } else {
                (0..m).collect()
            };
            tree::fit_tree_on_rows(features, targets, rows, params, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        trees,
        params: *params,
    })
}
