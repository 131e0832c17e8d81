//! Imputers behind a common entry point, [`impute_series`].
//!
//! * `mice_rf`: chained-equation random forests. Univariate series are first
//!   folded by `t_period` (see [`crate::series`]); multichannel series are
//!   imputed on their epoch × channel grid as is.
//! * `mean`, `locf`, `linear`: per-channel classical fills.
//! * `knn`: nearest-row donor imputation on the same matrix MICE-RF would use.

mod baseline;
mod knn;
mod mice;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::series::{reshape_to_matrix, reshape_to_series, PadPolicy, ReshapeSpec, SeriesMatrix, TimeSeries};

pub use baseline::{fill_linear, fill_locf, fill_mean, impute_linear, impute_locf, impute_mean};
pub use knn::{impute_knn, knn_fill};
pub use mice::{initial_fill, mice_impute, mice_impute_traced};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MiceRf,
    Mean,
    Locf,
    Linear,
    Knn,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::MiceRf, Method::Mean, Method::Locf, Method::Linear, Method::Knn];

    pub fn name(self) -> &'static str {
        match self {
            Method::MiceRf => "mice_rf",
            Method::Mean => "mean",
            Method::Locf => "locf",
            Method::Linear => "linear",
            Method::Knn => "knn",
        }
    }

    pub fn valid_names() -> String {
        Method::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (valid methods: {})", Method::valid_names()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImputationConfig {
    pub method: Method,
    /// Epochs per row for univariate MICE-RF and KNN.
    pub t_period: Option<usize>,
    pub pad_policy: PadPolicy,
    pub max_iter: usize,
    pub forest: ForestParams,
    pub knn_k: usize,
    /// Independent MICE chains averaged cell-wise.
    pub n_chains: usize,
    pub seed: u64,
}

impl Default for ImputationConfig {
    fn default() -> Self {
        ImputationConfig {
            method: Method::MiceRf,
            t_period: None,
            pad_policy: PadPolicy::Strict,
            max_iter: 5,
            forest: ForestParams::default(),
            knn_k: 5,
            n_chains: 1,
            seed: 0,
        }
    }
}

impl ImputationConfig {
    pub fn new(method: Method) -> Self {
        ImputationConfig {
            method,
            ..Self::default()
        }
    }

    pub fn with_period(mut self, t_period: usize) -> Self {
        self.t_period = Some(t_period);
        self
    }

    /// Checks that the configuration fits a series of the given channel count.
    pub fn check_for(&self, channels: usize) -> Result<()> {
        if self.max_iter == 0 || self.knn_k == 0 || self.n_chains == 0 {
            return Err(Error::InvalidParameter(
                "max_iter, knn_k and n_chains must be positive".into(),
            ));
        }
        if self.t_period == Some(0) {
            return Err(Error::InvalidParameter("t_period must be positive".into()));
        }
        let uses_period = matches!(self.method, Method::MiceRf | Method::Knn);
        match (channels, self.t_period) {
            (1, None) if uses_period => Err(Error::MissingPeriod),
            (c, Some(_)) if c > 1 && uses_period => Err(Error::PeriodOnMultivariate),
            _ => Ok(()),
        }
    }
}

/// Mean absolute change written to one column in one MICE round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateTrace {
    pub chain: usize,
    pub iteration: usize,
    pub column: usize,
    pub mean_abs_update: f64,
}

#[derive(Debug, Clone)]
pub struct ImputationResult {
    /// Complete series; observed slots are bit-identical to the input.
    pub imputed: TimeSeries,
    pub method_trace: Vec<UpdateTrace>,
}

/// Completes `series` with the configured method.
pub fn impute_series(series: &TimeSeries, config: &ImputationConfig) -> Result<ImputationResult> {
    config.check_for(series.channels())?;
    if series.is_complete() {
        return Ok(ImputationResult {
            imputed: series.clone(),
            method_trace: Vec::new(),
        });
    }
    match config.method {
        Method::Mean => impute_mean(series),
        Method::Locf => impute_locf(series),
        Method::Linear => impute_linear(series),
        Method::Knn => impute_knn(series, config),
        Method::MiceRf => impute_mice_rf(series, config),
    }
}

fn impute_mice_rf(series: &TimeSeries, config: &ImputationConfig) -> Result<ImputationResult> {
    if series.is_univariate() {
        let t_period = config.t_period.ok_or(Error::MissingPeriod)?;
        let (values, observed) = series.channel(0);
        let spec = ReshapeSpec {
            t_period,
            pad_policy: config.pad_policy,
        };
        let matrix = reshape_to_matrix(&values, &observed, spec)?;
        let (filled, trace) = mice_impute_traced(&matrix, config)?;
        let (mut flat, _) = reshape_to_series(&filled);
        fill_padded_row_by_interpolation(&matrix, &mut flat)?;
        Ok(ImputationResult {
            imputed: complete_from(series, flat)?,
            method_trace: trace,
        })
    } else {
        let grid = grid_of(series)?;
        let (filled, trace) = mice_impute_traced(&grid, config)?;
        Ok(ImputationResult {
            imputed: complete_from(series, filled.cells().to_vec())?,
            method_trace: trace,
        })
    }
}

/// Epoch × channel grid of a series.
pub(crate) fn grid_of(series: &TimeSeries) -> Result<SeriesMatrix> {
    SeriesMatrix::from_grid(
        series.len(),
        series.channels(),
        series.values().to_vec(),
        series.observed(),
    )
}

/// Missing epochs that fell in a padded row never reach the forests; they are
/// filled by linear interpolation over the otherwise completed series.
fn fill_padded_row_by_interpolation(matrix: &SeriesMatrix, flat: &mut [f64]) -> Result<()> {
    if matrix.padding_count() == 0 {
        return Ok(());
    }
    let last = matrix.rows() - 1;
    let start = last * matrix.cols();
    let pending: Vec<usize> = (start..matrix.original_len())
        .filter(|&t| matrix.states()[t] == crate::series::CellState::Missing)
        .collect();
    if pending.is_empty() {
        return Ok(());
    }
    let mut known = vec![true; flat.len()];
    for &t in &pending {
        known[t] = false;
    }
    let filled = fill_linear(flat, &known)?;
    for t in pending {
        flat[t] = filled[t];
    }
    Ok(())
}

/// Builds the completed series, copying observed slots from the input so they
/// stay bit-identical whatever the imputer wrote there.
pub(crate) fn complete_from(series: &TimeSeries, mut values: Vec<f64>) -> Result<TimeSeries> {
    for (i, v) in values.iter_mut().enumerate() {
        if series.observed()[i] {
            *v = series.values()[i];
        }
    }
    let observed = vec![true; values.len()];
    series.with_slots(values, observed)
}
