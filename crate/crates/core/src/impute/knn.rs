//! Nearest-row donor imputation.
//!
//! Rows are compared over the coordinates observed in both, with the squared
//! distance scaled up by `total columns / shared columns` so that rows sharing
//! few coordinates are not artificially close. A hole in column `j` takes the
//! mean of column `j` over the `k` nearest rows that observe it.

use std::cmp::Ordering;

use super::{complete_from, grid_of, ImputationConfig, ImputationResult};
use crate::error::{Error, Result};
use crate::series::{reshape_to_matrix, reshape_to_series, CellState, ReshapeSpec, SeriesMatrix, TimeSeries};

/// Scaled squared distance between two rows, `None` without shared columns.
fn scaled_sq_distance(matrix: &SeriesMatrix, a: usize, b: usize) -> Option<f64> {
    let cols = matrix.cols();
    let mut sum = 0.0;
    let mut shared = 0usize;
    for c in 0..cols {
        if matrix.state(a, c) == CellState::Observed && matrix.state(b, c) == CellState::Observed {
            let d = matrix.get(a, c) - matrix.get(b, c);
            sum += d * d;
            shared += 1;
        }
    }
    (shared > 0).then(|| sum * cols as f64 / shared as f64)
}

/// Fills every missing cell of `matrix`; padding is left as is.
pub fn knn_fill(matrix: &SeriesMatrix, k: usize) -> Result<SeriesMatrix> {
    if !matrix.has_observed() {
        return Err(Error::AllMissing);
    }
    let (rows, cols) = (matrix.rows(), matrix.cols());
    let observed_in = |r: usize, c: usize| matrix.state(r, c) == CellState::Observed;
    let column_mean = |c: usize| {
        let vals: Vec<f64> = (0..rows).filter(|&r| observed_in(r, c)).map(|r| matrix.get(r, c)).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let global_mean = {
        let vals: Vec<f64> = matrix
            .cells()
            .iter()
            .zip(matrix.states())
            .filter(|(_, s)| **s == CellState::Observed)
            .map(|(v, _)| *v)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };

    let mut out = matrix.clone();
    for r in 0..rows {
        let holes: Vec<usize> = (0..cols).filter(|&c| matrix.state(r, c) == CellState::Missing).collect();
        if holes.is_empty() {
            continue;
        }
        let distances: Vec<(usize, f64)> = (0..rows)
            .filter(|&o| o != r)
            .filter_map(|o| scaled_sq_distance(matrix, r, o).map(|d| (o, d)))
            .collect();
        for c in holes {
            let mut donors: Vec<(usize, f64)> = distances.iter().copied().filter(|&(o, _)| observed_in(o, c)).collect();
            donors.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal).then(x.0.cmp(&y.0)));
            donors.truncate(k);
            let value = if donors.is_empty() {
                column_mean(c).unwrap_or(global_mean)
            } else {
                donors.iter().map(|&(o, _)| matrix.get(o, c)).sum::<f64>() / donors.len() as f64
            };
            out.set(r, c, value);
        }
    }
    Ok(out)
}

pub fn impute_knn(series: &TimeSeries, config: &ImputationConfig) -> Result<ImputationResult> {
    let flat = if series.is_univariate() {
        let t_period = config.t_period.ok_or(Error::MissingPeriod)?;
        let (values, observed) = series.channel(0);
        let spec = ReshapeSpec {
            t_period,
            pad_policy: config.pad_policy,
        };
        let matrix = reshape_to_matrix(&values, &observed, spec)?;
        reshape_to_series(&knn_fill(&matrix, config.knn_k)?).0
    } else {
        if config.t_period.is_some() {
            return Err(Error::PeriodOnMultivariate);
        }
        knn_fill(&grid_of(series)?, config.knn_k)?.cells().to_vec()
    };
    Ok(ImputationResult {
        imputed: complete_from(series, flat)?,
        method_trace: Vec::new(),
    })
}
