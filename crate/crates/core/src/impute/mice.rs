//! Multiple imputation by chained equations with random-forest regressors.
//!
//! After a column-mean start, each round visits the columns that have missing
//! cells (fewest missing first, ties by index). A forest is fit on the rows
//! where the column is observed, using every other column at its current value
//! as input, and its predictions overwrite the column's missing cells. Exactly
//! `max_iter` rounds run; there is no convergence test.
//!
//! Rows carrying padding cells are never used for fitting or prediction.

use super::{ImputationConfig, UpdateTrace};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, FeatureMatrix, ForestParams};
use crate::seed::SeedKey;
use crate::series::{CellState, SeriesMatrix};

/// Sets every missing cell to its column's observed mean, or to the global
/// observed mean when the column has no observed cell. Padding is untouched.
pub fn initial_fill(matrix: &SeriesMatrix) -> Result<SeriesMatrix> {
    let (mut global_sum, mut global_n) = (0.0, 0usize);
    let mut col_sum = vec![0.0; matrix.cols()];
    let mut col_n = vec![0usize; matrix.cols()];
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            if matrix.state(r, c) == CellState::Observed {
                let v = matrix.get(r, c);
                col_sum[c] += v;
                col_n[c] += 1;
                global_sum += v;
                global_n += 1;
            }
        }
    }
    if global_n == 0 {
        return Err(Error::AllMissing);
    }
    let global_mean = global_sum / global_n as f64;
    let mut out = matrix.clone();
    for c in 0..matrix.cols() {
        let fill = if col_n[c] > 0 {
            col_sum[c] / col_n[c] as f64
        } else {
            global_mean
        };
        for r in 0..matrix.rows() {
            if matrix.state(r, c) == CellState::Missing {
                out.set(r, c, fill);
            }
        }
    }
    Ok(out)
}

pub fn mice_impute(matrix: &SeriesMatrix, config: &ImputationConfig) -> Result<SeriesMatrix> {
    mice_impute_traced(matrix, config).map(|(m, _)| m)
}

/// Runs `config.n_chains` chains and averages them cell-wise.
pub fn mice_impute_traced(matrix: &SeriesMatrix, config: &ImputationConfig) -> Result<(SeriesMatrix, Vec<UpdateTrace>)> {
    if matrix.cols() < 2 {
        return Err(Error::SingleColumn);
    }
    let start = initial_fill(matrix)?;
    let mut trace = Vec::new();
    let mut chains = Vec::with_capacity(config.n_chains.max(1));
    for chain in 0..config.n_chains.max(1) {
        let mut current = start.clone();
        run_chain(&mut current, config, chain, &mut trace)?;
        chains.push(current);
    }
    if chains.len() == 1 {
        return Ok((chains.pop().unwrap(), trace));
    }
    let mut averaged = start;
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            if matrix.state(r, c) == CellState::Missing {
                let mean = chains.iter().map(|m| m.get(r, c)).sum::<f64>() / chains.len() as f64;
                averaged.set(r, c, mean);
            }
        }
    }
    Ok((averaged, trace))
}

fn run_chain(
    current: &mut SeriesMatrix,
    config: &ImputationConfig,
    chain: usize,
    trace: &mut Vec<UpdateTrace>,
) -> Result<()> {
    let rows: Vec<usize> = (0..current.rows()).filter(|&r| !current.is_padded_row(r)).collect();
    let cols = current.cols();
    let missing_in = |c: usize| rows.iter().filter(|&&r| current.state(r, c) == CellState::Missing).count();
    let mut order: Vec<(usize, usize)> = (0..cols).map(|c| (missing_in(c), c)).filter(|(n, _)| *n > 0).collect();
    order.sort_unstable();

    for iteration in 0..config.max_iter {
        for &(_, col) in &order {
            let (train, holes): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&r| current.state(r, col) == CellState::Observed);
            if train.is_empty() {
                // nothing to learn from; keep the starting fill
                continue;
            }
            let features = predictors(current, &train, col)?;
            let targets: Vec<f64> = train.iter().map(|&r| current.get(r, col)).collect();
            let params = ForestParams {
                seed: SeedKey::new(config.seed)
                    .tag("mice")
                    .index(chain as u64)
                    .index(iteration as u64)
                    .index(col as u64)
                    .seed(),
                ..config.forest
            };
            let forest = fit_forest(&features, &targets, &params)?;
            let queries = predictors(current, &holes, col)?;
            let mut change = 0.0;
            for (i, &r) in holes.iter().enumerate() {
                let prediction = forest.predict(queries.row(i))?;
                change += (prediction - current.get(r, col)).abs();
                current.set(r, col, prediction);
            }
            trace.push(UpdateTrace {
                chain,
                iteration,
                column: col,
                mean_abs_update: change / holes.len() as f64,
            });
        }
    }
    Ok(())
}

/// Every column but `target`, for the given rows.
fn predictors(matrix: &SeriesMatrix, rows: &[usize], target: usize) -> Result<FeatureMatrix> {
    let p = matrix.cols() - 1;
    let mut data = Vec::with_capacity(rows.len() * p);
    for &r in rows {
        let row = matrix.row(r);
        data.extend_from_slice(&row[..target]);
        data.extend_from_slice(&row[target + 1..]);
    }
    FeatureMatrix::new(rows.len(), p, data)
}
