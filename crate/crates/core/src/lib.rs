//! Time-series imputation with MICE over random forests.
//!
//! A univariate series is folded into a `periods × phase` matrix so that each
//! column holds the same phase of successive periods; chained-equation random
//! forests then infer every missing cell from the values at the other phases of
//! the same period, i.e. from both earlier and later epochs. Multichannel series
//! are imputed directly on their `epochs × channels` grid.
//!
//! Around the imputer the crate provides classical baselines (mean, LOCF,
//! linear interpolation, KNN), seeded MCAR missingness simulation, the
//! downstream classifiers used to score imputations, and a benchmark harness
//! with a command-line front end.

pub mod classify;
pub mod cli;
pub mod error;
pub mod forest;
pub mod harness;
pub mod impute;
pub mod metrics;
pub mod missingness;
pub mod seed;
pub mod series;

pub use error::{Error, Result};
pub use series::{CellState, Dataset, PadPolicy, ReshapeSpec, SeriesMatrix, TimeSeries};
