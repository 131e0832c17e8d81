//! Series and dataset types, and the period reshape.
//!
//! A univariate series `x_1 .. x_T` is folded row-major into a `k × T_period`
//! matrix: cell `(r, c)` (0-based) holds epoch `r·T_period + c`, which is
//! `x_{r·T_period + c + 1}` in 1-based notation. Rows are successive periods,
//! columns are phases within a period.

use crate::error::{Error, Result};

/// One labelled series: `len` epochs of `channels` values each, stored
/// epoch-major (`values[t * channels + c]`), with a parallel observed flag.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub id: String,
    pub label: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
    channels: usize,
}

impl TimeSeries {
    pub fn new(
        id: impl Into<String>,
        values: Vec<f64>,
        observed: Vec<bool>,
        channels: usize,
        label: usize,
    ) -> Result<Self> {
        let id = id.into();
        if channels == 0 {
            return Err(Error::InvalidSeries(format!("{id}: zero channels")));
        }
        if values.len() != observed.len() {
            return Err(Error::InvalidSeries(format!(
                "{id}: {} values but {} flags",
                values.len(),
                observed.len()
            )));
        }
        if values.is_empty() || !values.len().is_multiple_of(channels) {
            return Err(Error::InvalidSeries(format!(
                "{id}: {} slots is not a positive multiple of {channels} channels",
                values.len()
            )));
        }
        if let Some(i) = (0..values.len()).find(|&i| observed[i] && !values[i].is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "{id}: observed value at epoch {} channel {} is not finite",
                i / channels,
                i % channels
            )));
        }
        Ok(TimeSeries {
            id,
            label,
            values,
            observed,
            channels,
        })
    }

    /// Complete univariate series.
    pub fn univariate(id: impl Into<String>, values: Vec<f64>, label: usize) -> Result<Self> {
        let observed = vec![true; values.len()];
        Self::new(id, values, observed, 1, label)
    }

    /// Univariate series with `None` marking missing epochs.
    pub fn from_options(id: impl Into<String>, values: &[Option<f64>], label: usize) -> Result<Self> {
        let observed = values.iter().map(Option::is_some).collect();
        let values = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Self::new(id, values, observed, 1, label)
    }

    /// Multichannel series from per-epoch rows.
    pub fn from_rows(id: impl Into<String>, rows: &[Vec<Option<f64>>], label: usize) -> Result<Self> {
        let id = id.into();
        let channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != channels) {
            return Err(Error::InvalidSeries(format!("{id}: ragged rows")));
        }
        let flat: Vec<Option<f64>> = rows.iter().flatten().copied().collect();
        let observed = flat.iter().map(Option::is_some).collect();
        let values = flat.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        Self::new(id, values, observed, channels, label)
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn is_univariate(&self) -> bool {
        self.channels == 1
    }

    /// Flat epoch-major value slots.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn observed(&self) -> &[bool] {
        &self.observed
    }

    pub fn value(&self, epoch: usize, channel: usize) -> f64 {
        self.values[epoch * self.channels + channel]
    }

    pub fn is_observed(&self, epoch: usize, channel: usize) -> bool {
        self.observed[epoch * self.channels + channel]
    }

    pub fn missing_count(&self) -> usize {
        self.observed.iter().filter(|o| !**o).count()
    }

    pub fn is_complete(&self) -> bool {
        self.observed.iter().all(|o| *o)
    }

    /// Values and flags of one channel, in epoch order.
    pub fn channel(&self, channel: usize) -> (Vec<f64>, Vec<bool>) {
        let values = self.values.iter().skip(channel).step_by(self.channels).copied().collect();
        let observed = self.observed.iter().skip(channel).step_by(self.channels).copied().collect();
        (values, observed)
    }

    /// Same id, label and shape with new slot contents.
    pub fn with_slots(&self, values: Vec<f64>, observed: Vec<bool>) -> Result<Self> {
        if values.len() != self.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} slots for a series of {}",
                values.len(),
                self.values.len()
            )));
        }
        Self::new(self.id.clone(), values, observed, self.channels, self.label)
    }

    /// Equality that compares floats by bit pattern, so NaN placeholders at
    /// missing slots compare equal.
    pub fn bitwise_eq(&self, other: &TimeSeries) -> bool {
        self.id == other.id
            && self.label == other.label
            && self.channels == other.channels
            && self.observed == other.observed
            && self.values.len() == other.values.len()
            && self.values.iter().zip(&other.values).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A named collection of labelled series.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub epoch_seconds: u32,
    pub series: Vec<TimeSeries>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, epoch_seconds: u32, series: Vec<TimeSeries>) -> Self {
        Dataset {
            name: name.into(),
            epoch_seconds,
            series,
        }
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<usize> {
        let mut classes: Vec<usize> = self.series.iter().map(|s| s.label).collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// Checks the minimum shape for a classification run.
    pub fn check_classifiable(&self) -> Result<()> {
        if self.series.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "dataset {} has {} series; classification needs at least 2",
                self.name,
                self.series.len()
            )));
        }
        if self.classes().len() < 2 {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PadPolicy {
    /// The period must divide the series length.
    #[default]
    Strict,
    /// Any period up to the series length; the last row is padded at its tail.
    Pad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReshapeSpec {
    pub t_period: usize,
    pub pad_policy: PadPolicy,
}

impl ReshapeSpec {
    pub fn strict(t_period: usize) -> Self {
        ReshapeSpec {
            t_period,
            pad_policy: PadPolicy::Strict,
        }
    }

    pub fn pad(t_period: usize) -> Self {
        ReshapeSpec {
            t_period,
            pad_policy: PadPolicy::Pad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodCheck {
    Valid,
    PadNeeded,
    Invalid,
}

/// Classifies a period against a series length.
pub fn validate_period(t_i: usize, t_period: usize) -> PeriodCheck {
    if t_period == 0 || t_period > t_i {
        PeriodCheck::Invalid
    } else if t_i.is_multiple_of(t_period) {
        PeriodCheck::Valid
    } else {
        PeriodCheck::PadNeeded
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Observed,
    Missing,
    Padding,
}

/// Row-major grid of cells with per-cell state.
#[derive(Debug, Clone)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<f64>,
    states: Vec<CellState>,
    original_len: usize,
}

impl SeriesMatrix {
    /// Builds a grid without padding (e.g. the epoch × channel grid of a
    /// multichannel series).
    pub fn from_grid(rows: usize, cols: usize, cells: Vec<f64>, observed: &[bool]) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols || observed.len() != cells.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} cells / {} flags for a {rows}x{cols} grid",
                cells.len(),
                observed.len()
            )));
        }
        let states = observed
            .iter()
            .map(|&o| if o { CellState::Observed } else { CellState::Missing })
            .collect();
        Ok(SeriesMatrix {
            rows,
            cols,
            cells,
            states,
            original_len: rows * cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.cells[row * self.cols + col] = value;
    }

    pub fn state(&self, row: usize, col: usize) -> CellState {
        self.states[row * self.cols + col]
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn states(&self) -> &[CellState] {
        &self.states
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.cells[row * self.cols..(row + 1) * self.cols]
    }

    pub fn padding_count(&self) -> usize {
        self.rows * self.cols - self.original_len
    }

    /// True when the row carries at least one padding cell.
    pub fn is_padded_row(&self, row: usize) -> bool {
        (0..self.cols).any(|c| self.state(row, c) == CellState::Padding)
    }

    pub fn missing_in_col(&self, col: usize) -> usize {
        (0..self.rows).filter(|&r| self.state(r, col) == CellState::Missing).count()
    }

    pub fn has_observed(&self) -> bool {
        self.states.contains(&CellState::Observed)
    }
}

/// Folds one channel into a `k × t_period` matrix.
pub fn reshape_to_matrix(values: &[f64], observed: &[bool], spec: ReshapeSpec) -> Result<SeriesMatrix> {
    let len = values.len();
    if observed.len() != len {
        return Err(Error::LengthMismatch(len, observed.len()));
    }
    let t_period = spec.t_period;
    match validate_period(len, t_period) {
        PeriodCheck::Invalid => return Err(Error::PeriodExceedsLength { t_period, len }),
        PeriodCheck::PadNeeded if spec.pad_policy == PadPolicy::Strict => {
            return Err(Error::NonDivisorPeriod { t_period, len })
        }
        _ => {}
    }
    let rows = len.div_ceil(t_period);
    let total = rows * t_period;
    let mut cells = Vec::with_capacity(total);
    let mut states = Vec::with_capacity(total);
    cells.extend_from_slice(values);
    states.extend(observed.iter().map(|&o| if o { CellState::Observed } else { CellState::Missing }));
    cells.resize(total, f64::NAN);
    states.resize(total, CellState::Padding);
    Ok(SeriesMatrix {
        rows,
        cols: t_period,
        cells,
        states,
        original_len: len,
    })
}

/// Row-major flatten with padding dropped; inverse of [`reshape_to_matrix`].
/// Any cell that is not `Observed` comes back flagged missing.
pub fn reshape_to_series(matrix: &SeriesMatrix) -> (Vec<f64>, Vec<bool>) {
    let n = matrix.original_len;
    let values = matrix.cells[..n].to_vec();
    let observed = matrix.states[..n].iter().map(|s| *s == CellState::Observed).collect();
    (values, observed)
}
