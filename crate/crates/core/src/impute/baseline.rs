//! Per-channel classical fills: mean, last observation carried forward, and
//! linear interpolation.

use super::{complete_from, ImputationResult};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Observed mean everywhere a value is missing.
pub fn fill_mean(values: &[f64], observed: &[bool]) -> Result<Vec<f64>> {
    let (sum, n) = values
        .iter()
        .zip(observed)
        .filter(|(_, o)| **o)
        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
    if n == 0 {
        return Err(Error::AllMissing);
    }
    let mean = sum / n as f64;
    Ok(values
        .iter()
        .zip(observed)
        .map(|(&v, &o)| if o { v } else { mean })
        .collect())
}

/// Carries the last observation forward; leading holes take the first
/// observation.
pub fn fill_locf(values: &[f64], observed: &[bool]) -> Result<Vec<f64>> {
    let first = observed.iter().position(|o| *o).ok_or(Error::AllMissing)?;
    let mut last = values[first];
    Ok(values
        .iter()
        .zip(observed)
        .map(|(&v, &o)| {
            if o {
                last = v;
            }
            last
        })
        .collect())
}

/// Interpolates interior holes linearly by epoch index; holes before the first
/// or after the last observation take that observation.
pub fn fill_linear(values: &[f64], observed: &[bool]) -> Result<Vec<f64>> {
    let known: Vec<usize> = (0..values.len()).filter(|&i| observed[i]).collect();
    let (&first, &last) = match (known.first(), known.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::AllMissing),
    };
    let mut out = values.to_vec();
    out[..first].fill(values[first]);
    out[last + 1..].fill(values[last]);
    for pair in known.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (va, vb) = (values[a], values[b]);
        let span = (b - a) as f64;
        for (t, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            *slot = va + (vb - va) * (t - a) as f64 / span;
        }
    }
    Ok(out)
}

fn per_channel(series: &TimeSeries, fill: fn(&[f64], &[bool]) -> Result<Vec<f64>>) -> Result<ImputationResult> {
    let d = series.channels();
    let mut flat = vec![0.0; series.values().len()];
    for c in 0..d {
        let (values, observed) = series.channel(c);
        for (t, v) in fill(&values, &observed)?.into_iter().enumerate() {
            flat[t * d + c] = v;
        }
    }
    Ok(ImputationResult {
        imputed: complete_from(series, flat)?,
        method_trace: Vec::new(),
    })
}

pub fn impute_mean(series: &TimeSeries) -> Result<ImputationResult> {
    per_channel(series, fill_mean)
}

pub fn impute_locf(series: &TimeSeries) -> Result<ImputationResult> {
    per_channel(series, fill_locf)
}

pub fn impute_linear(series: &TimeSeries) -> Result<ImputationResult> {
    per_channel(series, fill_linear)
}
