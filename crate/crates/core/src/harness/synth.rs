//! Seeded seasonal datasets for benchmarks and tests.
//!
//! Each series is `offset + amplitude · sin(2π (t + phase) / period) + noise`
//! with Gaussian noise. Class 1 differs from class 0 by `class_offset` in level
//! and `class_amplitude` in amplitude. Each series also draws its own phase
//! and a Gaussian jitter of its level and amplitude (`subject_sd`), so the two
//! classes overlap.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::SeedKey;
use crate::series::{Dataset, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_series: usize,
    pub length: usize,
    pub period: usize,
    pub amplitude: f64,
    pub noise_sd: f64,
    pub class_offset: f64,
    pub class_amplitude: f64,
    pub subject_sd: f64,
    /// Draw a phase per series; otherwise every series starts at phase 0.
    pub random_phase: bool,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_series: 50,
            length: 960,
            period: 24,
            amplitude: 1.0,
            noise_sd: 0.1,
            class_offset: 0.3,
            class_amplitude: 0.3,
            subject_sd: 0.2,
            random_phase: true,
            seed: 0,
        }
    }
}

/// A noisy series together with its noise-free signal.
#[derive(Debug, Clone)]
pub struct SynthSeries {
    pub noisy: TimeSeries,
    pub clean: Vec<f64>,
}

/// Noise-free sine.
pub fn sine(length: usize, period: usize, amplitude: f64, offset: f64, phase: f64) -> Vec<f64> {
    (0..length)
        .map(|t| offset + amplitude * (std::f64::consts::TAU * (t as f64 + phase) / period as f64).sin())
        .collect()
}

/// Series `index` of the dataset described by `spec`; labels alternate 0, 1.
pub fn synth_series(spec: &SynthSpec, index: usize) -> Result<SynthSeries> {
    if spec.length == 0 || spec.period == 0 || !(spec.noise_sd >= 0.0) || !(spec.subject_sd >= 0.0) {
        return Err(Error::InvalidParameter(
            "length and period must be positive, noise_sd and subject_sd non-negative".into(),
        ));
    }
    let jitter = Normal::new(0.0, spec.subject_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let label = index % 2;
    let mut rng = SeedKey::new(spec.seed).tag("synth").index(index as u64).rng();
    let phase = if spec.random_phase {
        rng.random_range(0.0..spec.period as f64)
    } else {
        0.0
    };
    let k = label as f64;
    let amplitude = spec.amplitude + k * spec.class_amplitude + jitter.sample(&mut rng);
    let offset = k * spec.class_offset + jitter.sample(&mut rng);
    let clean = sine(spec.length, spec.period, amplitude, offset, phase);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let values = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();
    Ok(SynthSeries {
        noisy: TimeSeries::univariate(format!("syn{index:03}"), values, label)?,
        clean,
    })
}

pub fn synth_dataset(spec: &SynthSpec) -> Result<Dataset> {
    let series = (0..spec.n_series)
        .map(|i| synth_series(spec, i).map(|s| s.noisy))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new("synthetic", 60, series))
}
