//! Seeded MCAR missingness simulation.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::seed::SeedKey;
use crate::series::TimeSeries;

pub const MAX_RATE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissingSpec {
    pub rate: f64,
    pub seed: u64,
}

impl MissingSpec {
    pub fn new(rate: f64, seed: u64) -> Self {
        MissingSpec { rate, seed }
    }

    /// Spec for one series of a sweep; the seed is keyed by the series id and
    /// rate so that parallel and sequential runs hide the same slots.
    pub fn for_series(master_seed: u64, series_id: &str, rate: f64) -> Self {
        let seed = SeedKey::new(master_seed).tag("mcar").tag(series_id).real(rate).seed();
        MissingSpec { rate, seed }
    }
}

/// A corrupted copy of a complete series plus what was hidden.
///
/// Hidden slots carry `NaN` in `corrupted`, so nothing downstream of the
/// corrupted series can see the ground truth.
#[derive(Debug, Clone)]
pub struct MaskedSeries {
    pub corrupted: TimeSeries,
    pub ground_truth: TimeSeries,
    /// Flat slot flags (`epoch * channels + channel`), true where hidden.
    pub sim_mask: Vec<bool>,
}

impl MaskedSeries {
    pub fn hidden_count(&self) -> usize {
        self.sim_mask.iter().filter(|m| **m).count()
    }
}

/// Number of slots hidden for `rate` over `slots` slots (round half up).
pub fn hidden_slot_count(rate: f64, slots: usize) -> usize {
    (rate * slots as f64 + 0.5).floor() as usize
}

/// Hides exactly `round(rate × T × d)` slots chosen uniformly without
/// replacement.
pub fn simulate_mcar(series: &TimeSeries, spec: MissingSpec) -> Result<MaskedSeries> {
    if !(0.0..=MAX_RATE).contains(&spec.rate) {
        return Err(Error::RateOutOfRange(spec.rate));
    }
    if !series.is_complete() {
        return Err(Error::PreexistingMissing);
    }
    let slots = series.values().len();
    let amount = hidden_slot_count(spec.rate, slots);
    let mut rng = SeedKey::new(spec.seed).tag("mcar-draw").rng();
    let mut sim_mask = vec![false; slots];
    for i in index::sample(&mut rng, slots, amount) {
        sim_mask[i] = true;
    }
    let values = series
        .values()
        .iter()
        .zip(&sim_mask)
        .map(|(&v, &hidden)| if hidden { f64::NAN } else { v })
        .collect();
    let observed = sim_mask.iter().map(|h| !h).collect();
    Ok(MaskedSeries {
        corrupted: series.with_slots(values, observed)?,
        ground_truth: series.clone(),
        sim_mask,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskStats {
    pub hidden_count: usize,
    pub achieved_rate: f64,
    pub longest_gap: usize,
}

pub fn mask_stats(masked: &MaskedSeries) -> MaskStats {
    let channels = masked.ground_truth.channels();
    let slots = masked.sim_mask.len();
    let hidden_count = masked.hidden_count();
    let mut longest_gap = 0;
    for c in 0..channels {
        let mut run = 0;
        for hidden in masked.sim_mask.iter().skip(c).step_by(channels) {
            run = if *hidden { run + 1 } else { 0 };
            longest_gap = longest_gap.max(run);
        }
    }
    MaskStats {
        hidden_count,
        achieved_rate: if slots == 0 { 0.0 } else { hidden_count as f64 / slots as f64 },
        longest_gap,
    }
}
