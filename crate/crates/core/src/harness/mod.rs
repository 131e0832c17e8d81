//! Benchmark sweeps: simulate missingness, impute, score the imputation and
//! the downstream classifier, and persist the results.
//!
//! For every `(seed, rate, method)` of an [`ExperimentConfig`] each series is
//! masked MCAR, imputed from its corrupted copy only, and scored; the
//! completed dataset is then summarised into features and cross-validated.
//! One extra record (method `none`, rate 0) classifies the untouched data.

mod io;
mod report;
mod synth;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{cross_validate, extract_features, ClassifierKind, ClassifierParams, SplitProtocol};
use crate::error::{Error, Result};
use crate::forest::ForestParams;
use crate::impute::{impute_series, ImputationConfig, Method};
use crate::metrics::abs_error_sum;
use crate::missingness::{simulate_mcar, MaskedSeries, MissingSpec, MAX_RATE};
use crate::seed::SeedKey;
use crate::series::{Dataset, PadPolicy, TimeSeries};

pub use io::{dataset_name, format_value, load_dataset, load_series, write_dataset, write_series};
pub use report::{
    emit_plot_data, emit_results, format_g, mae_curve, read_results, summary_markdown, write_results_csv, CurvePoint,
    MAE_CURVE_HEADER, RESULTS_HEADER,
};
pub use synth::{sine, synth_dataset, synth_series, SynthSeries, SynthSpec};

/// Method name of the full-data baseline record.
pub const BASELINE_METHOD: &str = "none";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 100 trees per forest.
    #[default]
    Paper,
    /// 25 trees per forest.
    Desk,
}

impl Profile {
    pub fn forest(self) -> ForestParams {
        match self {
            Profile::Paper => ForestParams::default(),
            Profile::Desk => ForestParams::desk(),
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Profile::Paper),
            "desk" => Ok(Profile::Desk),
            other => Err(format!("unknown profile '{other}' (valid: paper, desk)")),
        }
    }
}

/// How per-series imputation errors are combined into one MAE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaePooling {
    /// Mean over all masked slots of all series.
    #[default]
    Pooled,
    /// Mean of the per-series MAEs.
    PerSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub manifest: PathBuf,
    /// Defaults to the manifest's directory name.
    pub dataset: Option<String>,
    pub methods: Vec<Method>,
    pub missing_rates: Vec<f64>,
    pub t_period: Option<usize>,
    pub pad_policy: PadPolicy,
    pub classifier: ClassifierKind,
    pub classifier_params: ClassifierParams,
    pub folds: usize,
    pub leave_one_out: bool,
    pub seeds: Vec<u64>,
    pub profile: Profile,
    /// Overrides the profile's tree count.
    pub trees: Option<usize>,
    pub max_iter: usize,
    /// Neighbours for the KNN imputer.
    pub knn_k: usize,
    pub mae_pooling: MaePooling,
    /// When off, `wall_time_seconds` is left empty so output is reproducible
    /// byte for byte.
    pub record_timing: bool,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            manifest: PathBuf::new(),
            dataset: None,
            methods: Method::ALL.to_vec(),
            missing_rates: (1..=8).map(|i| i as f64 / 10.0).collect(),
            t_period: None,
            pad_policy: PadPolicy::Strict,
            classifier: ClassifierKind::Logreg,
            classifier_params: ClassifierParams::default(),
            folds: 5,
            leave_one_out: false,
            seeds: vec![0],
            profile: Profile::Paper,
            trees: None,
            max_iter: 5,
            knn_k: 5,
            mae_pooling: MaePooling::Pooled,
            record_timing: true,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.methods.is_empty() {
            return bad("at least one method is needed");
        }
        if self.missing_rates.is_empty() {
            return bad("at least one missing rate is needed");
        }
        for &r in &self.missing_rates {
            if !(r > 0.0 && r <= MAX_RATE) {
                return Err(Error::RateOutOfRange(r));
            }
        }
        if self.missing_rates.windows(2).any(|w| w[1] <= w[0]) {
            return bad("missing rates must be strictly increasing");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is needed");
        }
        if !self.leave_one_out && self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.max_iter == 0 || self.knn_k == 0 || self.trees == Some(0) || self.t_period == Some(0) {
            return bad("max_iter, knn_k, trees and t_period must be positive");
        }
        self.forest().validate()
    }

    pub fn forest(&self) -> ForestParams {
        let mut forest = self.profile.forest();
        if let Some(n) = self.trees {
            forest.n_trees = n;
        }
        forest
    }

    pub fn protocol(&self) -> SplitProtocol {
        if self.leave_one_out {
            SplitProtocol::LeaveOneOut
        } else {
            SplitProtocol::StratifiedKFold { folds: self.folds }
        }
    }

    /// Imputer settings for one series of one sweep cell.
    pub fn imputation(&self, method: Method, seed: u64, series_id: &str, rate: f64) -> ImputationConfig {
        ImputationConfig {
            method,
            t_period: self.t_period,
            pad_policy: self.pad_policy,
            max_iter: self.max_iter,
            forest: self.forest(),
            knn_k: self.knn_k,
            n_chains: 1,
            seed: SeedKey::new(seed)
                .tag("impute")
                .tag(series_id)
                .real(rate)
                .tag(method.name())
                .seed(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub dataset: String,
    pub method: String,
    pub classifier: String,
    pub missing_rate: f64,
    pub seed: u64,
    pub t_period: Option<usize>,
    pub mae: Option<f64>,
    pub f1: f64,
    pub auc: f64,
    pub mcc: f64,
    pub wall_time_seconds: Option<f64>,
}

/// Loads the manifest and runs the sweep.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let dataset = load_dataset(&config.manifest)?;
    run_on_dataset(&dataset, config)
}

/// Baseline record first, then one record per `(seed, rate, method)` in that
/// nesting order.
pub fn run_on_dataset(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    dataset.check_classifiable()?;
    if let Some(s) = dataset.series.iter().find(|s| !s.is_complete()) {
        return Err(Error::PreexistingMissing.in_context(&s.id, 0.0, BASELINE_METHOD));
    }
    let name = config.dataset.clone().unwrap_or_else(|| dataset.name.clone());
    let record = |method: &str, rate: f64, seed: u64, mae: Option<f64>, m: crate::metrics::MetricBundle, secs: f64| {
        ExperimentRecord {
            dataset: name.clone(),
            method: method.to_string(),
            classifier: config.classifier.name().to_string(),
            missing_rate: rate,
            seed,
            t_period: config.t_period,
            mae,
            f1: m.f1,
            auc: m.auc,
            mcc: m.mcc,
            wall_time_seconds: config.record_timing.then_some(secs),
        }
    };

    let mut records = Vec::new();
    let first_seed = config.seeds[0];
    let start = Instant::now();
    let baseline = classify(&dataset.series, config, first_seed)
        .map_err(|e| e.in_context("*", 0.0, BASELINE_METHOD))?;
    records.push(record(BASELINE_METHOD, 0.0, first_seed, None, baseline, start.elapsed().as_secs_f64()));

    for &seed in &config.seeds {
        for &rate in &config.missing_rates {
            let masked = dataset
                .series
                .par_iter()
                .map(|s| {
                    simulate_mcar(s, MissingSpec::for_series(seed, &s.id, rate))
                        .map_err(|e| e.in_context(&s.id, rate, "simulate"))
                })
                .collect::<Result<Vec<_>>>()?;
            for &method in &config.methods {
                let start = Instant::now();
                let imputed = masked
                    .par_iter()
                    .map(|m| {
                        let id = &m.corrupted.id;
                        impute_series(&m.corrupted, &config.imputation(method, seed, id, rate))
                            .map(|r| r.imputed)
                            .map_err(|e| e.in_context(id, rate, method.name()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mae = imputation_mae(&masked, &imputed, config.mae_pooling)
                    .map_err(|e| e.in_context("*", rate, method.name()))?;
                let metrics = classify(&imputed, config, seed).map_err(|e| e.in_context("*", rate, method.name()))?;
                records.push(record(method.name(), rate, seed, mae, metrics, start.elapsed().as_secs_f64()));
            }
        }
    }
    Ok(records)
}

fn classify(series: &[TimeSeries], config: &ExperimentConfig, seed: u64) -> Result<crate::metrics::MetricBundle> {
    let features: Vec<_> = series.iter().map(extract_features).collect();
    cross_validate(&features, config.classifier, &config.classifier_params, config.protocol(), seed)
}

/// `None` when no slot was hidden anywhere.
fn imputation_mae(masked: &[MaskedSeries], imputed: &[TimeSeries], pooling: MaePooling) -> Result<Option<f64>> {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut per_series = Vec::new();
    for (m, out) in masked.iter().zip(imputed) {
        let (s, n) = abs_error_sum(&m.ground_truth, out, &m.sim_mask)?;
        sum += s;
        count += n;
        if n > 0 {
            per_series.push(s / n as f64);
        }
    }
    Ok(match pooling {
        _ if count == 0 => None,
        MaePooling::Pooled => Some(sum / count as f64),
        MaePooling::PerSeries => Some(per_series.iter().sum::<f64>() / per_series.len() as f64),
    })
}
