//! Command-line front end. Exit status: 0 success, 1 usage error, 2 data
//! error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::classify::ClassifierKind;
use crate::error::Error;
use crate::harness::{
    emit_plot_data, emit_results, load_dataset, read_results, run_on_dataset, summary_markdown, synth_dataset,
    write_dataset, ExperimentConfig, Profile, SynthSpec,
};
use crate::impute::{impute_series, Method};
use crate::missingness::{simulate_mcar, MissingSpec, MAX_RATE};
use crate::series::{Dataset, PadPolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tsimpute", version, about = "Time-series imputation benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a fraction of every series (MCAR) and write the masked dataset.
    Simulate(SimulateArgs),
    /// Impute a dataset with missing entries.
    Impute(ImputeArgs),
    /// Run a sweep over methods, missing rates and seeds.
    Bench(BenchArgs),
    /// Rebuild summary.md from a results.csv.
    Report(ReportArgs),
    /// Write the synthetic seasonal dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ImputeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    t_period: Option<usize>,
    /// Pad the last period instead of requiring t_period to divide the length.
    #[arg(long)]
    pad: bool,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long, default_value = "paper")]
    profile: Profile,
    #[arg(long, default_value_t = 5)]
    max_iter: usize,
    #[arg(long, default_value_t = 5)]
    knn_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Complete dataset to score against; defaults to `ground_truth/` next to
    /// the manifest when present.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON experiment config; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    #[arg(long)]
    t_period: Option<usize>,
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    knn_k: Option<usize>,
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall_time_seconds empty.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    results: PathBuf,
    /// Directory for summary.md; defaults to the results file's directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    series: usize,
    #[arg(long, default_value_t = 960)]
    length: usize,
    #[arg(long, default_value_t = 24)]
    period: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Impute(a) => impute(a),
        Command::Bench(a) => bench(a),
        Command::Report(a) => report(a),
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

fn simulate(a: SimulateArgs) -> Outcome {
    if !(a.rate >= 0.0 && a.rate <= MAX_RATE) {
        return Err(Failure::Usage(format!("--rate must lie in [0, {MAX_RATE}], got {}", a.rate)));
    }
    let dataset = load_dataset(&a.manifest)?;
    let masked = dataset
        .series
        .par_iter()
        .map(|s| {
            simulate_mcar(s, MissingSpec::for_series(a.seed, &s.id, a.rate))
                .map_err(|e| e.in_context(&s.id, a.rate, "simulate"))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let corrupted = Dataset::new(
        dataset.name.clone(),
        dataset.epoch_seconds,
        masked.iter().map(|m| m.corrupted.clone()).collect(),
    );
    write_dataset(&a.out, &corrupted)?;
    write_dataset(&a.out.join("ground_truth"), &dataset)?;
    let mut mask = String::from("series_id,epoch,channel\n");
    for m in &masked {
        let d = m.corrupted.channels();
        for (slot, _) in m.sim_mask.iter().enumerate().filter(|(_, h)| **h) {
            mask.push_str(&format!("{},{},{}\n", csv_text(&m.corrupted.id), slot / d, slot % d));
        }
    }
    fs::write(a.out.join("sim_mask.csv"), mask).map_err(Error::from)?;
    let hidden: usize = masked.iter().map(|m| m.hidden_count()).sum();
    println!("hid {hidden} entries across {} series; wrote {}", masked.len(), a.out.display());
    Ok(())
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn impute(a: ImputeArgs) -> Outcome {
    if a.max_iter == 0 || a.knn_k == 0 || a.trees == Some(0) || a.t_period == Some(0) {
        return Err(Failure::Usage("--max-iter, --knn-k, --trees and --t-period must be positive".into()));
    }
    let dataset = load_dataset(&a.manifest)?;
    let exp = ExperimentConfig {
        t_period: a.t_period,
        pad_policy: if a.pad { PadPolicy::Pad } else { PadPolicy::Strict },
        profile: a.profile,
        trees: a.trees,
        max_iter: a.max_iter,
        knn_k: a.knn_k,
        ..ExperimentConfig::default()
    };
    let imputed = dataset
        .series
        .par_iter()
        .map(|s| {
            impute_series(s, &exp.imputation(a.method, a.seed, &s.id, 0.0))
                .map(|r| r.imputed)
                .map_err(|e| e.in_context(&s.id, 0.0, a.method.name()))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let truth_manifest = a.truth.clone().or_else(|| {
        let sibling = a.manifest.parent()?.join("ground_truth").join("manifest.csv");
        sibling.exists().then_some(sibling)
    });
    let completed = Dataset::new(dataset.name.clone(), dataset.epoch_seconds, imputed);
    write_dataset(&a.out, &completed)?;
    if let Some(path) = truth_manifest {
        let truth = load_dataset(&path)?;
        write_mae_report(&a.out.join("mae_report.csv"), &dataset, &completed, &truth)?;
    }
    println!("imputed {} series with {}; wrote {}", completed.len(), a.method, a.out.display());
    Ok(())
}

/// Per-series MAE over the entries missing in the input, plus a pooled row.
fn write_mae_report(path: &Path, input: &Dataset, imputed: &Dataset, truth: &Dataset) -> crate::Result<()> {
    let mut out = String::from("series_id,masked_count,mae\n");
    let (mut total, mut count) = (0.0, 0usize);
    for (s, done) in input.series.iter().zip(&imputed.series) {
        let t = truth
            .series
            .iter()
            .find(|t| t.id == s.id)
            .ok_or_else(|| Error::InvalidSeries(format!("series {} has no ground truth", s.id)))?;
        if t.values().len() != s.values().len() {
            return Err(Error::LengthMismatch(t.values().len(), s.values().len()));
        }
        let mask: Vec<bool> = s.observed().iter().zip(t.observed()).map(|(o, g)| !o && *g).collect();
        let (sum, n) = crate::metrics::abs_error_sum(t, done, &mask)?;
        total += sum;
        count += n;
        let mae = if n > 0 { crate::harness::format_g(sum / n as f64) } else { String::new() };
        out.push_str(&format!("{},{n},{mae}\n", csv_text(&s.id)));
    }
    let pooled = if count > 0 { crate::harness::format_g(total / count as f64) } else { String::new() };
    out.push_str(&format!("*,{count},{pooled}\n"));
    fs::write(path, out)?;
    Ok(())
}

fn bench_config(a: &BenchArgs) -> std::result::Result<ExperimentConfig, Failure> {
    let mut c = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("invalid config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(v) = &a.manifest {
        c.manifest = v.clone();
    } else if let Some(cfg) = &a.config {
        // relative manifest paths in a config file resolve against the file
        if c.manifest.is_relative() {
            if let Some(dir) = cfg.parent() {
                c.manifest = dir.join(&c.manifest);
            }
        }
    }
    if let Some(v) = &a.method {
        c.methods = v.clone();
    }
    if let Some(v) = &a.rates {
        c.missing_rates = v.clone();
    }
    if a.t_period.is_some() {
        c.t_period = a.t_period;
    }
    if let Some(v) = a.seed {
        c.seeds = vec![v];
    }
    if let Some(v) = &a.seeds {
        c.seeds = v.clone();
    }
    if let Some(v) = a.folds {
        c.folds = v;
    }
    if let Some(v) = a.classifier {
        c.classifier = v;
    }
    if a.trees.is_some() {
        c.trees = a.trees;
    }
    if let Some(v) = a.max_iter {
        c.max_iter = v;
    }
    if let Some(v) = a.knn_k {
        c.knn_k = v;
    }
    if let Some(v) = a.profile {
        c.profile = v;
    }
    if let Some(v) = &a.out {
        c.out = v.clone();
    }
    if a.no_timing {
        c.record_timing = false;
    }
    if c.manifest.as_os_str().is_empty() {
        return Err(Failure::Usage("no dataset: pass --manifest or set \"manifest\" in --config".into()));
    }
    c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(c)
}

fn bench(a: BenchArgs) -> Outcome {
    let config = bench_config(&a)?;
    let dataset = load_dataset(&config.manifest)?;
    let records = run_on_dataset(&dataset, &config)?;
    let (results, summary) = emit_results(&records, &config.out)?;
    let curve = emit_plot_data(&records, &config.out)?;
    println!(
        "{} records; wrote {}, {}, {}",
        records.len(),
        results.display(),
        summary.display(),
        curve.display()
    );
    Ok(())
}

fn report(a: ReportArgs) -> Outcome {
    let records = read_results(&a.results)?;
    let dir = a
        .out
        .or_else(|| a.results.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(Error::from)?;
    let path = dir.join("summary.md");
    fs::write(&path, summary_markdown(&records)).map_err(Error::from)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn synth(a: SynthArgs) -> Outcome {
    if a.series < 2 || a.length == 0 || a.period == 0 || !(a.noise >= 0.0) {
        return Err(Failure::Usage("need --series >= 2, positive --length and --period, --noise >= 0".into()));
    }
    let spec = SynthSpec {
        n_series: a.series,
        length: a.length,
        period: a.period,
        noise_sd: a.noise,
        seed: a.seed,
        ..SynthSpec::default()
    };
    let manifest = write_dataset(&a.out, &synth_dataset(&spec)?)?;
    println!("wrote {}", manifest.display());
    Ok(())
}
