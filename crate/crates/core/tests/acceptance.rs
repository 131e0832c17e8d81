//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. Criteria
//! run sequentially so each runtime budget measures one criterion at a time.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use tsimpute::classify::{cross_validate, extract_features, ClassifierKind, ClassifierParams, FeatureVector, SplitProtocol};
use tsimpute::forest::{fit_tree, FeatureMatrix, ForestParams, TreeNode};
use tsimpute::harness::{load_dataset, run_on_dataset, synth_dataset, synth_series, ExperimentConfig, Profile, SynthSpec};
use tsimpute::impute::{impute_series, ImputationConfig, Method};
use tsimpute::metrics::{f1, mae, mcc, roc_auc, Averaging};
use tsimpute::missingness::{simulate_mcar, MissingSpec};
use tsimpute::series::{reshape_to_matrix, reshape_to_series};
use tsimpute::{ReshapeSpec, TimeSeries};

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn run(id: u32, name: &'static str, budget: Option<Duration>, check: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (ok, mut detail) = check();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed < b);
    if let Some(b) = budget {
        detail.push_str(&format!("; {:.2}s of {}s", elapsed.as_secs_f64(), b.as_secs()));
    }
    let outcome = Outcome {
        id,
        name,
        pass: ok && in_budget,
        detail,
        elapsed,
    };
    println!(
        "{} criterion {:>2} {}: {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.id,
        outcome.name,
        outcome.detail
    );
    outcome
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

// 1

fn reshape_round_trip() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = 0;
    for _ in 0..1000 {
        let len = rng.random_range(1..=600usize);
        let divisors: Vec<usize> = (1..=len).filter(|d| len % d == 0).collect();
        let t_period = divisors[rng.random_range(0..divisors.len())];
        let rate = rng.random_range(0.0..0.9);
        let observed: Vec<bool> = (0..len).map(|_| !rng.random_bool(rate)).collect();
        let values: Vec<f64> = observed
            .iter()
            .map(|&o| match (o, rng.random_range(0..8)) {
                (false, _) => f64::NAN,
                (true, 0) => -0.0,
                (true, 1) => f64::from_bits(rng.random_range(1..1u64 << 52)),
                (true, _) => rng.random_range(-1e6..1e6),
            })
            .collect();
        let matrix = match reshape_to_matrix(&values, &observed, ReshapeSpec::strict(t_period)) {
            Ok(m) => m,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let (back, flags) = reshape_to_series(&matrix);
        let same_bits = back.len() == len && back.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same_bits || flags != observed {
            failures += 1;
        }
    }
    (failures == 0, format!("{failures} of 1000 round trips differ"))
}

// 2

fn preservation_and_completeness() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = Vec::new();
    let mut runs = 0;
    for i in 0..200 {
        let channels = if i % 4 == 3 { rng.random_range(2..=3) } else { 1 };
        let t_period = rng.random_range(3..=12usize);
        let periods = rng.random_range(4..=12usize);
        let len = t_period * periods;
        let rows: Vec<Vec<Option<f64>>> = (0..len)
            .map(|t| {
                (0..channels)
                    .map(|c| Some((t as f64 * 0.7 + c as f64).sin() + rng.random_range(-0.2..0.2)))
                    .collect()
            })
            .collect();
        let series = TimeSeries::from_rows(format!("s{i}"), &rows, 0).unwrap();
        let masked = simulate_mcar(&series, MissingSpec::new(rng.random_range(0.05..0.6), i)).unwrap();
        let input = &masked.corrupted;
        for method in Method::ALL {
            let mut config = ImputationConfig::new(method);
            config.forest = ForestParams::desk();
            config.seed = i;
            if channels == 1 {
                config.t_period = Some(t_period);
            }
            runs += 1;
            let out = match impute_series(input, &config) {
                Ok(r) => r.imputed,
                Err(e) => {
                    violations.push(format!("{method:?} on s{i}: {e}"));
                    continue;
                }
            };
            let preserved = (0..input.values().len()).all(|k| {
                !input.observed()[k] || input.values()[k].to_bits() == out.values()[k].to_bits()
            });
            let complete = out.is_complete() && out.values().iter().all(|v| v.is_finite());
            if !preserved || !complete {
                violations.push(format!("{method:?} on s{i}: preserved {preserved}, complete {complete}"));
            }
        }
    }
    let detail = match violations.first() {
        None => format!("{runs} imputations, no violations"),
        Some(first) => format!("{} violations, first: {first}", violations.len()),
    };
    (violations.is_empty(), detail)
}

// 3

/// Greedy CART in exact integer arithmetic: at each node every threshold
/// between distinct sorted values of every feature is scored by its rational
/// within-child squared error, first best in (feature, threshold) order wins.
fn oracle_tree(x: &[Vec<i64>], y: &[i64], rows: &[usize], depth: usize, max_depth: usize) -> TreeNode {
    let leaf = || {
        let sum: i64 = rows.iter().map(|&r| y[r]).sum();
        TreeNode::Leaf {
            value: sum as f64 / rows.len() as f64,
        }
    };
    let constant = rows.iter().all(|&r| y[r] == y[rows[0]]);
    if constant || depth >= max_depth || rows.len() < 2 {
        return leaf();
    }
    // Within-child SSE of a side as numerator/denominator: Q - S²/n = (nQ - S²)/n.
    let sse = |side: &[usize]| -> (i128, i128) {
        let n = side.len() as i128;
        let s: i128 = side.iter().map(|&r| y[r] as i128).sum();
        let q: i128 = side.iter().map(|&r| (y[r] as i128).pow(2)).sum();
        (n * q - s * s, n)
    };
    let (all_num, all_den) = sse(rows);
    // Best split minimizes SSE_left + SSE_right, compared as exact fractions.
    let mut best: Option<(usize, i64, i64, i128, i128)> = None;
    for f in 0..x[0].len() {
        let mut levels: Vec<i64> = rows.iter().map(|&r| x[r][f]).collect();
        levels.sort_unstable();
        levels.dedup();
        for pair in levels.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] <= lo).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] > lo).collect();
            let (ln, ld) = sse(&left);
            let (rn, rd) = sse(&right);
            let (num, den) = (ln * rd + rn * ld, ld * rd);
            let better = match best {
                None => num * all_den < all_num * den,
                Some((.., bn, bd)) => num * bd < bn * den,
            };
            if better {
                best = Some((f, lo, hi, num, den));
            }
        }
    }
    let Some((f, lo, hi, ..)) = best else {
        return leaf();
    };
    let left: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] <= lo).collect();
    let right: Vec<usize> = rows.iter().copied().filter(|&r| x[r][f] > lo).collect();
    TreeNode::Split {
        feature: f,
        threshold: (lo + hi) as f64 / 2.0,
        left: Box::new(oracle_tree(x, y, &left, depth + 1, max_depth)),
        right: Box::new(oracle_tree(x, y, &right, depth + 1, max_depth)),
    }
}

fn forest_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut splits = 0;
    for _ in 0..500 {
        let m = rng.random_range(1..=12usize);
        let p = rng.random_range(1..=2usize);
        let max_depth = rng.random_range(1..=2usize);
        let span = rng.random_range(1..=6i64);
        let x: Vec<Vec<i64>> = (0..m).map(|_| (0..p).map(|_| rng.random_range(0..=span)).collect()).collect();
        let y: Vec<i64> = (0..m).map(|_| rng.random_range(-5..=5)).collect();
        let features = FeatureMatrix::from_rows(
            &x.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect::<Vec<_>>(),
        )
        .unwrap();
        let targets: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let params = ForestParams {
            n_trees: 1,
            max_depth: Some(max_depth),
            bootstrap: false,
            ..ForestParams::default()
        };
        let tree = fit_tree(&features, &targets, &params, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let rows: Vec<usize> = (0..m).collect();
        let expected = oracle_tree(&x, &y, &rows, 0, max_depth);
        splits += expected.leaf_count() - 1;
        let probes = (0..20).map(|_| (0..p).map(|_| rng.random_range(-1.0..span as f64 + 1.0)).collect::<Vec<f64>>());
        let same_predictions = (0..m)
            .map(|r| features.row(r).to_vec())
            .chain(probes)
            .all(|q| tree.predict(&q).unwrap().to_bits() == expected.predict(&q).to_bits());
        if tree.root != expected || !same_predictions {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("{mismatches} of 500 trees differ ({splits} oracle splits)"))
}

// 4

fn pairwise_auc(y: &[bool], s: &[f64]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in (0..y.len()).filter(|&i| y[i]) {
        for j in (0..y.len()).filter(|&j| !y[j]) {
            pairs += 1.0;
            if s[i] > s[j] {
                wins += 1.0;
            } else if s[i] == s[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn metric_identities() -> (bool, String) {
    let mut problems = Vec::new();
    let labels = [true, false, true, true, false];
    let as_score = |flip: bool| labels.iter().map(|&l| if l != flip { 1.0 } else { 0.0 }).collect::<Vec<_>>();
    for (scores, expected) in [(as_score(false), 1.0), (as_score(true), 0.0), (vec![0.3; 5], 0.5)] {
        let got = roc_auc(&labels, &scores).unwrap();
        if got != expected {
            problems.push(format!("canonical AUC {got} != {expected}"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=50usize);
        let mut y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        y[0] = true;
        y[1] = false;
        y.shuffle(&mut rng);
        let levels = rng.random_range(1..=10);
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64 * 0.25).collect();
        worst = worst.max((roc_auc(&y, &s).unwrap() - pairwise_auc(&y, &s)).abs());
    }
    if worst > 1e-12 {
        problems.push(format!("rank AUC differs from pairwise by {worst:e}"));
    }

    let exact = [
        ("binary F1", f1(&[1, 1, 0, 0], &[1, 0, 0, 0], Averaging::BinaryPositive).unwrap(), 2.0 / 3.0),
        ("binary MCC", mcc(&[1, 1, 0, 0], &[1, 0, 0, 0]).unwrap(), 2.0 / 12f64.sqrt()),
        ("F1 {1,1,1}", f1(&[1, 1, 0, 0], &[1, 0, 1, 0], Averaging::BinaryPositive).unwrap(), 0.5),
        ("MCC {1,1,1,1}", mcc(&[1, 1, 0, 0], &[1, 0, 1, 0]).unwrap(), 0.0),
        ("inverted MCC", mcc(&[1, 0, 1, 0], &[0, 1, 0, 1]).unwrap(), -1.0),
        ("3-class MCC", mcc(&[0, 1, 2], &[1, 2, 0]).unwrap(), -0.5),
        ("macro F1", f1(&[0, 0, 1, 1], &[0, 1, 1, 1], Averaging::Macro).unwrap(), 11.0 / 15.0),
        ("macro F1 1/3", f1(&[0, 1, 2, 1, 2], &[0, 2, 1, 2, 1], Averaging::Macro).unwrap(), 1.0 / 3.0),
    ];
    for (name, got, expected) in exact {
        if (got - expected).abs() > 1e-15 {
            problems.push(format!("{name}: {got} != {expected}"));
        }
    }
    let detail = if problems.is_empty() {
        format!("canonical and hand cases exact; max pairwise AUC gap {worst:e}")
    } else {
        problems.join("; ")
    };
    (problems.is_empty(), detail)
}

// 5, 6, 7

/// One clean sine per seed: period 24, amplitude 1, length 960, own phase.
fn seasonal(seed: u64, noise_sd: f64) -> tsimpute::harness::SynthSeries {
    let spec = SynthSpec {
        n_series: 1,
        noise_sd,
        subject_sd: 0.0,
        class_offset: 0.0,
        class_amplitude: 0.0,
        seed,
        ..SynthSpec::default()
    };
    synth_series(&spec, 0).unwrap()
}

fn impute_masked(series: &TimeSeries, method: Method, seed: u64, rate: f64) -> (TimeSeries, Vec<bool>, TimeSeries) {
    let masked = simulate_mcar(series, MissingSpec::for_series(seed, &series.id, rate)).unwrap();
    let config = ExperimentConfig {
        t_period: Some(24),
        profile: Profile::Desk,
        ..ExperimentConfig::default()
    }
    .imputation(method, seed, &series.id, rate);
    let imputed = impute_series(&masked.corrupted, &config).unwrap().imputed;
    (imputed, masked.sim_mask, masked.ground_truth)
}

fn seasonal_recovery() -> (bool, String) {
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 0..5 {
        let s = seasonal(seed, 0.1);
        let score = |method| {
            let (imputed, mask, truth) = impute_masked(&s.noisy, method, seed, 0.3);
            mae(&truth, &imputed, &mask).unwrap()
        };
        let (rf, mean, locf) = (score(Method::MiceRf), score(Method::Mean), score(Method::Locf));
        if rf < mean && rf < locf {
            wins += 1;
        }
        rows.push(format!("{rf:.4}/{mean:.4}/{locf:.4}"));
    }
    (wins >= 4, format!("mice_rf/mean/locf MAE {}; {wins}/5 seeds", rows.join(" ")))
}

fn denoising() -> (bool, String) {
    let sigma = 0.3;
    let bound = sigma * (2.0 / std::f64::consts::PI).sqrt();
    let mut wins = 0;
    let mut errors = Vec::new();
    for seed in 0..5 {
        let s = seasonal(seed, sigma);
        let (imputed, mask, _) = impute_masked(&s.noisy, Method::MiceRf, seed, 0.3);
        let (sum, n) = mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .fold((0.0, 0usize), |(acc, n), (t, _)| (acc + (imputed.values()[t] - s.clean[t]).abs(), n + 1));
        let err = sum / n as f64;
        if err < bound {
            wins += 1;
        }
        errors.push(format!("{err:.4}"));
    }
    (
        wins >= 4,
        format!("error vs clean {} (bound {bound:.4}); {wins}/5 seeds", errors.join(" ")),
    )
}

fn degradation() -> (bool, String) {
    let mut wins = 0;
    let mut rows = Vec::new();
    for seed in 0..3 {
        let s = seasonal(seed, 0.1);
        let at = |rate| {
            let (imputed, mask, truth) = impute_masked(&s.noisy, Method::MiceRf, seed, rate);
            mae(&truth, &imputed, &mask).unwrap()
        };
        let (low, high) = (at(0.1), at(0.8));
        if high > low {
            wins += 1;
        }
        rows.push(format!("{low:.4}->{high:.4}"));
    }
    (wins == 3, format!("MAE at 0.1->0.8 {}; {wins}/3 seeds", rows.join(" ")))
}

// 8

/// Two classes of 100, three Gaussian features each shifted by 4σ.
fn separated_features(seed: u64) -> Vec<FeatureVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    (0..200)
        .map(|i| {
            let label = i % 2;
            FeatureVector {
                series_id: format!("f{i}"),
                label,
                values: (0..3).map(|_| 4.0 * label as f64 + unit.sample(&mut rng)).collect(),
            }
        })
        .collect()
}

fn classifier_sanity() -> (bool, String) {
    let params = ClassifierParams::default();
    let protocol = SplitProtocol::StratifiedKFold { folds: 5 };
    let (mut worst_f1, mut worst_auc, mut worst_mcc): (f64, f64, f64) = (1.0, 1.0, 0.0);
    for seed in 0..5 {
        let mut features = separated_features(100 + seed);
        let m = cross_validate(&features, ClassifierKind::Logreg, &params, protocol, seed).unwrap();
        worst_f1 = worst_f1.min(m.f1);
        worst_auc = worst_auc.min(m.auc);

        let mut labels: Vec<usize> = features.iter().map(|f| f.label).collect();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(200 + seed));
        for (f, l) in features.iter_mut().zip(labels) {
            f.label = l;
        }
        let m = cross_validate(&features, ClassifierKind::Logreg, &params, protocol, seed).unwrap();
        worst_mcc = worst_mcc.max(m.mcc.abs());
    }
    (
        worst_f1 >= 0.99 && worst_auc >= 0.99 && worst_mcc < 0.25,
        format!("min F1 {worst_f1:.4}, min AUC {worst_auc:.4}, max shuffled |MCC| {worst_mcc:.4}"),
    )
}

// 9

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tsimpute")).args(args).output().unwrap()
}

fn determinism(root: &Path) -> (bool, String) {
    let data = root.join("data");
    let out = cli(&["synth", "--out", data.to_str().unwrap(), "--series", "10", "--length", "240"]);
    if !out.status.success() {
        return (false, format!("synth failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let manifest = data.join("manifest.csv");
    let bench = |dir: &str, timing: bool| {
        let out_dir = root.join(dir);
        let mut args = vec![
            "bench",
            "--manifest",
            manifest.to_str().unwrap(),
            "--rates",
            "0.1,0.5",
            "--seeds",
            "0,1",
            "--t-period",
            "24",
            "--profile",
            "desk",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        if !timing {
            args.push("--no-timing");
        }
        let out = cli(&args);
        assert!(out.status.success(), "bench failed: {}", String::from_utf8_lossy(&out.stderr));
        let read = |f: &str| std::fs::read(out_dir.join(f)).unwrap();
        (read("results.csv"), read("mae_curve.csv"))
    };
    let a = bench("a", false);
    let b = bench("b", false);
    let timed = bench("c", true);
    let without_time = |bytes: &[u8]| -> Vec<String> {
        String::from_utf8_lossy(bytes)
            .lines()
            .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
            .collect()
    };
    let lines = String::from_utf8_lossy(&a.0).lines().count();
    let identical = a == b;
    let timing_only = without_time(&timed.0) == without_time(&a.0) && timed.1 == a.1;
    (
        identical && timing_only && lines == 1 + 1 + 2 * 2 * 5,
        format!(
            "results.csv ({lines} lines) and mae_curve.csv byte-identical: {identical}; timed run differs only in wall time: {timing_only}"
        ),
    )
}

// 10

fn desk_benchmark() -> (bool, String) {
    let dataset = synth_dataset(&SynthSpec::default()).unwrap();
    let config = ExperimentConfig {
        t_period: Some(24),
        seeds: vec![0, 1, 2],
        profile: Profile::Desk,
        ..ExperimentConfig::default()
    };
    let records = run_on_dataset(&dataset, &config).unwrap();
    let timed = records.iter().all(|r| r.wall_time_seconds.is_some_and(|t| t >= 0.0));
    let mean_mae = |method: &str| {
        let v: Vec<f64> = records.iter().filter(|r| r.method == method).filter_map(|r| r.mae).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    (
        records.len() == 1 + 8 * 5 * 3 && timed,
        format!(
            "{} records, wall time on every record: {timed}; mean MAE mice_rf {:.4}, knn {:.4}, linear {:.4}, locf {:.4}, mean {:.4}",
            records.len(),
            mean_mae("mice_rf"),
            mean_mae("knn"),
            mean_mae("linear"),
            mean_mae("locf"),
            mean_mae("mean"),
        ),
    )
}

// 11

const PSYKOSE_ENV: &str = "TSIMPUTE_PSYKOSE_MANIFEST";

fn psykose_baseline() -> Option<String> {
    let manifest = std::env::var_os(PSYKOSE_ENV)?;
    let report = match load_dataset(Path::new(&manifest)) {
        Ok(ds) => {
            let features: Vec<FeatureVector> = ds.series.iter().map(extract_features).collect();
            match cross_validate(
                &features,
                ClassifierKind::Logreg,
                &ClassifierParams::default(),
                SplitProtocol::default(),
                0,
            ) {
                Ok(m) => format!(
                    "logreg baseline F1 {:.3} AUC {:.3} MCC {:.3} (published 0.848 / 0.904 / 0.687)",
                    m.f1, m.auc, m.mcc
                ),
                Err(e) => format!("classification failed: {e}"),
            }
        }
        Err(e) => format!("could not load {}: {e}", Path::new(&manifest).display()),
    };
    Some(report)
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let outcomes = vec![
        run(1, "reshape round trip", secs(5), reshape_round_trip),
        run(2, "observed preservation and completeness", secs(120), preservation_and_completeness),
        run(3, "forest matches brute-force splits", secs(30), forest_oracle),
        run(4, "metric identities", None, metric_identities),
        run(5, "seasonal recovery", secs(60), seasonal_recovery),
        run(6, "denoising", secs(60), denoising),
        run(7, "degradation with missing rate", secs(180), degradation),
        run(8, "classifier sanity", None, classifier_sanity),
        run(9, "end-to-end determinism", None, || determinism(tmp.path())),
        run(10, "desk benchmark budget", secs(600), desk_benchmark),
    ];
    match psykose_baseline() {
        Some(report) => println!("INFO criterion 11 real-data baseline (not gating): {report}"),
        None => println!("SKIP criterion 11 real-data baseline (not gating): set {PSYKOSE_ENV} to a manifest"),
    }
    let total: f64 = outcomes.iter().map(|o| o.elapsed.as_secs_f64()).sum();
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!("{} of {} criteria passed in {total:.1}s", outcomes.len() - failed.len(), outcomes.len());
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
