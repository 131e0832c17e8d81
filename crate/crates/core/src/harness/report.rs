//! `results.csv`, `summary.md` and `mae_curve.csv`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentRecord, BASELINE_METHOD};
use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str = "dataset,method,classifier,missing_rate,seed,t_period,mae,f1,auc,mcc,wall_time_seconds";
pub const MAE_CURVE_HEADER: &str = "method,missing_rate,mae_mean,mae_std";

/// Six significant digits in the style of C's `%g`: trailing zeros dropped,
/// exponent form below 1e-4 and from 1e6 on.
pub fn format_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs());
    }
    trim_zeros(&format!("{v:.*}", (5 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_g).unwrap_or_default()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_results_csv(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            csv_field(&r.dataset),
            csv_field(&r.method),
            csv_field(&r.classifier),
            format_g(r.missing_rate),
            r.seed.to_string(),
            r.t_period.map(|t| t.to_string()).unwrap_or_default(),
            opt(r.mae),
            format_g(r.f1),
            format_g(r.auc),
            format_g(r.mcc),
            opt(r.wall_time_seconds),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ExperimentRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(Error::MalformedCsv {
            path: path.to_path_buf(),
            row: 1,
            column: 1,
            message: format!("header must be {RESULTS_HEADER}"),
        });
    }
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::MalformedCsv {
                path: path.to_path_buf(),
                row: i + 2,
                column: 0,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Writes `results.csv` and a `summary.md` built from the values as written.
pub fn emit_results(records: &[ExperimentRecord], out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no records to write".into()));
    }
    fs::create_dir_all(out_dir)?;
    let results = out_dir.join("results.csv");
    write_results_csv(records, &results)?;
    let summary = out_dir.join("summary.md");
    fs::write(&summary, summary_markdown(&read_results(&results)?))?;
    Ok((results, summary))
}

#[derive(Debug, Clone, Copy)]
enum Metric {
    Mae,
    F1,
    Auc,
    Mcc,
}

impl Metric {
    fn title(self) -> &'static str {
        match self {
            Metric::Mae => "MAE",
            Metric::F1 => "F1",
            Metric::Auc => "AUC",
            Metric::Mcc => "MCC",
        }
    }

    fn get(self, r: &ExperimentRecord) -> Option<f64> {
        match self {
            Metric::Mae => r.mae,
            Metric::F1 => Some(r.f1),
            Metric::Auc => Some(r.auc),
            Metric::Mcc => Some(r.mcc),
        }
    }

    fn lower_is_better(self) -> bool {
        matches!(self, Metric::Mae)
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Markdown tables of seed-averaged metrics, one per metric, methods as
/// columns and missing rates as rows. The best method at each rate is bold:
/// lowest MAE, highest F1, AUC and MCC.
pub fn summary_markdown(records: &[ExperimentRecord]) -> String {
    let mut groups: Vec<(String, String)> = Vec::new();
    for r in records {
        let key = (r.dataset.clone(), r.classifier.clone());
        if !groups.contains(&key) {
            groups.push(key);
        }
    }
    let mut md = String::new();
    for (dataset, classifier) in groups {
        let rows: Vec<&ExperimentRecord> = records
            .iter()
            .filter(|r| r.dataset == dataset && r.classifier == classifier)
            .collect();
        let mut methods: Vec<&str> = Vec::new();
        for r in rows.iter().filter(|r| r.method != BASELINE_METHOD) {
            if !methods.contains(&r.method.as_str()) {
                methods.push(&r.method);
            }
        }
        let mut rates: Vec<f64> = rows
            .iter()
            .filter(|r| r.method != BASELINE_METHOD)
            .map(|r| r.missing_rate)
            .collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();

        let _ = writeln!(md, "# {dataset} ({classifier})\n");
        let _ = writeln!(
            md,
            "Values are means over seeds. Bold marks the best method at each missing rate \
             (lowest MAE; highest F1, AUC and MCC).\n"
        );
        for metric in [Metric::Mae, Metric::F1, Metric::Auc, Metric::Mcc] {
            let _ = writeln!(md, "## {}\n", metric.title());
            let baseline: Vec<f64> = rows
                .iter()
                .filter(|r| r.method == BASELINE_METHOD)
                .filter_map(|r| metric.get(r))
                .collect();
            if !baseline.is_empty() {
                let _ = writeln!(md, "Full-data baseline: {}\n", format_g(mean(&baseline)));
            }
            let _ = writeln!(md, "| missing rate | {} |", methods.join(" | "));
            let _ = writeln!(md, "|---|{}", "---|".repeat(methods.len()));
            for &rate in &rates {
                let cells: Vec<Option<f64>> = methods
                    .iter()
                    .map(|m| {
                        let v: Vec<f64> = rows
                            .iter()
                            .filter(|r| r.method == *m && r.missing_rate == rate)
                            .filter_map(|r| metric.get(r))
                            .collect();
                        (!v.is_empty()).then(|| mean(&v))
                    })
                    .collect();
                let best = cells.iter().flatten().copied().reduce(|a, b| {
                    if metric.lower_is_better() {
                        a.min(b)
                    } else {
                        a.max(b)
                    }
                });
                let rendered: Vec<String> = cells
                    .iter()
                    .map(|c| match c {
                        Some(v) if Some(*v) == best => format!("**{}**", format_g(*v)),
                        Some(v) => format_g(*v),
                        None => String::new(),
                    })
                    .collect();
                let _ = writeln!(md, "| {} | {} |", format_g(rate), rendered.join(" | "));
            }
            md.push('\n');
        }
    }
    md
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub method: String,
    pub missing_rate: f64,
    pub mae_mean: f64,
    /// Population standard deviation over seeds.
    pub mae_std: f64,
}

/// MAE per `(method, rate)` across seeds; methods in order of first
/// appearance, rates ascending. Baseline and MAE-less records are skipped.
pub fn mae_curve(records: &[ExperimentRecord]) -> Vec<CurvePoint> {
    let mut methods: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(usize, u64), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.method != BASELINE_METHOD) {
        let Some(mae) = r.mae else { continue };
        let m = match methods.iter().position(|m| *m == r.method) {
            Some(i) => i,
            None => {
                methods.push(&r.method);
                methods.len() - 1
            }
        };
        // rates are non-negative, so their bit patterns sort numerically
        cells.entry((m, r.missing_rate.to_bits())).or_default().push(mae);
    }
    cells
        .into_iter()
        .map(|((m, rate), values)| {
            let mu = mean(&values);
            let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / values.len() as f64;
            CurvePoint {
                method: methods[m].to_string(),
                missing_rate: f64::from_bits(rate),
                mae_mean: mu,
                mae_std: var.sqrt(),
            }
        })
        .collect()
}

pub fn emit_plot_data(records: &[ExperimentRecord], out_dir: &Path) -> Result<PathBuf> {
    let points = mae_curve(records);
    if points.is_empty() {
        return Err(Error::InvalidParameter("no sweep record carries an MAE".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut out = String::from(MAE_CURVE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_field(&p.method),
            format_g(p.missing_rate),
            format_g(p.mae_mean),
            format_g(p.mae_std)
        );
    }
    let path = out_dir.join("mae_curve.csv");
    fs::write(&path, out)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, rate: f64, seed: u64, mae: Option<f64>, f1: f64) -> ExperimentRecord {
        ExperimentRecord {
            dataset: "d".into(),
            method: method.into(),
            classifier: "logreg".into(),
            missing_rate: rate,
            seed,
            t_period: Some(24),
            mae,
            f1,
            auc: 0.5,
            mcc: 0.0,
            wall_time_seconds: None,
        }
    }

    #[test]
    fn g_formatting() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (0.1, "0.1"),
            (1.0, "1"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.000123456789, "0.000123457"),
            (0.0000123456, "1.23456e-05"),
            (2.0 / 3.0, "0.666667"),
            (-1.5, "-1.5"),
            (999999.5, "1e+06"),
            (0.30000000000000004, "0.3"),
        ];
        for (v, s) in cases {
            assert_eq!(format_g(v), s, "{v}");
        }
    }

    #[test]
    fn results_file_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut records = vec![rec("none", 0.0, 0, None, 0.9)];
        for i in 0..16 {
            records.push(rec(if i % 2 == 0 { "mice_rf" } else { "mean" }, 0.1 * (1 + i / 2) as f64, 0, Some(0.2), 0.8));
        }
        let (results, summary) = emit_results(&records, dir.path()).unwrap();
        let text = fs::read_to_string(results).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines.len(), 19); // header, 17 rows, trailing empty piece
        assert_eq!(lines[0], RESULTS_HEADER);
        assert_eq!(lines[1], "d,none,logreg,0,0,24,,0.9,0.5,0,");
        assert!(!text.contains("NaN") && !text.contains('\r'));
        assert!(fs::read_to_string(summary).unwrap().contains("Full-data baseline: 0.9"));
        assert_eq!(read_results(&dir.path().join("results.csv")).unwrap().len(), 17);
    }

    #[test]
    fn best_marking_follows_metric_direction() {
        let records = vec![
            rec("none", 0.0, 0, None, 0.95),
            rec("a", 0.1, 0, Some(0.2), 0.7),
            rec("b", 0.1, 0, Some(0.4), 0.9),
        ];
        let md = summary_markdown(&records);
        let mae = md.split("## F1").next().unwrap();
        assert!(mae.contains("| 0.1 | **0.2** | 0.4 |"));
        let f1 = md.split("## F1").nth(1).unwrap().split("## AUC").next().unwrap();
        assert!(f1.contains("| 0.1 | 0.7 | **0.9** |"));
        // equal values are both marked
        let auc = md.split("## AUC").nth(1).unwrap();
        assert!(auc.contains("| 0.1 | **0.5** | **0.5** |"));
    }

    #[test]
    fn curve_aggregates_over_seeds() {
        let mut records = vec![rec("none", 0.0, 0, None, 1.0)];
        for seed in 0..3 {
            for rate in [0.2, 0.1] {
                for m in ["x", "y"] {
                    let mae = if m == "x" { seed as f64 } else { 5.0 };
                    records.push(rec(m, rate, seed, Some(mae), 0.5));
                }
            }
        }
        let curve = mae_curve(&records);
        assert_eq!(curve.len(), 4);
        assert_eq!((curve[0].method.as_str(), curve[0].missing_rate), ("x", 0.1));
        assert_eq!(curve[0].mae_mean, 1.0);
        assert!((curve[0].mae_std - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((curve[3].method.as_str(), curve[3].missing_rate, curve[3].mae_std), ("y", 0.2, 0.0));
        let single: Vec<_> = records.iter().filter(|r| r.seed == 0).cloned().collect();
        assert!(mae_curve(&single).iter().all(|p| p.mae_std == 0.0));
    }
}
