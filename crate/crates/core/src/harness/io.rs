//! Manifest and series CSV files.
//!
//! A manifest has the header `series_id,path,label`; paths are relative to the
//! manifest's directory. A series file has the header `timestamp,value` or
//! `timestamp,value_1,...,value_d`, one row per epoch. An empty value field is
//! a missing entry. Row numbers in diagnostics are file line numbers.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::series::{Dataset, TimeSeries};

const DEFAULT_EPOCH_SECONDS: u32 = 60;

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    Ok(csv::ReaderBuilder::new().flexible(true).from_reader(file))
}

fn malformed(path: &Path, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::MalformedCsv {
        path: path.to_path_buf(),
        row,
        column,
        message: message.into(),
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    malformed(path, row, 0, e.to_string())
}

/// Name used for a dataset loaded from `manifest`: the enclosing directory,
/// or the file stem when the manifest sits at the root.
pub fn dataset_name(manifest: &Path) -> String {
    manifest
        .parent()
        .and_then(|p| p.file_name())
        .or_else(|| manifest.file_stem())
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Loads every series listed in `manifest`, in manifest order.
pub fn load_dataset(manifest: &Path) -> Result<Dataset> {
    let mut rdr = reader(manifest)?;
    let header = rdr.headers().map_err(|e| csv_error(manifest, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["series_id", "path", "label"] {
        return Err(malformed(manifest, 1, 1, "header must be series_id,path,label"));
    }
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut series = Vec::new();
    let mut channels: Option<usize> = None;
    let mut epoch_seconds = None;
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(manifest, e))?;
        let row = i + 2;
        if record.len() != 3 {
            return Err(malformed(manifest, row, record.len().min(3), "expected 3 fields"));
        }
        let id = record[0].trim();
        if id.is_empty() {
            return Err(malformed(manifest, row, 1, "empty series_id"));
        }
        let label: usize = record[2]
            .trim()
            .parse()
            .map_err(|_| malformed(manifest, row, 3, format!("label {:?} is not a non-negative integer", &record[2])))?;
        let path = base.join(record[1].trim());
        let (s, step) = load_series(&path, id, label)?;
        match channels {
            Some(expected) if expected != s.channels() => {
                return Err(Error::InconsistentChannelCount {
                    path,
                    expected,
                    got: s.channels(),
                })
            }
            _ => channels = Some(s.channels()),
        }
        epoch_seconds = epoch_seconds.or(step);
        series.push(s);
    }
    Ok(Dataset::new(
        dataset_name(manifest),
        epoch_seconds.unwrap_or(DEFAULT_EPOCH_SECONDS),
        series,
    ))
}

/// Reads one series file; also returns the epoch length when the first two
/// timestamps are integers.
pub fn load_series(path: &Path, id: &str, label: usize) -> Result<(TimeSeries, Option<u32>)> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let d = header.len().saturating_sub(1);
    let expected: Vec<String> = if d == 1 {
        vec!["timestamp".into(), "value".into()]
    } else {
        std::iter::once("timestamp".to_string())
            .chain((1..=d).map(|c| format!("value_{c}")))
            .collect()
    };
    if d == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(malformed(path, 1, 1, format!("header must be {}", expected.join(","))));
    }
    let mut rows = Vec::new();
    let mut stamps = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = i + 2;
        if record.len() != d + 1 {
            return Err(malformed(path, row, record.len(), format!("expected {} fields", d + 1)));
        }
        stamps.push(record[0].trim().parse::<i64>().ok());
        let mut values = Vec::with_capacity(d);
        for c in 0..d {
            let field = record[c + 1].trim();
            if field.is_empty() {
                values.push(None);
                continue;
            }
            let v: f64 = field
                .parse()
                .map_err(|_| malformed(path, row, c + 2, format!("{field:?} is not a number")))?;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    path: path.to_path_buf(),
                    row,
                    column: c + 2,
                    value: field.to_string(),
                });
            }
            values.push(Some(v));
        }
        rows.push(values);
    }
    let step = match (stamps.first(), stamps.get(1)) {
        (Some(Some(a)), Some(Some(b))) if b > a => u32::try_from(b - a).ok(),
        _ => None,
    };
    let series = TimeSeries::from_rows(id, &rows, label)
        .map_err(|e| malformed(path, 1, 0, e.to_string()))?;
    Ok((series, step))
}

/// Writes `series` as a CSV file; missing entries become empty fields.
pub fn write_series(path: &Path, series: &TimeSeries, epoch_seconds: u32) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    let d = series.channels();
    let mut header = vec!["timestamp".to_string()];
    if d == 1 {
        header.push("value".into());
    } else {
        header.extend((1..=d).map(|c| format!("value_{c}")));
    }
    w.write_record(&header)?;
    for t in 0..series.len() {
        let mut row = vec![(t as u64 * u64::from(epoch_seconds)).to_string()];
        for c in 0..d {
            row.push(if series.is_observed(t, c) {
                format_value(series.value(t, c))
            } else {
                String::new()
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

/// Writes a manifest plus one file per series under `dir/series/`; returns the
/// manifest path.
pub fn write_dataset(dir: &Path, dataset: &Dataset) -> Result<PathBuf> {
    let series_dir = dir.join("series");
    fs::create_dir_all(&series_dir)?;
    let manifest = dir.join("manifest.csv");
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&manifest)?;
    w.write_record(["series_id", "path", "label"])?;
    for (i, s) in dataset.series.iter().enumerate() {
        let file = format!("{i:04}_{}.csv", file_stem_for(&s.id));
        write_series(&series_dir.join(&file), s, dataset.epoch_seconds)?;
        w.write_record([s.id.as_str(), &format!("series/{file}"), &s.label.to_string()])?;
    }
    w.flush()?;
    Ok(manifest)
}

/// Series ids with path separators or other unusual characters are mapped to
/// safe file names.
fn file_stem_for(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}
