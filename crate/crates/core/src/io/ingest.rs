//! Real-series ingestion for evaluation.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use super::shard::{read_shard, SHARD_MAGIC};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;
use crate::types::SeriesWindow;

/// Stream id used by [`split_by_seed`], kept apart from the synthesis streams.
const SPLIT_STREAM: u64 = 0x5350_4c49_5400_0001;

fn is_shard(bytes: &[u8]) -> bool {
    bytes.len() >= SHARD_MAGIC.len() && bytes[..SHARD_MAGIC.len()] == SHARD_MAGIC
}

fn parse_value(path: &Path, line: usize, field: &str) -> Result<f64> {
    let parse_err = |reason: String| Error::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        reason,
    };
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(format!("not a number: {:?}", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(format!("non-finite value {v}")));
    }
    Ok(v)
}

/// Reads a univariate series.
///
/// CSV input holds one value per line; blank lines are skipped and a single
/// non-numeric first line is taken as a header. A binary shard contributes
/// the composite row of every record, concatenated in record order.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let bytes = fs::read(path)?;
    if is_shard(&bytes) {
        let (_, records) = read_shard(bytes.as_slice())?;
        return Ok(records
            .iter()
            .flat_map(|r| r.composite.iter().map(|v| *v as f64))
            .collect());
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        reason: format!("not UTF-8 text: {e}"),
    })?;
    let mut out = Vec::new();
    let mut seen_first = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let first = !seen_first;
        seen_first = true;
        if line.contains(',') {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                reason: "expected a single column".into(),
            });
        }
        match parse_value(path, i + 1, line) {
            Ok(v) => out.push(v),
            Err(_) if first && line.parse::<f64>().is_err() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Slices `series` into windows of `window_len` every `stride` samples and
/// standardizes each window to `[-1, 1]`. A trailing remainder shorter than
/// a window is dropped.
pub fn window_series(series: &[f64], window_len: usize, stride: usize) -> Result<Vec<SeriesWindow>> {
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    if series.len() < window_len {
        return Err(Error::EmptyIngest {
            len: series.len(),
            window_len,
        });
    }
    let count = (series.len() - window_len) / stride + 1;
    (0..count)
        .map(|w| {
            let start = w * stride;
            SeriesWindow::new(series[start..start + window_len].to_vec()).map(|s| s.standardized())
        })
        .collect()
}

/// Reads a series from a single-column CSV or a shard and windows it.
pub fn ingest_real(path: &Path, window_len: usize, stride: usize) -> Result<Vec<SeriesWindow>> {
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    window_series(&read_series(path)?, window_len, stride)
}

/// Reads a set of equal-length windows.
///
/// A shard yields its composite rows. CSV input holds one window per line,
/// comma-separated, optionally under a header. A header whose first column
/// is `sample_index` (as in a CSV dataset's series files) marks a leading
/// index column, which is dropped.
pub fn read_windows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = fs::read(path)?;
    if is_shard(&bytes) {
        let (_, records) = read_shard(bytes.as_slice())?;
        return Ok(records
            .into_iter()
            .map(|r| r.composite.into_iter().map(f64::from).collect())
            .collect());
    }
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        reason: format!("not UTF-8 text: {e}"),
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut skip = 0;
    let mut header_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen && rows.is_empty() {
            header_seen = true;
            let first = line.split(',').next().unwrap_or("").trim();
            if first.parse::<f64>().is_err() {
                if first == "sample_index" {
                    skip = 1;
                }
                continue;
            }
        }
        let row = line
            .split(',')
            .skip(skip)
            .map(|f| parse_value(path, i + 1, f))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i as u64 + 1,
                    reason: format!("expected {} values, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes one window per line.
pub fn write_windows_csv<S: AsRef<[f64]>>(path: &Path, windows: &[S]) -> Result<()> {
    let write_err = |source| Error::Write {
        path: PathBuf::from(path),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(write_err)?);
    for w in windows {
        let line: Vec<String> = w.as_ref().iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(",")).map_err(write_err)?;
    }
    out.flush().map_err(write_err)
}

/// Shuffles `0..count` with `seed` and returns `(train, test)` indices, the
/// first `round(train_frac · count)` going to training. Both halves are
/// sorted.
pub fn split_by_seed(count: usize, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&train_frac) {
        return Err(Error::Config(format!("train fraction must lie in [0, 1], got {train_frac}")));
    }
    let mut idx: Vec<usize> = (0..count).collect();
    idx.shuffle(&mut seeded_rng(seed, SPLIT_STREAM));
    let cut = (train_frac * count as f64).round() as usize;
    let mut test = idx.split_off(cut);
    idx.sort_unstable();
    test.sort_unstable();
    Ok((idx, test))
}
