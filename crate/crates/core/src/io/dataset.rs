//! Batch dataset emission with a manifest that pins every sample.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::shard::{encode_record, read_shard, ShardHeader, ShardRecord, SERIES_ROWS, SHARD_FORMAT_VERSION};
use crate::config::{EngineConfig, ENGINE_VERSION};
use crate::error::{Error, Result};
use crate::labels::{self, CHANNELS, SCHEMA_VERSION};
use crate::metrics::MetricConfig;
use crate::mixer::{synthesize, SyntheticSample};
use crate::noise::{NoiseDistribution, ROSTER_VERSION};
use crate::rhythm::frequency_bounds;
use crate::types::SAMPLE_PERIOD;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const DEFAULT_MAX_SHARD_BYTES: u64 = 512 * 1024 * 1024;

/// Samples synthesized per parallel batch.
const BATCH: u64 = 256;

const SERIES_FILES: [&str; SERIES_ROWS] = ["composite", "rhythm", "noise", "trend"];

/// Label channel blocks written to separate CSV files.
const LABEL_BLOCKS: [(&str, Range<usize>); 7] = [
    ("sine_count", labels::CH_SINE_COUNT..labels::CH_FREQ),
    ("frequency", labels::CH_FREQ..labels::CH_AMP),
    ("amplitude", labels::CH_AMP..labels::CH_PHASE),
    ("phase", labels::CH_PHASE..labels::CH_NOISE_CATEGORY),
    ("noise", labels::CH_NOISE_CATEGORY..labels::CH_TREND_METHOD),
    ("trend", labels::CH_TREND_METHOD..labels::CH_RATIOS),
    ("ratio", labels::CH_RATIOS..labels::CHANNELS),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Csv,
    Bin,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DatasetFormat::Csv),
            "bin" => Ok(DatasetFormat::Bin),
            other => Err(Error::Config(format!("unknown format {other:?}; expected csv or bin"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub seed: u64,
    pub count: u64,
    pub window_len: usize,
    pub format: DatasetFormat,
    pub config: EngineConfig,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub max_shard_bytes: u64,
}

impl GenerateOptions {
    pub fn new(seed: u64, count: u64, window_len: usize, format: DatasetFormat) -> Self {
        Self {
            seed,
            count,
            window_len,
            format,
            config: EngineConfig::default(),
            workers: 0,
            max_shard_bytes: DEFAULT_MAX_SHARD_BYTES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("count must be at least 1".into()));
        }
        frequency_bounds(self.window_len, SAMPLE_PERIOD)?;
        if self.window_len > u32::MAX as usize {
            return Err(Error::Config(format!("window length {} is too large", self.window_len)));
        }
        self.config.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub samples: u64,
    pub first_index: u64,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub engine_version: String,
    pub schema_version: u32,
    pub roster_version: String,
    pub shard_format_version: u32,
    pub seed: u64,
    pub count: u64,
    pub window_len: usize,
    pub format: DatasetFormat,
    pub config: EngineConfig,
    pub distributions: Vec<String>,
    pub metric_defaults: MetricConfig,
    pub channel_names: Vec<String>,
    pub created_unix: u64,
    pub files: Vec<FileEntry>,
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let file = File::open(&path)?;
        serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    /// Options that regenerate this dataset.
    pub fn generate_options(&self) -> GenerateOptions {
        GenerateOptions {
            config: self.config,
            ..GenerateOptions::new(self.seed, self.count, self.window_len, self.format)
        }
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

/// Synthesizes samples `0..count` in order, handing them to `consume` in
/// batches. Batches are generated in parallel on `workers` threads.
pub fn for_each_batch<F>(
    seed: u64,
    count: u64,
    window_len: usize,
    config: &EngineConfig,
    workers: usize,
    mut consume: F,
) -> Result<()>
where
    F: FnMut(&[SyntheticSample]) -> Result<()>,
{
    config.validate()?;
    let pool = build_pool(workers)?;
    let mut start = 0;
    while start < count {
        let end = (start + BATCH).min(count);
        let batch = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| synthesize(seed, i, window_len, config))
                .collect::<Result<Vec<_>>>()
        })?;
        consume(&batch)?;
        start = end;
    }
    Ok(())
}

/// A file being written whose SHA-256 is computed on the fly.
struct HashedFile {
    path: PathBuf,
    name: String,
    out: BufWriter<File>,
    hasher: Sha256,
    bytes: u64,
}

impl HashedFile {
    fn create(dir: &Path, name: &str, created: &mut Vec<PathBuf>) -> Result<Self> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| Error::Write {
            path: path.clone(),
            source,
        })?;
        created.push(path.clone());
        Ok(Self {
            path,
            name: name.to_string(),
            out: BufWriter::new(file),
            hasher: Sha256::new(),
            bytes: 0,
        })
    }

    fn put(&mut self, buf: &[u8]) -> Result<()> {
        self.hasher.update(buf);
        self.bytes += buf.len() as u64;
        self.out.write_all(buf).map_err(|source| Error::Write {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self, samples: u64, first_index: u64) -> Result<FileEntry> {
        self.out.flush().map_err(|source| Error::Write {
            path: self.path.clone(),
            source,
        })?;
        Ok(FileEntry {
            file: self.name,
            samples,
            first_index,
            bytes: self.bytes,
            sha256: hex::encode(self.hasher.finalize()),
        })
    }
}

struct BinWriter {
    dir: PathBuf,
    seed: u64,
    window_len: usize,
    per_shard: u64,
    remaining: u64,
    next_index: u64,
    current: Option<(HashedFile, u64, u64)>,
    buf: Vec<u8>,
    entries: Vec<FileEntry>,
}

impl BinWriter {
    fn new(dir: &Path, opts: &GenerateOptions) -> Self {
        let header = Self::header(opts.seed, opts.window_len, 0, 0);
        let room = opts.max_shard_bytes.saturating_sub(super::shard::HEADER_LEN as u64);
        let per_shard = (room / header.record_bytes() as u64).max(1);
        Self {
            dir: dir.to_path_buf(),
            seed: opts.seed,
            window_len: opts.window_len,
            per_shard,
            remaining: opts.count,
            next_index: 0,
            current: None,
            buf: Vec::new(),
            entries: Vec::new(),
        }
    }

    fn header(seed: u64, window_len: usize, count: u64, first_index: u64) -> ShardHeader {
        ShardHeader {
            version: SHARD_FORMAT_VERSION,
            channels: CHANNELS as u32,
            window_len: window_len as u32,
            series_rows: SERIES_ROWS as u32,
            count,
            first_index,
            seed,
            schema_version: SCHEMA_VERSION,
        }
    }

    fn write(&mut self, samples: &[SyntheticSample], created: &mut Vec<PathBuf>) -> Result<()> {
        for sample in samples {
            if self.current.is_none() {
                let count = self.per_shard.min(self.remaining);
                let name = format!("shard-{:05}.bin", self.entries.len());
                let mut file = HashedFile::create(&self.dir, &name, created)?;
                file.put(&Self::header(self.seed, self.window_len, count, self.next_index).encode())?;
                self.current = Some((file, count, self.next_index));
            }
            let (file, count, first) = self.current.as_mut().expect("shard open");
            self.buf.clear();
            encode_record(sample, &mut self.buf);
            file.put(&self.buf)?;
            self.remaining -= 1;
            self.next_index += 1;
            if self.next_index - *first == *count {
                let (file, count, first) = self.current.take().expect("shard open");
                self.entries.push(file.finish(count, first)?);
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<FileEntry>> {
        debug_assert!(self.current.is_none());
        Ok(self.entries)
    }
}

struct CsvWriter {
    series: Vec<HashedFile>,
    blocks: Vec<HashedFile>,
    count: u64,
    line: String,
}

fn push_f32(line: &mut String, v: f64) {
    // `Display` for f32 prints the shortest string that parses back exactly.
    let _ = write!(line, ",{}", v as f32);
}

impl CsvWriter {
    fn new(dir: &Path, window_len: usize, created: &mut Vec<PathBuf>) -> Result<Self> {
        let time_cols: String = (0..window_len).map(|t| format!(",t{t}")).collect();
        let mut series = Vec::new();
        for name in SERIES_FILES {
            let mut f = HashedFile::create(dir, &format!("series_{name}.csv"), created)?;
            f.put(format!("sample_index{time_cols}\n").as_bytes())?;
            series.push(f);
        }
        let mut blocks = Vec::new();
        for (name, _) in &LABEL_BLOCKS {
            let mut f = HashedFile::create(dir, &format!("labels_{name}.csv"), created)?;
            f.put(format!("sample_index,channel{time_cols}\n").as_bytes())?;
            blocks.push(f);
        }
        Ok(Self {
            series,
            blocks,
            count: 0,
            line: String::new(),
        })
    }

    fn write(&mut self, samples: &[SyntheticSample]) -> Result<()> {
        let names = labels::channel_names();
        for s in samples {
            let index = s.params.sample_index;
            for (file, series) in self.series.iter_mut().zip([&s.composite, &s.rhythm, &s.noise, &s.trend]) {
                self.line.clear();
                let _ = write!(self.line, "{index}");
                for &v in series.iter() {
                    push_f32(&mut self.line, v);
                }
                self.line.push('\n');
                file.put(self.line.as_bytes())?;
            }
            for (file, (_, channels)) in self.blocks.iter_mut().zip(&LABEL_BLOCKS) {
                for ch in channels.clone() {
                    self.line.clear();
                    let _ = write!(self.line, "{index},{}", names[ch]);
                    for &v in s.labels.row(ch) {
                        push_f32(&mut self.line, v);
                    }
                    self.line.push('\n');
                    file.put(self.line.as_bytes())?;
                }
            }
            self.count += 1;
        }
        Ok(())
    }

    fn finish(self) -> Result<Vec<FileEntry>> {
        let count = self.count;
        self.series
            .into_iter()
            .chain(self.blocks)
            .map(|f| f.finish(count, 0))
            .collect()
    }
}

enum DatasetWriter {
    Bin(BinWriter),
    Csv(CsvWriter),
}

fn write_samples(opts: &GenerateOptions, dir: &Path, created: &mut Vec<PathBuf>) -> Result<Vec<FileEntry>> {
    let mut writer = match opts.format {
        DatasetFormat::Bin => DatasetWriter::Bin(BinWriter::new(dir, opts)),
        DatasetFormat::Csv => DatasetWriter::Csv(CsvWriter::new(dir, opts.window_len, created)?),
    };
    for_each_batch(
        opts.seed,
        opts.count,
        opts.window_len,
        &opts.config,
        opts.workers,
        |batch| match &mut writer {
            DatasetWriter::Bin(w) => w.write(batch, created),
            DatasetWriter::Csv(w) => w.write(batch),
        },
    )?;
    match writer {
        DatasetWriter::Bin(w) => w.finish(),
        DatasetWriter::Csv(w) => w.finish(),
    }
}

/// Writes `opts.count` samples and a manifest into `out_dir`.
///
/// On failure every file created by this call is removed again.
pub fn generate_dataset(opts: &GenerateOptions, out_dir: &Path) -> Result<DatasetManifest> {
    opts.validate()?;
    fs::create_dir_all(out_dir).map_err(|source| Error::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let mut created = Vec::new();
    let files = match write_samples(opts, out_dir, &mut created) {
        Ok(files) => files,
        Err(e) => {
            for path in &created {
                let _ = fs::remove_file(path);
            }
            return Err(e);
        }
    };

    let manifest = DatasetManifest {
        engine_version: ENGINE_VERSION.to_string(),
        schema_version: SCHEMA_VERSION,
        roster_version: ROSTER_VERSION.to_string(),
        shard_format_version: SHARD_FORMAT_VERSION,
        seed: opts.seed,
        count: opts.count,
        window_len: opts.window_len,
        format: opts.format,
        config: opts.config,
        distributions: NoiseDistribution::ALL.iter().map(|d| d.name().to_string()).collect(),
        metric_defaults: MetricConfig::default(),
        channel_names: labels::channel_names().to_vec(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        files,
    };
    let path = out_dir.join(MANIFEST_FILE);
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&path, json).map_err(|source| Error::Write { path, source })?;
    Ok(manifest)
}

fn sha256_file(path: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    io::copy(&mut BufReader::new(File::open(path)?), &mut hasher)?;
    Ok(hex::encode(hasher.finalize()))
}

/// Recomputes every file checksum listed in the manifest.
pub fn verify_checksums(dir: &Path) -> Result<DatasetManifest> {
    let manifest = DatasetManifest::load(dir)?;
    for entry in &manifest.files {
        let actual = sha256_file(&dir.join(&entry.file))?;
        if actual != entry.sha256 {
            return Err(Error::Format(format!(
                "checksum mismatch for {}: manifest {}, file {actual}",
                entry.file, entry.sha256
            )));
        }
    }
    Ok(manifest)
}

/// Reads a dataset written by [`generate_dataset`] in either format.
pub fn read_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<ShardRecord>)> {
    let manifest = DatasetManifest::load(dir)?;
    let records = match manifest.format {
        DatasetFormat::Bin => {
            let mut records = Vec::new();
            for entry in &manifest.files {
                let (_, mut shard) = read_shard(BufReader::new(File::open(dir.join(&entry.file))?))?;
                records.append(&mut shard);
            }
            records
        }
        DatasetFormat::Csv => read_csv_records(dir, &manifest)?,
    };
    Ok((manifest, records))
}

fn parse_csv_rows(path: &Path, skip: usize) -> Result<Vec<(u64, Vec<f32>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |what: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            reason: what.to_string(),
        };
        let index = record
            .get(0)
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| bad("bad sample index"))?;
        let values = record
            .iter()
            .skip(1 + skip)
            .map(|s| s.parse::<f32>().map_err(|_| bad(&format!("bad value {s:?}"))))
            .collect::<Result<Vec<f32>>>()?;
        rows.push((index, values));
    }
    Ok(rows)
}

fn read_csv_records(dir: &Path, manifest: &DatasetManifest) -> Result<Vec<ShardRecord>> {
    let n = manifest.window_len;
    let mut series = Vec::new();
    for name in SERIES_FILES {
        series.push(parse_csv_rows(&dir.join(format!("series_{name}.csv")), 0)?);
    }
    let count = series[0].len();
    if series.iter().any(|s| s.len() != count || s.iter().any(|(_, v)| v.len() != n)) {
        return Err(Error::Format("series files disagree on shape".into()));
    }
    let mut labels = vec![vec![0f32; CHANNELS * n]; count];
    for (name, channels) in &LABEL_BLOCKS {
        let rows = parse_csv_rows(&dir.join(format!("labels_{name}.csv")), 1)?;
        if rows.len() != count * channels.len() {
            return Err(Error::Format(format!("labels_{name}.csv has {} rows", rows.len())));
        }
        for (i, (_, values)) in rows.into_iter().enumerate() {
            if values.len() != n {
                return Err(Error::Format(format!("labels_{name}.csv row {i} has {} values", values.len())));
            }
            let sample = i / channels.len();
            let ch = channels.start + i % channels.len();
            labels[sample][ch * n..(ch + 1) * n].copy_from_slice(&values);
        }
    }
    let [composite, rhythm, noise, trend]: [Vec<(u64, Vec<f32>)>; SERIES_ROWS] =
        series.try_into().expect("one entry per series file");
    Ok(composite
        .into_iter()
        .zip(rhythm)
        .zip(noise)
        .zip(trend)
        .zip(labels)
        .map(|((((c, r), z), t), labels)| ShardRecord {
            sample_index: c.0,
            composite: c.1,
            rhythm: r.1,
            noise: z.1,
            trend: t.1,
            labels,
        })
        .collect())
}
