//! Binary shard format.
//!
//! A shard is a fixed 64-byte little-endian header followed by `count`
//! records. Each record holds `series_rows` series (composite, rhythm, noise,
//! trend) of `N` floats and then the `C × N` label matrix, row-major, all as
//! little-endian `f32`.
//!
//! Header layout:
//!
//! | offset | size | field            |
//! |--------|------|------------------|
//! | 0      | 8    | magic `SYNSHRD1` |
//! | 8      | 4    | format version   |
//! | 12     | 4    | label channels C |
//! | 16     | 4    | window length N  |
//! | 20     | 4    | series rows      |
//! | 24     | 8    | record count     |
//! | 32     | 8    | first sample idx |
//! | 40     | 8    | dataset seed     |
//! | 48     | 4    | label schema ver |
//! | 52     | 12   | reserved, zero   |

use std::io::Read;

use crate::error::{Error, Result};
use crate::mixer::SyntheticSample;

pub const SHARD_MAGIC: [u8; 8] = *b"SYNSHRD1";
pub const SHARD_FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

/// Composite, rhythm, noise, trend.
pub const SERIES_ROWS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub version: u32,
    pub channels: u32,
    pub window_len: u32,
    pub series_rows: u32,
    pub count: u64,
    pub first_index: u64,
    pub seed: u64,
    pub schema_version: u32,
}

impl ShardHeader {
    pub fn record_floats(&self) -> usize {
        (self.series_rows as usize + self.channels as usize) * self.window_len as usize
    }

    pub fn record_bytes(&self) -> usize {
        self.record_floats() * 4
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..8].copy_from_slice(&SHARD_MAGIC);
        out[8..12].copy_from_slice(&self.version.to_le_bytes());
        out[12..16].copy_from_slice(&self.channels.to_le_bytes());
        out[16..20].copy_from_slice(&self.window_len.to_le_bytes());
        out[20..24].copy_from_slice(&self.series_rows.to_le_bytes());
        out[24..32].copy_from_slice(&self.count.to_le_bytes());
        out[32..40].copy_from_slice(&self.first_index.to_le_bytes());
        out[40..48].copy_from_slice(&self.seed.to_le_bytes());
        out[48..52].copy_from_slice(&self.schema_version.to_le_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "shard header needs {HEADER_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        if bytes[0..8] != SHARD_MAGIC {
            return Err(Error::Format("not a shard: bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let header = Self {
            version: u32_at(8),
            channels: u32_at(12),
            window_len: u32_at(16),
            series_rows: u32_at(20),
            count: u64_at(24),
            first_index: u64_at(32),
            seed: u64_at(40),
            schema_version: u32_at(48),
        };
        if header.version != SHARD_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported shard format version {}",
                header.version
            )));
        }
        if header.window_len == 0 {
            return Err(Error::Format("shard declares zero window length".into()));
        }
        Ok(header)
    }
}

pub(crate) fn push_f32s(out: &mut Vec<u8>, values: &[f64]) {
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

/// Appends one record for `sample` to `out`.
pub fn encode_record(sample: &SyntheticSample, out: &mut Vec<u8>) {
    for series in [&sample.composite, &sample.rhythm, &sample.noise, &sample.trend] {
        push_f32s(out, series);
    }
    push_f32s(out, sample.labels.values());
}

/// One decoded record, in storage precision.
#[derive(Debug, Clone, PartialEq)]
pub struct ShardRecord {
    pub sample_index: u64,
    pub composite: Vec<f32>,
    pub rhythm: Vec<f32>,
    pub noise: Vec<f32>,
    pub trend: Vec<f32>,
    /// Row-major `C × N`.
    pub labels: Vec<f32>,
}

pub(crate) fn f32s(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

/// Reads a whole shard.
pub fn read_shard<R: Read>(mut reader: R) -> Result<(ShardHeader, Vec<ShardRecord>)> {
    let mut head = [0u8; HEADER_LEN];
    reader.read_exact(&mut head).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated shard header".into()),
        _ => Error::Io(e),
    })?;
    let header = ShardHeader::decode(&head)?;
    if header.series_rows as usize != SERIES_ROWS {
        return Err(Error::Format(format!(
            "expected {SERIES_ROWS} series rows per record, got {}",
            header.series_rows
        )));
    }
    let n = header.window_len as usize;
    let mut buf = vec![0u8; header.record_bytes()];
    let mut records = Vec::with_capacity(header.count as usize);
    for i in 0..header.count {
        reader.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Format(format!("shard truncated at record {i}")),
            _ => Error::Io(e),
        })?;
        let floats = f32s(&buf);
        let row = |r: usize| floats[r * n..(r + 1) * n].to_vec();
        records.push(ShardRecord {
            sample_index: header.first_index + i,
            composite: row(0),
            rhythm: row(1),
            noise: row(2),
            trend: row(3),
            labels: floats[SERIES_ROWS * n..].to_vec(),
        });
    }
    let mut rest = [0u8; 1];
    if reader.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after the last record".into()));
    }
    Ok((header, records))
}
