//! Unlimited synthesis: a fresh, replayable epoch of samples on request.
//!
//! Epoch `e` consists of the samples keyed by `epoch_sample_index(e, i)` for
//! `i = 0..epoch_size`, so epochs never share a sample and any epoch can be
//! regenerated from `(seed, e)` alone.
//!
//! Wire format, little-endian:
//!
//! * epoch frame (32 bytes): magic `SYNEPOCH`, epoch `u64`, epoch size `u64`,
//!   C `u32`, N `u32`;
//! * sample frame: magic `SYNFRAME`, epoch `u64`, index `u64`, C `u32`,
//!   N `u32`, then the composite (`N` × `f32`) and the label matrix
//!   (`C × N` × `f32`, row-major).
//!
//! Every epoch starts with an epoch frame followed by `epoch_size` sample
//! frames.

use std::io::{self, BufRead, BufReader, ErrorKind, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc::sync_channel;
use std::thread;

use super::shard::{f32s, push_f32s};
use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::labels::CHANNELS;
use crate::mixer::{synthesize, SyntheticSample};
use crate::rhythm::frequency_bounds;
use crate::rng::epoch_sample_index;
use crate::types::SAMPLE_PERIOD;

pub const EPOCH_MAGIC: [u8; 8] = *b"SYNEPOCH";
pub const FRAME_MAGIC: [u8; 8] = *b"SYNFRAME";
pub const FRAME_HEADER_LEN: usize = 32;

pub const DEFAULT_QUEUE_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamConfig {
    pub seed: u64,
    pub epoch_size: u64,
    pub window_len: usize,
    pub engine: EngineConfig,
    /// Frames buffered between the generator and the sink.
    pub queue_depth: usize,
}

impl StreamConfig {
    pub fn new(seed: u64, epoch_size: u64, window_len: usize) -> Self {
        Self {
            seed,
            epoch_size,
            window_len,
            engine: EngineConfig::default(),
            queue_depth: DEFAULT_QUEUE_DEPTH,
        }
    }

    pub fn validate(&self) -> Result<()> {
        frequency_bounds(self.window_len, SAMPLE_PERIOD)?;
        if self.queue_depth == 0 {
            return Err(Error::Config("queue depth must be at least 1".into()));
        }
        self.engine.validate()
    }
}

/// Sample `index` of epoch `epoch`.
pub fn epoch_sample(config: &StreamConfig, epoch: u64, index: u64) -> Result<SyntheticSample> {
    synthesize(
        config.seed,
        epoch_sample_index(epoch, index),
        config.window_len,
        &config.engine,
    )
}

fn header(magic: &[u8; 8], a: u64, b: u64, channels: u32, window_len: u32) -> [u8; FRAME_HEADER_LEN] {
    let mut out = [0u8; FRAME_HEADER_LEN];
    out[0..8].copy_from_slice(magic);
    out[8..16].copy_from_slice(&a.to_le_bytes());
    out[16..24].copy_from_slice(&b.to_le_bytes());
    out[24..28].copy_from_slice(&channels.to_le_bytes());
    out[28..32].copy_from_slice(&window_len.to_le_bytes());
    out
}

pub fn encode_epoch_frame(config: &StreamConfig, epoch: u64) -> Vec<u8> {
    header(
        &EPOCH_MAGIC,
        epoch,
        config.epoch_size,
        CHANNELS as u32,
        config.window_len as u32,
    )
    .to_vec()
}

pub fn encode_sample_frame(epoch: u64, index: u64, sample: &SyntheticSample) -> Vec<u8> {
    let n = sample.composite.len();
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + 4 * n * (1 + CHANNELS));
    out.extend_from_slice(&header(&FRAME_MAGIC, epoch, index, CHANNELS as u32, n as u32));
    push_f32s(&mut out, &sample.composite);
    push_f32s(&mut out, sample.labels.values());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Epoch {
        epoch: u64,
        epoch_size: u64,
        channels: u32,
        window_len: u32,
    },
    Sample {
        epoch: u64,
        index: u64,
        channels: u32,
        window_len: u32,
        composite: Vec<f32>,
        labels: Vec<f32>,
    },
}

/// Reads the next frame, or `None` at a clean end of stream.
pub fn read_frame<R: Read>(reader: &mut R) -> Result<Option<Frame>> {
    let mut head = [0u8; FRAME_HEADER_LEN];
    let mut filled = 0;
    while filled < FRAME_HEADER_LEN {
        match reader.read(&mut head[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(Error::Format("truncated frame header".into())),
            Ok(k) => filled += k,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    let u64_at = |o: usize| u64::from_le_bytes(head[o..o + 8].try_into().unwrap());
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
    let (a, b, channels, window_len) = (u64_at(8), u64_at(16), u32_at(24), u32_at(28));
    if head[0..8] == EPOCH_MAGIC {
        return Ok(Some(Frame::Epoch {
            epoch: a,
            epoch_size: b,
            channels,
            window_len,
        }));
    }
    if head[0..8] != FRAME_MAGIC {
        return Err(Error::Format("bad frame magic".into()));
    }
    let n = window_len as usize;
    let mut body = vec![0u8; 4 * n * (1 + channels as usize)];
    reader.read_exact(&mut body).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Format("truncated frame body".into()),
        _ => Error::Io(e),
    })?;
    let floats = f32s(&body);
    Ok(Some(Frame::Sample {
        epoch: a,
        index: b,
        channels,
        window_len,
        composite: floats[..n].to_vec(),
        labels: floats[n..].to_vec(),
    }))
}

/// Generates and writes the given epochs to `sink`.
///
/// Frames are produced on a separate thread and handed over through a queue
/// of `queue_depth` frames; a slow sink blocks the producer. A failed write
/// stops generation and yields [`Error::StreamClosed`].
pub fn stream_unlimited<W, I>(config: &StreamConfig, epochs: I, sink: &mut W) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = u64>,
    I::IntoIter: Send,
{
    config.validate()?;
    let (tx, rx) = sync_channel::<Result<Vec<u8>>>(config.queue_depth);
    let epochs = epochs.into_iter();
    thread::scope(|scope| {
        scope.spawn(move || {
            for epoch in epochs {
                if tx.send(Ok(encode_epoch_frame(config, epoch))).is_err() {
                    return;
                }
                for index in 0..config.epoch_size {
                    let frame = epoch_sample(config, epoch, index)
                        .map(|s| encode_sample_frame(epoch, index, &s));
                    let failed = frame.is_err();
                    if tx.send(frame).is_err() || failed {
                        return;
                    }
                }
            }
        });

        let mut outcome = Ok(());
        for frame in rx.iter() {
            let written = frame.and_then(|bytes| sink.write_all(&bytes).map_err(|_| Error::StreamClosed));
            if let Err(e) = written {
                outcome = Err(e);
                break;
            }
        }
        // Dropping the receiver unblocks and stops the producer.
        drop(rx);
        outcome?;
        sink.flush().map_err(|_| Error::StreamClosed)
    })
}

/// Serves epochs over TCP. Each client line names an epoch number to send;
/// `next` sends the epoch after the last one served and `quit` closes the
/// connection. Connections are handled one at a time.
pub fn serve_tcp(config: &StreamConfig, listener: TcpListener, max_connections: Option<usize>) -> Result<()> {
    config.validate()?;
    let mut served = 0;
    for conn in listener.incoming() {
        let conn = conn?;
        let mut writer = io::BufWriter::new(conn.try_clone()?);
        let mut next_epoch = 0u64;
        for line in BufReader::new(conn).lines() {
            let line = match line {
                Ok(l) => l,
                Err(_) => break,
            };
            let request = line.trim();
            let epoch = match request {
                "" => continue,
                "quit" => break,
                "next" => next_epoch,
                other => match other.parse::<u64>() {
                    Ok(e) => e,
                    Err(_) => break,
                },
            };
            if stream_unlimited(config, [epoch], &mut writer).is_err() {
                break;
            }
            next_epoch = epoch.wrapping_add(1);
        }
        served += 1;
        if max_connections.is_some_and(|m| served >= m) {
            break;
        }
    }
    Ok(())
}
