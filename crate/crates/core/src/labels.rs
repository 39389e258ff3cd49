//! Multi-channel label matrix.
//!
//! Every generative parameter of a sample occupies one channel, mapped into
//! `[0, 1]` and broadcast along the time axis, giving a `C × N` matrix aligned
//! with the window. Unused sine slots and unused distribution-parameter slots
//! hold the sentinel `-1`.
//!
//! Channel layout (schema version 1, `K = 10` sine slots, `C = 3K + 13`):
//!
//! | channels        | content                                           |
//! |-----------------|---------------------------------------------------|
//! | `0`             | sine count, `(k - k_min) / (k_max - k_min)`       |
//! | `1 ..= K`       | frequency slot, `(f - f_min) / (f_max - f_min)`   |
//! | `K+1 ..= 2K`    | amplitude slot                                    |
//! | `2K+1 ..= 3K`   | phase slot, `φ / 2π`                              |
//! | `3K+1`          | noise category index / 4                          |
//! | `3K+2`          | noise distribution index / 14                     |
//! | `3K+3 ..= 3K+5` | distribution parameters, affine from their prior  |
//! | `3K+6`          | inversion flag                                    |
//! | `3K+7`          | noise kernel / N                                  |
//! | `3K+8`          | trend method (0 multi-sine, 1 smoothed noise)     |
//! | `3K+9`          | period multiplier or trend kernel, affine         |
//! | `3K+10 ..=3K+12`| ratios (rhythm, noise, trend)                     |

use std::f64::consts::TAU;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::mixer::SynthesisParams;
use crate::noise::{
    max_noise_kernel, NoiseCategory, NoiseDistribution, ParamPrior, MAX_DIST_PARAMS,
};
use crate::rhythm::{frequency_bounds, SineComponent, SineCountRange};
use crate::trend::{trend_kernel_range, TrendMethod, TrendSpec, MAX_PERIOD_MULTIPLIER};
use crate::types::{MixRatios, SAMPLE_PERIOD};

pub const SCHEMA_VERSION: u32 = 1;

/// Number of sine slots in the label schema.
pub const K_MAX: usize = 10;

/// Value of an unused slot.
pub const SENTINEL: f64 = -1.0;

/// Decoded channel medians below this are read as the sentinel.
const SENTINEL_THRESHOLD: f64 = -0.5;

pub const CH_SINE_COUNT: usize = 0;
pub const CH_FREQ: usize = 1;
pub const CH_AMP: usize = CH_FREQ + K_MAX;
pub const CH_PHASE: usize = CH_AMP + K_MAX;
pub const CH_NOISE_CATEGORY: usize = CH_PHASE + K_MAX;
pub const CH_NOISE_DIST: usize = CH_NOISE_CATEGORY + 1;
pub const CH_NOISE_PARAMS: usize = CH_NOISE_DIST + 1;
pub const CH_INVERT: usize = CH_NOISE_PARAMS + MAX_DIST_PARAMS;
pub const CH_NOISE_KERNEL: usize = CH_INVERT + 1;
pub const CH_TREND_METHOD: usize = CH_NOISE_KERNEL + 1;
pub const CH_TREND_SHAPE: usize = CH_TREND_METHOD + 1;
pub const CH_RATIOS: usize = CH_TREND_SHAPE + 1;
pub const CHANNELS: usize = CH_RATIOS + 3;

/// Ordered channel identifiers of the current schema.
pub fn channel_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut names = vec!["sine_count".to_string()];
        for prefix in ["frequency", "amplitude", "phase"] {
            names.extend((1..=K_MAX).map(|i| format!("{prefix}_{i:02}")));
        }
        names.push("noise_category".into());
        names.push("noise_distribution".into());
        names.extend((1..=MAX_DIST_PARAMS).map(|i| format!("noise_param_{i}")));
        for name in [
            "noise_invert",
            "noise_kernel",
            "trend_method",
            "trend_shape",
            "ratio_rhythm",
            "ratio_noise",
            "ratio_trend",
        ] {
            names.push(name.into());
        }
        debug_assert_eq!(names.len(), CHANNELS);
        names
    })
}

/// Ranges the affine channel maps are relative to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelSchema {
    pub k_range: SineCountRange,
    pub max_noise_kernel_frac: f64,
    pub trend_kernel_frac: (f64, f64),
}

impl LabelSchema {
    pub fn from_config(config: &EngineConfig) -> Self {
        Self {
            k_range: config.k_range,
            max_noise_kernel_frac: config.max_noise_kernel_frac,
            trend_kernel_frac: config.trend_kernel_frac,
        }
    }
}

impl Default for LabelSchema {
    fn default() -> Self {
        Self::from_config(&EngineConfig::default())
    }
}

/// Row-major `C × N` label matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    schema_version: u32,
    window_len: usize,
    values: Vec<f64>,
}

impl LabelMatrix {
    /// Wraps a row-major matrix, e.g. a model prediction, for decoding.
    pub fn from_values(window_len: usize, values: Vec<f64>) -> Result<Self> {
        if window_len == 0 || values.len() != CHANNELS * window_len {
            return Err(Error::ShapeMismatch {
                expected: CHANNELS * window_len,
                actual: values.len(),
            });
        }
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            window_len,
            values,
        })
    }

    pub fn schema_version(&self) -> u32 {
        self.schema_version
    }

    pub fn channels(&self) -> usize {
        CHANNELS
    }

    pub fn channel_names(&self) -> &'static [String] {
        channel_names()
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.values[channel * self.window_len..(channel + 1) * self.window_len]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.window_len)
    }
}

fn unit_map(value: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (value - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn unit_unmap(v: f64, lo: f64, hi: f64) -> f64 {
    lo + v * (hi - lo)
}

fn prior_map(value: f64, p: &ParamPrior) -> f64 {
    unit_map(value, p.low, p.high)
}

/// Encodes `params` into the broadcast label matrix.
pub fn normalize_params(params: &SynthesisParams, schema: &LabelSchema) -> Result<LabelMatrix> {
    let n = params.window_len;
    let (f_min, f_max) = frequency_bounds(n, SAMPLE_PERIOD)?;
    let mut scalars = [SENTINEL; CHANNELS];

    let k = params.rhythm.sine_count();
    if !schema.k_range.contains(k) || k > K_MAX {
        return Err(Error::SchemaViolation(format!(
            "sine count {k} outside [{}, {}] or above {K_MAX} slots",
            schema.k_range.min, schema.k_range.max
        )));
    }
    scalars[CH_SINE_COUNT] = unit_map(k as f64, schema.k_range.min as f64, schema.k_range.max as f64);
    for (slot, c) in params.rhythm.components.iter().enumerate() {
        scalars[CH_FREQ + slot] = unit_map(c.frequency, f_min, f_max);
        scalars[CH_AMP + slot] = c.amplitude;
        scalars[CH_PHASE + slot] = c.phase / TAU;
    }

    let noise = &params.noise;
    scalars[CH_NOISE_CATEGORY] = noise.category().index() as f64 / (NoiseCategory::ALL.len() - 1) as f64;
    scalars[CH_NOISE_DIST] = noise.distribution.index() as f64 / (NoiseDistribution::ALL.len() - 1) as f64;
    let priors = noise.distribution.priors();
    if noise.params.len() != priors.len() {
        return Err(Error::SchemaViolation(format!(
            "{} expects {} parameters, got {}",
            noise.distribution,
            priors.len(),
            noise.params.len()
        )));
    }
    for (i, (value, p)) in noise.params.iter().zip(priors).enumerate() {
        scalars[CH_NOISE_PARAMS + i] = prior_map(*value, p);
    }
    scalars[CH_INVERT] = if noise.invert { 1.0 } else { 0.0 };
    let kernel_cap = max_noise_kernel(n, schema.max_noise_kernel_frac);
    if noise.smooth_kernel < 1 || noise.smooth_kernel > kernel_cap {
        return Err(Error::SchemaViolation(format!(
            "noise kernel {} outside [1, {kernel_cap}]",
            noise.smooth_kernel
        )));
    }
    scalars[CH_NOISE_KERNEL] = noise.smooth_kernel as f64 / n as f64;

    scalars[CH_TREND_METHOD] = params.trend.method().index() as f64;
    scalars[CH_TREND_SHAPE] = match &params.trend {
        TrendSpec::MultiSine {
            period_multiplier, ..
        } => unit_map(*period_multiplier, 1.0, MAX_PERIOD_MULTIPLIER),
        TrendSpec::SmoothedNoise { inner } => {
            let (lo, hi) = trend_kernel_range(n, schema.trend_kernel_frac);
            if !(lo..=hi).contains(&inner.smooth_kernel) {
                return Err(Error::SchemaViolation(format!(
                    "trend kernel {} outside [{lo}, {hi}]",
                    inner.smooth_kernel
                )));
            }
            unit_map(inner.smooth_kernel as f64, lo as f64, hi as f64)
        }
    };

    let ratios = params.ratios.as_array();
    scalars[CH_RATIOS..CH_RATIOS + 3].copy_from_slice(&ratios);

    for (ch, v) in scalars.iter().enumerate() {
        if !(-1.0..=1.0).contains(v) {
            return Err(Error::SchemaViolation(format!(
                "channel {} ({}) = {v} outside [-1, 1]",
                ch,
                channel_names()[ch]
            )));
        }
        let is_sentinel = *v == SENTINEL;
        let optional = (CH_FREQ..CH_NOISE_CATEGORY).contains(&ch)
            || (CH_NOISE_PARAMS..CH_INVERT).contains(&ch);
        if !(0.0..=1.0).contains(v) && !(is_sentinel && optional) {
            return Err(Error::SchemaViolation(format!(
                "channel {} ({}) = {v} outside [0, 1]",
                ch,
                channel_names()[ch]
            )));
        }
    }

    let mut values = Vec::with_capacity(CHANNELS * n);
    for v in scalars {
        values.resize(values.len() + n, v);
    }
    Ok(LabelMatrix {
        schema_version: SCHEMA_VERSION,
        window_len: n,
        values,
    })
}

/// Parameters recovered from a label matrix.
///
/// Only what the schema records is recovered: trend sine components and the
/// inner distribution of a smoothed-noise trend are not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamEstimate {
    pub sine_count: usize,
    /// Sines of the occupied slots, in slot order.
    pub sines: Vec<SineComponent>,
    pub noise_category: NoiseCategory,
    pub noise_distribution: NoiseDistribution,
    pub noise_params: Vec<f64>,
    pub invert: bool,
    pub noise_kernel: usize,
    pub trend_method: TrendMethod,
    pub period_multiplier: Option<f64>,
    pub trend_kernel: Option<usize>,
    /// Raw ratio estimates; not renormalized.
    pub ratios: MixRatios,
}

/// Median over the finite entries of `row`.
fn row_median(row: &[f64], channel: usize) -> Result<f64> {
    let mut finite: Vec<f64> = row.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return Err(Error::Decode {
            channel,
            name: channel_names()[channel].clone(),
            reason: "no finite values".into(),
        });
    }
    finite.sort_unstable_by(f64::total_cmp);
    let mid = finite.len() / 2;
    Ok(if finite.len() % 2 == 1 {
        finite[mid]
    } else {
        0.5 * (finite[mid - 1] + finite[mid])
    })
}

fn round_index(v: f64, levels: usize) -> usize {
    let scaled = (v.clamp(0.0, 1.0) * (levels - 1) as f64).round();
    scaled as usize
}

/// Decodes a (possibly noisy) label matrix from per-channel time medians.
pub fn denormalize_params(matrix: &LabelMatrix, schema: &LabelSchema) -> Result<ParamEstimate> {
    if matrix.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaViolation(format!(
            "label schema version {} is not supported",
            matrix.schema_version
        )));
    }
    let n = matrix.window_len;
    let (f_min, f_max) = frequency_bounds(n, SAMPLE_PERIOD)?;
    let medians = (0..CHANNELS)
        .map(|c| row_median(matrix.row(c), c))
        .collect::<Result<Vec<f64>>>()?;

    let k_span = schema.k_range.max - schema.k_range.min;
    let sine_count = schema.k_range.min + round_index(medians[CH_SINE_COUNT], k_span + 1);
    let sines = (0..K_MAX)
        .filter(|slot| medians[CH_FREQ + slot] >= SENTINEL_THRESHOLD)
        .map(|slot| SineComponent {
            frequency: unit_unmap(medians[CH_FREQ + slot].clamp(0.0, 1.0), f_min, f_max),
            amplitude: medians[CH_AMP + slot].clamp(0.0, 1.0),
            phase: medians[CH_PHASE + slot].clamp(0.0, 1.0) * TAU,
        })
        .collect();

    let noise_category = NoiseCategory::ALL[round_index(medians[CH_NOISE_CATEGORY], NoiseCategory::ALL.len())];
    let noise_distribution =
        NoiseDistribution::ALL[round_index(medians[CH_NOISE_DIST], NoiseDistribution::ALL.len())];
    let noise_params = noise_distribution
        .priors()
        .iter()
        .enumerate()
        .map(|(i, p)| unit_unmap(medians[CH_NOISE_PARAMS + i].clamp(0.0, 1.0), p.low, p.high))
        .collect();
    let invert = medians[CH_INVERT] >= 0.5;
    let noise_kernel = ((medians[CH_NOISE_KERNEL] * n as f64).round().max(1.0) as usize).min(n);

    let shape = medians[CH_TREND_SHAPE].clamp(0.0, 1.0);
    let (trend_method, period_multiplier, trend_kernel) = if medians[CH_TREND_METHOD] >= 0.5 {
        let (lo, hi) = trend_kernel_range(n, schema.trend_kernel_frac);
        let kernel = lo + round_index(shape, hi - lo + 1);
        (TrendMethod::SmoothedNoise, None, Some(kernel))
    } else {
        let m = unit_unmap(shape, 1.0, MAX_PERIOD_MULTIPLIER);
        (TrendMethod::MultiSine, Some(m), None)
    };

    Ok(ParamEstimate {
        sine_count,
        sines,
        noise_category,
        noise_distribution,
        noise_params,
        invert,
        noise_kernel,
        trend_method,
        period_multiplier,
        trend_kernel,
        ratios: MixRatios {
            rhythm: medians[CH_RATIOS],
            noise: medians[CH_RATIOS + 1],
            trend: medians[CH_RATIOS + 2],
        },
    })
}
