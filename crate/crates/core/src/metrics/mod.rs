//! Reconstruction metrics: structural dissimilarity, DTW, histogram distance
//! and MSE, plus the DFT used for spectral comparisons.

mod dtw;
mod histogram;
mod spectrum;
mod ssim;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use self::dtw::dtw;
pub use self::histogram::{histogram_distance, DEFAULT_BINS};
pub use self::spectrum::{bin_frequency, dft_magnitude, dft_spectrum};
pub use self::ssim::{ssim, structural_dissimilarity, DEFAULT_WINDOW, DYNAMIC_RANGE};

use crate::error::{Error, Result};

/// Mean squared error.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidSeries("MSE needs non-empty inputs".into()));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Sdl,
    Dtw,
    Dh,
    Mse,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Sdl, Metric::Dtw, Metric::Dh, Metric::Mse];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Sdl => "sdl",
            Metric::Dtw => "dtw",
            Metric::Dh => "dh",
            Metric::Mse => "mse",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}; expected sdl, dtw, dh or mse")))
    }
}

/// Metric hyperparameters. Serialized alongside every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub bins: usize,
    pub win: usize,
    pub band: Option<usize>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            win: DEFAULT_WINDOW,
            band: None,
        }
    }
}

/// Fixed conventions of the metric implementations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricContext {
    #[serde(flatten)]
    pub config: MetricConfig,
    pub dtw_cost: String,
    pub dtw_normalization: String,
    pub ssim_weighting: String,
    pub ssim_dynamic_range: f64,
    pub histogram: String,
}

impl From<MetricConfig> for MetricContext {
    fn from(config: MetricConfig) -> Self {
        Self {
            config,
            dtw_cost: "abs".into(),
            dtw_normalization: "none".into(),
            ssim_weighting: "uniform".into(),
            ssim_dynamic_range: DYNAMIC_RANGE,
            histogram: "l1-shared-range".into(),
        }
    }
}

/// Metric values of one pair, or their means over a batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mse: Option<f64>,
}

impl MetricsReport {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::Sdl => self.sdl,
            Metric::Dtw => self.dtw,
            Metric::Dh => self.dh,
            Metric::Mse => self.mse,
        }
    }

    fn slot(&mut self, metric: Metric) -> &mut Option<f64> {
        match metric {
            Metric::Sdl => &mut self.sdl,
            Metric::Dtw => &mut self.dtw,
            Metric::Dh => &mut self.dh,
            Metric::Mse => &mut self.mse,
        }
    }
}

pub fn evaluate_pair(pred: &[f64], truth: &[f64], metrics: &[Metric], config: &MetricConfig) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    for &m in metrics {
        let value = match m {
            Metric::Sdl => structural_dissimilarity(pred, truth, config.win)?,
            Metric::Dtw => dtw(pred, truth, config.band)?,
            Metric::Dh => histogram_distance(pred, truth, config.bins)?,
            Metric::Mse => mse(pred, truth)?,
        };
        *report.slot(m) = Some(value);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub context: MetricContext,
    pub metrics: Vec<Metric>,
    pub count: usize,
    pub mean: MetricsReport,
    pub pairs: Vec<MetricsReport>,
}

/// Evaluates `preds[i]` against `truths[i]` for every pair, in parallel.
pub fn evaluate_batch<S: AsRef<[f64]> + Sync>(
    preds: &[S],
    truths: &[S],
    metrics: &[Metric],
    config: &MetricConfig,
) -> Result<EvaluationReport> {
    if preds.len() != truths.len() {
        return Err(Error::ShapeMismatch {
            expected: truths.len(),
            actual: preds.len(),
        });
    }
    let pairs = preds
        .par_iter()
        .zip(truths)
        .map(|(p, t)| evaluate_pair(p.as_ref(), t.as_ref(), metrics, config))
        .collect::<Result<Vec<_>>>()?;
    let mut mean = MetricsReport::default();
    if !pairs.is_empty() {
        for &m in metrics {
            let total: f64 = pairs.iter().filter_map(|r| r.get(m)).sum();
            *mean.slot(m) = Some(total / pairs.len() as f64);
        }
    }
    Ok(EvaluationReport {
        context: MetricContext::from(*config),
        metrics: metrics.to_vec(),
        count: pairs.len(),
        mean,
        pairs,
    })
}
