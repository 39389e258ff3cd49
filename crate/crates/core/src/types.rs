//! Shared value types and the min-max maps every generator goes through.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest window the engine accepts. Below this the admissible rhythm band
/// between `1/N` and the Nyquist limit is too narrow to be useful.
pub const MIN_WINDOW_LEN: usize = 8;

/// Sampling period. Every series is indexed by sample number.
pub const SAMPLE_PERIOD: f64 = 1.0;

/// Tolerance on `r_rhythm + r_noise + r_trend = 1`.
pub const RATIO_SUM_TOLERANCE: f64 = 1e-12;

/// A finite, fixed-length window of samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesWindow {
    values: Vec<f64>,
}

impl SeriesWindow {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_WINDOW_LEN {
            return Err(Error::InvalidWindow(format!(
                "window length {} is below the minimum of {MIN_WINDOW_LEN}",
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { values })
    }

    /// Wraps values produced by the engine's own renderers, which are finite
    /// by construction.
    pub(crate) fn from_rendered(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= MIN_WINDOW_LEN);
        debug_assert!(values.iter().all(|v| v.is_finite()));
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sample_period(&self) -> f64 {
        SAMPLE_PERIOD
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Min-max maps the window onto `[-1, 1]`.
    pub fn standardized(&self) -> SeriesWindow {
        Self {
            values: minmax_into(&self.values, -1.0, 1.0),
        }
    }
}

impl Deref for SeriesWindow {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for SeriesWindow {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Contribution weights of the three components. Always on the 2-simplex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixRatios {
    pub rhythm: f64,
    pub noise: f64,
    pub trend: f64,
}

impl MixRatios {
    pub fn new(rhythm: f64, noise: f64, trend: f64) -> Result<Self> {
        let ratios = Self {
            rhythm,
            noise,
            trend,
        };
        ratios.validate()?;
        Ok(ratios)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = self.as_array();
        if parts.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Config(format!(
                "mix ratios must lie in [0, 1], got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > RATIO_SUM_TOLERANCE {
            return Err(Error::Config(format!(
                "mix ratios must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.rhythm, self.noise, self.trend]
    }

    pub fn sum(&self) -> f64 {
        self.rhythm + self.noise + self.trend
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidSeries(format!(
            "non-finite value {} at index {i}",
            values[i]
        ))),
        None => Ok(()),
    }
}

/// Affinely maps `values` so that the minimum lands on `lo` and the maximum on
/// `hi`. A constant input maps to the midpoint of `[lo, hi]`.
pub(crate) fn minmax_into(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let (min, max) = min_max(values);
    let range = max - min;
    if !(range > 0.0) {
        return vec![0.5 * (lo + hi); values.len()];
    }
    let span = hi - lo;
    values
        .iter()
        .map(|&v| {
            // `(v - min) / range` is exactly 0 at the minimum and exactly 1 at
            // the maximum, so the endpoints land on `lo` and `hi` exactly.
            lo + span * ((v - min) / range)
        })
        .collect()
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Min-max standardization onto `[-1, 1]`. Constant input maps to all zeros.
pub fn standardize(series: &[f64]) -> Result<Vec<f64>> {
    check_finite(series)?;
    Ok(minmax_into(series, -1.0, 1.0))
}

/// Min-max normalization onto `[0, 1]`. Constant input maps to all zeros,
/// matching the degenerate rule of the renderers.
pub fn normalize_unit(series: &[f64]) -> Vec<f64> {
    let (min, max) = min_max(series);
    if !(max - min > 0.0) {
        return vec![0.0; series.len()];
    }
    minmax_into(series, 0.0, 1.0)
}
