//! Trend component: either a few long-period sines or heavily smoothed noise.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{kernel_at_least, render_noise, NoiseSpec};
use crate::rhythm::{superpose, SineComponent};
use crate::rng::RandomStream;
use crate::types::{normalize_unit, SeriesWindow, MIN_WINDOW_LEN};

pub const TREND_MIN_SINES: usize = 1;
pub const TREND_MAX_SINES: usize = 3;

/// Upper end of the period multiplier; the lower end (1) is exclusive.
pub const MAX_PERIOD_MULTIPLIER: f64 = 8.0;

/// Default smoothing kernel range of the noise branch, as fractions of `N`.
pub const DEFAULT_TREND_KERNEL_FRAC: (f64, f64) = (0.2, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrendMethod {
    MultiSine,
    SmoothedNoise,
}

impl TrendMethod {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method")]
pub enum TrendSpec {
    MultiSine {
        components: Vec<SineComponent>,
        period_multiplier: f64,
    },
    SmoothedNoise {
        inner: NoiseSpec,
    },
}

impl TrendSpec {
    pub fn method(&self) -> TrendMethod {
        match self {
            TrendSpec::MultiSine { .. } => TrendMethod::MultiSine,
            TrendSpec::SmoothedNoise { .. } => TrendMethod::SmoothedNoise,
        }
    }

    pub fn validate(&self, window_len: usize) -> Result<()> {
        if window_len < MIN_WINDOW_LEN {
            return Err(Error::InvalidWindow(format!(
                "window length {window_len} is below the minimum of {MIN_WINDOW_LEN}"
            )));
        }
        match self {
            TrendSpec::MultiSine {
                components,
                period_multiplier,
            } => {
                if !(TREND_MIN_SINES..=TREND_MAX_SINES).contains(&components.len()) {
                    return Err(Error::Config(format!(
                        "trend sine count {} outside [{TREND_MIN_SINES}, {TREND_MAX_SINES}]",
                        components.len()
                    )));
                }
                let m = *period_multiplier;
                if !(m > 1.0 && m <= MAX_PERIOD_MULTIPLIER) {
                    return Err(Error::Config(format!(
                        "period multiplier {m} outside (1, {MAX_PERIOD_MULTIPLIER}]"
                    )));
                }
                let f_cap = 1.0 / window_len as f64;
                for (i, c) in components.iter().enumerate() {
                    if !(c.frequency > 0.0 && c.frequency < f_cap) {
                        return Err(Error::Config(format!(
                            "trend sine {i}: frequency {} must lie in (0, 1/N = {f_cap})",
                            c.frequency
                        )));
                    }
                    if !(0.0..=1.0).contains(&c.amplitude) || !(0.0..TAU).contains(&c.phase) {
                        return Err(Error::Config(format!(
                            "trend sine {i}: amplitude {} or phase {} out of range",
                            c.amplitude, c.phase
                        )));
                    }
                }
                Ok(())
            }
            TrendSpec::SmoothedNoise { inner } => inner.validate(window_len),
        }
    }
}

/// Kernel range `[ceil(lo·N), ceil(hi·N)]` of the smoothed-noise branch.
pub fn trend_kernel_range(window_len: usize, kernel_frac: (f64, f64)) -> (usize, usize) {
    (
        kernel_at_least(window_len, kernel_frac.0),
        kernel_at_least(window_len, kernel_frac.1),
    )
}

pub fn sample_trend_spec(
    window_len: usize,
    rng: &mut RandomStream,
    kernel_frac: (f64, f64),
) -> Result<TrendSpec> {
    if window_len < MIN_WINDOW_LEN {
        return Err(Error::InvalidWindow(format!(
            "window length {window_len} is below the minimum of {MIN_WINDOW_LEN}"
        )));
    }
    let (lo, hi) = kernel_frac;
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::Config(format!(
            "trend kernel fractions ({lo}, {hi}) must satisfy 0 < lo <= hi <= 1"
        )));
    }
    if rng.random_bool(0.5) {
        let (k_lo, k_hi) = trend_kernel_range(window_len, kernel_frac);
        return Ok(TrendSpec::SmoothedNoise {
            inner: NoiseSpec::sample_with_kernel(rng, k_lo..=k_hi),
        });
    }

    let f_hi = 1.0 / window_len as f64;
    let f_lo = f_hi / 4.0;
    let count = rng.random_range(TREND_MIN_SINES..=TREND_MAX_SINES);
    // 8 - 7u for u in [0, 1) covers (1, 8].
    let period_multiplier =
        MAX_PERIOD_MULTIPLIER - (MAX_PERIOD_MULTIPLIER - 1.0) * rng.random::<f64>();
    let components = (0..count)
        .map(|_| SineComponent {
            frequency: rng.random_range(f_lo..=f_hi) / period_multiplier,
            amplitude: rng.random_range(0.0..=1.0),
            phase: rng.random_range(0.0..TAU),
        })
        .collect();
    Ok(TrendSpec::MultiSine {
        components,
        period_multiplier,
    })
}

/// Renders the trend in `[0, 1]`. Only the smoothed-noise branch draws from
/// `rng`.
pub fn render_trend(spec: &TrendSpec, window_len: usize, rng: &mut RandomStream) -> Result<SeriesWindow> {
    spec.validate(window_len)?;
    match spec {
        TrendSpec::MultiSine { components, .. } => {
            let raw = superpose(components, window_len);
            Ok(SeriesWindow::from_rendered(normalize_unit(&raw)))
        }
        TrendSpec::SmoothedNoise { inner } => render_noise(inner, window_len, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn multisine_draws_stay_below_one_cycle() {
        let mut rng = seeded_rng(4, 4);
        let mut seen = 0;
        for _ in 0..2000 {
            if let TrendSpec::MultiSine { components, period_multiplier } =
                sample_trend_spec(256, &mut rng, DEFAULT_TREND_KERNEL_FRAC).unwrap()
            {
                seen += 1;
                assert!(period_multiplier > 1.0 && period_multiplier <= 8.0);
                assert!(components.iter().all(|c| c.frequency < 1.0 / 256.0));
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn smoothed_noise_kernel_range_n100() {
        assert_eq!(trend_kernel_range(100, DEFAULT_TREND_KERNEL_FRAC), (20, 50));
        let mut rng = seeded_rng(4, 5);
        for _ in 0..2000 {
            if let TrendSpec::SmoothedNoise { inner } =
                sample_trend_spec(100, &mut rng, DEFAULT_TREND_KERNEL_FRAC).unwrap()
            {
                assert!((20..=50).contains(&inner.smooth_kernel));
            }
        }
    }

    #[test]
    fn rejects_fast_trend_sine() {
        let spec = TrendSpec::MultiSine {
            components: vec![SineComponent { frequency: 1.0 / 64.0, amplitude: 1.0, phase: 0.0 }],
            period_multiplier: 2.0,
        };
        assert!(spec.validate(64).is_err());
        let spec = TrendSpec::MultiSine {
            components: vec![SineComponent { frequency: 1.0 / 128.0, amplitude: 1.0, phase: 0.0 }],
            period_multiplier: 1.0,
        };
        assert!(spec.validate(64).is_err());
    }

    #[test]
    fn rejects_bad_fractions() {
        let mut rng = seeded_rng(0, 0);
        assert!(sample_trend_spec(64, &mut rng, (0.5, 0.2)).is_err());
        assert!(sample_trend_spec(64, &mut rng, (0.0, 0.2)).is_err());
    }
}
