//! Multi-source rhythm: a normalized superposition of random sines.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::types::{normalize_unit, SeriesWindow, MIN_WINDOW_LEN, SAMPLE_PERIOD};

/// Engine limit on the number of superposed sines.
pub const MAX_SINE_COUNT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineComponent {
    /// Cycles per sample.
    pub frequency: f64,
    pub amplitude: f64,
    /// Radians in `[0, 2π)`.
    pub phase: f64,
}

impl SineComponent {
    pub fn at(&self, n: usize) -> f64 {
        self.amplitude * (TAU * self.frequency * n as f64 + self.phase).sin()
    }
}

/// Inclusive range of sine counts to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SineCountRange {
    pub min: usize,
    pub max: usize,
}

impl SineCountRange {
    pub const fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min < 1 || self.max > MAX_SINE_COUNT || self.min > self.max {
            return Err(Error::Config(format!(
                "sine count range [{}, {}] must satisfy 1 <= min <= max <= {MAX_SINE_COUNT}",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.min..=self.max).contains(&k)
    }
}

impl Default for SineCountRange {
    fn default() -> Self {
        Self::new(3, 10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhythmParams {
    pub components: Vec<SineComponent>,
}

impl RhythmParams {
    pub fn sine_count(&self) -> usize {
        self.components.len()
    }

    pub fn validate(&self, window_len: usize) -> Result<()> {
        let (f_min, f_max) = frequency_bounds(window_len, SAMPLE_PERIOD)?;
        let k = self.sine_count();
        if !(1..=MAX_SINE_COUNT).contains(&k) {
            return Err(Error::Config(format!("sine count {k} outside [1, {MAX_SINE_COUNT}]")));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !(f_min..=f_max).contains(&c.frequency) {
                return Err(Error::Config(format!(
                    "sine {i}: frequency {} outside [{f_min}, {f_max}]",
                    c.frequency
                )));
            }
            if !(0.0..=1.0).contains(&c.amplitude) {
                return Err(Error::Config(format!(
                    "sine {i}: amplitude {} outside [0, 1]",
                    c.amplitude
                )));
            }
            if !(0.0..TAU).contains(&c.phase) {
                return Err(Error::Config(format!(
                    "sine {i}: phase {} outside [0, 2pi)",
                    c.phase
                )));
            }
        }
        Ok(())
    }
}

/// Admissible rhythm band `(1/N, 1/(2t))`: one cycle per window up to Nyquist.
pub fn frequency_bounds(window_len: usize, sample_period: f64) -> Result<(f64, f64)> {
    if !(sample_period > 0.0) || !sample_period.is_finite() {
        return Err(Error::InvalidWindow(format!(
            "sample period must be positive, got {sample_period}"
        )));
    }
    if window_len == 0 {
        return Err(Error::InvalidWindow("window length is zero".into()));
    }
    let f_min = 1.0 / window_len as f64;
    let f_max = 1.0 / (2.0 * sample_period);
    if f_min >= f_max {
        return Err(Error::InvalidWindow(format!(
            "window length {window_len} leaves an empty band: f_min {f_min} >= f_max {f_max}"
        )));
    }
    if window_len < MIN_WINDOW_LEN {
        return Err(Error::InvalidWindow(format!(
            "window length {window_len} is below the minimum of {MIN_WINDOW_LEN}"
        )));
    }
    Ok((f_min, f_max))
}

pub fn sample_rhythm_params(
    window_len: usize,
    rng: &mut RandomStream,
    k_range: SineCountRange,
) -> Result<RhythmParams> {
    k_range.validate()?;
    let (f_min, f_max) = frequency_bounds(window_len, SAMPLE_PERIOD)?;
    let k = rng.random_range(k_range.min..=k_range.max);
    let components = (0..k)
        .map(|_| SineComponent {
            frequency: rng.random_range(f_min..=f_max),
            amplitude: rng.random_range(0.0..=1.0),
            phase: rng.random_range(0.0..TAU),
        })
        .collect();
    Ok(RhythmParams { components })
}

/// Raw superposition `Σ a·sin(2π f n + φ)` for `n = 0..len`.
pub(crate) fn superpose(components: &[SineComponent], len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| components.iter().map(|c| c.at(n)).sum())
        .collect()
}

/// Renders the rhythm min-max normalized to `[0, 1]`.
pub fn render_rhythm(params: &RhythmParams, window_len: usize) -> Result<SeriesWindow> {
    params.validate(window_len)?;
    let raw = superpose(&params.components, window_len);
    Ok(SeriesWindow::from_rendered(normalize_unit(&raw)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn bounds_for_typical_windows() {
        assert_eq!(frequency_bounds(64, 1.0).unwrap(), (0.015625, 0.5));
        assert_eq!(frequency_bounds(1000, 1.0).unwrap(), (0.001, 0.5));
    }

    #[test]
    fn bounds_collapse_is_rejected() {
        assert!(matches!(frequency_bounds(2, 1.0), Err(Error::InvalidWindow(_))));
        assert!(matches!(frequency_bounds(4, 1.0), Err(Error::InvalidWindow(_))));
        assert!(matches!(frequency_bounds(64, 0.0), Err(Error::InvalidWindow(_))));
    }

    #[test]
    fn single_sine_renders_to_shifted_sine() {
        let params = RhythmParams {
            components: vec![SineComponent {
                frequency: 4.0 / 64.0,
                amplitude: 1.0,
                phase: 0.0,
            }],
        };
        let out = render_rhythm(&params, 64).unwrap();
        for (n, v) in out.iter().enumerate() {
            let expected = ((TAU * 4.0 * n as f64 / 64.0).sin() + 1.0) / 2.0;
            assert!((v - expected).abs() < 1e-12, "n={n}: {v} vs {expected}");
        }
    }

    #[test]
    fn two_sines_match_pointwise_evaluation() {
        let params = RhythmParams {
            components: vec![
                SineComponent { frequency: 0.1, amplitude: 0.5, phase: 0.0 },
                SineComponent { frequency: 0.25, amplitude: 1.0, phase: FRAC_PI_2 },
            ],
        };
        let out = render_rhythm(&params, 128).unwrap();
        let raw: Vec<f64> = (0..128)
            .map(|n| {
                let t = n as f64;
                0.5 * (2.0 * PI * 0.1 * t).sin() + (2.0 * PI * 0.25 * t + PI / 2.0).sin()
            })
            .collect();
        let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (v, r) in out.iter().zip(&raw) {
            assert!((v - (r - lo) / (hi - lo)).abs() < 1e-12);
        }
    }

    #[test]
    fn lowest_frequency_spans_one_cycle() {
        let n = 64;
        let params = RhythmParams {
            components: vec![SineComponent {
                frequency: 1.0 / n as f64,
                amplitude: 1.0,
                phase: 0.0,
            }],
        };
        let out = render_rhythm(&params, n).unwrap();
        assert!(out.contains(&0.0));
        assert!(out.contains(&1.0));
        // The first half-window is the positive lobe, the second the negative one.
        assert!(out[n / 4] > out[3 * n / 4]);
    }

    #[test]
    fn sampled_params_respect_ranges() {
        let mut rng = seeded_rng(5, 0);
        for _ in 0..500 {
            let p = sample_rhythm_params(256, &mut rng, SineCountRange::default()).unwrap();
            assert!((3..=10).contains(&p.sine_count()));
            p.validate(256).unwrap();
        }
    }

    #[test]
    fn rejects_bad_k_range() {
        let mut rng = seeded_rng(5, 0);
        assert!(sample_rhythm_params(64, &mut rng, SineCountRange::new(0, 3)).is_err());
        assert!(sample_rhythm_params(64, &mut rng, SineCountRange::new(4, 33)).is_err());
        assert!(sample_rhythm_params(64, &mut rng, SineCountRange::new(5, 4)).is_err());
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut rng = seeded_rng(8, 2);
        let p = sample_rhythm_params(200, &mut rng, SineCountRange::default()).unwrap();
        let a = render_rhythm(&p, 200).unwrap();
        let b = render_rhythm(&p, 200).unwrap();
        assert!(a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
