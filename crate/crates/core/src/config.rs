use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::K_MAX;
use crate::noise::DEFAULT_MAX_KERNEL_FRAC;
use crate::rhythm::SineCountRange;
use crate::trend::DEFAULT_TREND_KERNEL_FRAC;

/// Version of the generator. Together with a manifest it pins every sample.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Knobs of the synthesis engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub k_range: SineCountRange,
    /// Noise smoothing kernel cap as a fraction of the window length.
    pub max_noise_kernel_frac: f64,
    /// Smoothed-noise trend kernel range as fractions of the window length.
    pub trend_kernel_frac: (f64, f64),
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            k_range: SineCountRange::default(),
            max_noise_kernel_frac: DEFAULT_MAX_KERNEL_FRAC,
            trend_kernel_frac: DEFAULT_TREND_KERNEL_FRAC,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.k_range.validate()?;
        if self.k_range.max > K_MAX {
            return Err(Error::Config(format!(
                "sine count {} exceeds the {K_MAX} label slots",
                self.k_range.max
            )));
        }
        let noise = self.max_noise_kernel_frac;
        if !(noise > 0.0 && noise <= 1.0) {
            return Err(Error::Config(format!(
                "noise kernel fraction {noise} outside (0, 1]"
            )));
        }
        let (lo, hi) = self.trend_kernel_frac;
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::Config(format!(
                "trend kernel fractions ({lo}, {hi}) must satisfy 0 < lo <= hi <= 1"
            )));
        }
        // Noise and trend smoothing scales must not overlap.
        if lo <= noise {
            return Err(Error::Config(format!(
                "trend kernel fraction {lo} must exceed the noise kernel fraction {noise}"
            )));
        }
        Ok(())
    }
}
