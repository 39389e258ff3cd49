//! Deterministic synthetic time-series generation.
//!
//! Every sample is a convex mix of three standardized components: a rhythm
//! (a sum of sines), a noise series drawn from one of fifteen distributions
//! and smoothed, and a slow trend. Each sample comes with a dense label
//! matrix describing the parameters that produced it, and is a pure function
//! of `(seed, sample_index, window_len, config)`.
//!
//! ```
//! use synthseries::{synthesize, EngineConfig};
//!
//! let s = synthesize(7, 0, 256, &EngineConfig::default()).unwrap();
//! assert_eq!(s.composite.len(), 256);
//! assert_eq!(s.labels.channels(), synthseries::labels::CHANNELS);
//! ```

pub mod config;
pub mod error;
pub mod io;
pub mod labels;
pub mod metrics;
pub mod mixer;
pub mod noise;
pub mod rhythm;
pub mod rng;
pub mod trend;
pub mod types;

pub use config::{EngineConfig, ENGINE_VERSION};
pub use error::{Error, Result};
pub use labels::{denormalize_params, normalize_params, LabelMatrix, LabelSchema, ParamEstimate};
pub use mixer::{compose, synthesize, SynthesisParams, SyntheticSample};
pub use noise::{NoiseCategory, NoiseDistribution, NoiseSpec};
pub use rhythm::{frequency_bounds, RhythmParams, SineComponent, SineCountRange};
pub use trend::{TrendMethod, TrendSpec};
pub use types::{normalize_unit, standardize, MixRatios, SeriesWindow};
