//! Noise component.
//!
//! A [`NoiseSpec`] picks one of fifteen distributions (grouped into five
//! categories) and draws its parameters from a fixed prior. Rendering then
//! runs a fixed pipeline:
//!
//! 1. draw `N` i.i.d. samples and winsorize them at the 0.1% / 99.9% batch
//!    quantiles,
//! 2. min-max normalize to `[0, 1]`,
//! 3. optionally reflect `y -> 1 - y`,
//! 4. smooth with a centered boxcar of width `smooth_kernel` (edge replicated),
//! 5. min-max normalize to `[0, 1]` again.
//!
//! The roster and the priors are a versioned contract ([`ROSTER_VERSION`]):
//! label channels and stored datasets depend on both.

use std::fmt;
use std::ops::RangeInclusive;

use rand::distr::{Distribution as _, Open01};
use rand::Rng;
use rand_distr as rd;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::types::{min_max, normalize_unit, SeriesWindow, MIN_WINDOW_LEN};

pub const ROSTER_VERSION: &str = "noise-roster-v1";

/// Winsorization quantiles applied to every raw batch.
pub const WINSOR_LOW: f64 = 0.001;
pub const WINSOR_HIGH: f64 = 0.999;

/// Default cap on the noise smoothing kernel as a fraction of the window.
pub const DEFAULT_MAX_KERNEL_FRAC: f64 = 0.05;

/// Absorbs representation error in `frac * N` before rounding.
const KERNEL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseCategory {
    /// Common continuous distributions.
    Ccd,
    /// Common discrete distributions.
    Cdd,
    /// Heavy-tailed distributions.
    Htd,
    /// Distributions related to the normal distribution.
    Drnd,
    /// Shape-parameter distributions.
    Spd,
}

impl NoiseCategory {
    pub const ALL: [NoiseCategory; 5] = [
        NoiseCategory::Ccd,
        NoiseCategory::Cdd,
        NoiseCategory::Htd,
        NoiseCategory::Drnd,
        NoiseCategory::Spd,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseDistribution {
    Uniform,
    Normal,
    Exponential,
    Bernoulli,
    Geometric,
    Poisson,
    Laplace,
    Cauchy,
    Pareto,
    StudentT,
    ChiSquared,
    LogNormal,
    Beta,
    Gamma,
    Weibull,
}

/// A named parameter and the interval its prior is uniform over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPrior {
    pub name: &'static str,
    pub low: f64,
    pub high: f64,
}

const fn prior(name: &'static str, low: f64, high: f64) -> ParamPrior {
    ParamPrior { name, low, high }
}

const PROBABILITY: ParamPrior = prior("p", 0.05, 0.95);
const RATE: ParamPrior = prior("lambda", 0.5, 20.0);
const SIGMA: ParamPrior = prior("sigma", 0.5, 2.0);
const SHAPE: ParamPrior = prior("shape", 0.5, 5.0);
const SCALE: ParamPrior = prior("scale", 0.5, 2.0);
const T_DOF: ParamPrior = prior("dof", 2.5, 30.0);
const CHI_DOF: ParamPrior = prior("dof", 1.0, 10.0);
const ALPHA: ParamPrior = prior("alpha", 0.5, 5.0);
const BETA: ParamPrior = prior("beta", 0.5, 5.0);

/// Most parameters any roster member carries.
pub const MAX_DIST_PARAMS: usize = 3;

impl NoiseDistribution {
    pub const ALL: [NoiseDistribution; 15] = [
        NoiseDistribution::Uniform,
        NoiseDistribution::Normal,
        NoiseDistribution::Exponential,
        NoiseDistribution::Bernoulli,
        NoiseDistribution::Geometric,
        NoiseDistribution::Poisson,
        NoiseDistribution::Laplace,
        NoiseDistribution::Cauchy,
        NoiseDistribution::Pareto,
        NoiseDistribution::StudentT,
        NoiseDistribution::ChiSquared,
        NoiseDistribution::LogNormal,
        NoiseDistribution::Beta,
        NoiseDistribution::Gamma,
        NoiseDistribution::Weibull,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Roster members are stored in category blocks of three.
    pub fn category(self) -> NoiseCategory {
        NoiseCategory::ALL[self.index() / 3]
    }

    /// Priors of the randomized parameters, in storage order. Location
    /// parameters are fixed at zero and not listed.
    pub fn priors(self) -> &'static [ParamPrior] {
        use NoiseDistribution::*;
        match self {
            Uniform => &[],
            Normal | Laplace | LogNormal => &[SIGMA],
            Cauchy => &[SCALE],
            Exponential | Poisson => &[RATE],
            Bernoulli | Geometric => &[PROBABILITY],
            Pareto | Gamma | Weibull => &[SHAPE, SCALE],
            StudentT => &[T_DOF],
            ChiSquared => &[CHI_DOF],
            Beta => &[ALPHA, BETA],
        }
    }

    pub fn param_count(self) -> usize {
        self.priors().len()
    }

    pub fn name(self) -> &'static str {
        use NoiseDistribution::*;
        match self {
            Uniform => "uniform",
            Normal => "normal",
            Exponential => "exponential",
            Bernoulli => "bernoulli",
            Geometric => "geometric",
            Poisson => "poisson",
            Laplace => "laplace",
            Cauchy => "cauchy",
            Pareto => "pareto",
            StudentT => "student_t",
            ChiSquared => "chi_squared",
            LogNormal => "log_normal",
            Beta => "beta",
            Gamma => "gamma",
            Weibull => "weibull",
        }
    }

    /// Draws `n` i.i.d. samples. `params` must already be validated.
    fn draw(self, params: &[f64], n: usize, rng: &mut RandomStream) -> Vec<f64> {
        use NoiseDistribution::*;
        // Parameters come from validated priors, so constructors cannot fail.
        const OK: &str = "parameters validated against prior";
        match self {
            Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
            Normal => sample_n(rd::Normal::new(0.0, params[0]).expect(OK), n, rng),
            Exponential => sample_n(rd::Exp::new(params[0]).expect(OK), n, rng),
            Bernoulli => {
                let d = rd::Bernoulli::new(params[0]).expect(OK);
                (0..n).map(|_| if d.sample(rng) { 1.0 } else { 0.0 }).collect()
            }
            Geometric => {
                let d = rd::Geometric::new(params[0]).expect(OK);
                (0..n).map(|_| d.sample(rng) as f64).collect()
            }
            Poisson => sample_n(rd::Poisson::new(params[0]).expect(OK), n, rng),
            Laplace => {
                let scale = params[0];
                (0..n)
                    .map(|_| {
                        // Inverse CDF on u in (-1/2, 1/2).
                        let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
                        -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
                    })
                    .collect()
            }
            Cauchy => sample_n(rd::Cauchy::new(0.0, params[0]).expect(OK), n, rng),
            Pareto => sample_n(rd::Pareto::new(params[1], params[0]).expect(OK), n, rng),
            StudentT => sample_n(rd::StudentT::new(params[0]).expect(OK), n, rng),
            ChiSquared => sample_n(rd::ChiSquared::new(params[0]).expect(OK), n, rng),
            LogNormal => sample_n(rd::LogNormal::new(0.0, params[0]).expect(OK), n, rng),
            Beta => sample_n(rd::Beta::new(params[0], params[1]).expect(OK), n, rng),
            Gamma => sample_n(rd::Gamma::new(params[0], params[1]).expect(OK), n, rng),
            Weibull => sample_n(rd::Weibull::new(params[1], params[0]).expect(OK), n, rng),
        }
    }
}

impl fmt::Display for NoiseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn sample_n<D: rand::distr::Distribution<f64>>(d: D, n: usize, rng: &mut RandomStream) -> Vec<f64> {
    d.sample_iter(rng).take(n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub distribution: NoiseDistribution,
    /// Randomized parameters in the order of [`NoiseDistribution::priors`].
    pub params: Vec<f64>,
    pub invert: bool,
    pub smooth_kernel: usize,
}

impl NoiseSpec {
    pub fn category(&self) -> NoiseCategory {
        self.distribution.category()
    }

    pub fn validate(&self, window_len: usize) -> Result<()> {
        let priors = self.distribution.priors();
        if self.params.len() != priors.len() {
            return Err(Error::Config(format!(
                "{} takes {} parameters, got {}",
                self.distribution,
                priors.len(),
                self.params.len()
            )));
        }
        for (value, p) in self.params.iter().zip(priors) {
            if !(p.low..=p.high).contains(value) {
                return Err(Error::Config(format!(
                    "{} parameter {} = {value} outside [{}, {}]",
                    self.distribution, p.name, p.low, p.high
                )));
            }
        }
        if self.smooth_kernel < 1 || self.smooth_kernel > window_len {
            return Err(Error::Config(format!(
                "smoothing kernel {} outside [1, {window_len}]",
                self.smooth_kernel
            )));
        }
        Ok(())
    }

    /// Draws a spec with the smoothing kernel uniform over `kernel`.
    pub(crate) fn sample_with_kernel(rng: &mut RandomStream, kernel: RangeInclusive<usize>) -> Self {
        let distribution = NoiseDistribution::ALL[rng.random_range(0..NoiseDistribution::ALL.len())];
        let params = distribution
            .priors()
            .iter()
            .map(|p| rng.random_range(p.low..p.high))
            .collect();
        let invert = rng.random_bool(0.5);
        let smooth_kernel = rng.random_range(kernel);
        Self {
            distribution,
            params,
            invert,
            smooth_kernel,
        }
    }
}

/// Largest noise smoothing kernel for a window: `floor(frac * N)`, at least 1.
pub fn max_noise_kernel(window_len: usize, max_kernel_frac: f64) -> usize {
    ((max_kernel_frac * window_len as f64 + KERNEL_EPS).floor() as usize).max(1)
}

/// `ceil(frac * N)` clamped to `[1, N]`.
pub(crate) fn kernel_at_least(window_len: usize, frac: f64) -> usize {
    ((frac * window_len as f64 - KERNEL_EPS).ceil() as usize).clamp(1, window_len)
}

pub fn sample_noise_spec(
    window_len: usize,
    rng: &mut RandomStream,
    max_kernel_frac: f64,
) -> Result<NoiseSpec> {
    if window_len < MIN_WINDOW_LEN {
        return Err(Error::InvalidWindow(format!(
            "window length {window_len} is below the minimum of {MIN_WINDOW_LEN}"
        )));
    }
    if !(max_kernel_frac > 0.0 && max_kernel_frac <= 1.0) {
        return Err(Error::Config(format!(
            "noise kernel fraction {max_kernel_frac} outside (0, 1]"
        )));
    }
    let cap = max_noise_kernel(window_len, max_kernel_frac);
    Ok(NoiseSpec::sample_with_kernel(rng, 1..=cap))
}

/// Every intermediate stage of the noise pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub raw: Vec<f64>,
    pub winsorized: Vec<f64>,
    pub normalized: Vec<f64>,
    /// After the optional reflection.
    pub oriented: Vec<f64>,
    pub smoothed: Vec<f64>,
    pub output: Vec<f64>,
}

pub fn trace_noise(spec: &NoiseSpec, window_len: usize, rng: &mut RandomStream) -> Result<NoiseTrace> {
    spec.validate(window_len)?;
    let raw = spec.distribution.draw(&spec.params, window_len, rng);
    let winsorized = winsorize(&raw, WINSOR_LOW, WINSOR_HIGH);
    let normalized = normalize_unit(&winsorized);
    let oriented = if spec.invert {
        normalized.iter().map(|y| 1.0 - y).collect()
    } else {
        normalized.clone()
    };
    let smoothed = boxcar_smooth(&oriented, spec.smooth_kernel);
    let output = normalize_unit(&smoothed);
    Ok(NoiseTrace {
        raw,
        winsorized,
        normalized,
        oriented,
        smoothed,
        output,
    })
}

/// Renders the noise component in `[0, 1]`.
pub fn render_noise(spec: &NoiseSpec, window_len: usize, rng: &mut RandomStream) -> Result<SeriesWindow> {
    let trace = trace_noise(spec, window_len, rng)?;
    Ok(SeriesWindow::from_rendered(trace.output))
}

/// Linear-interpolated empirical quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Clamps `values` to their own `[q_low, q_high]` empirical quantiles.
pub fn winsorize(values: &[f64], q_low: f64, q_high: f64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, q_low);
    let hi = quantile_sorted(&sorted, q_high);
    let (min, max) = min_max(values);
    if lo <= min && hi >= max {
        return values.to_vec();
    }
    values.iter().map(|v| v.clamp(lo, hi)).collect()
}

/// Centered moving average of width `width` with edge replication. Width 1 is
/// the identity.
pub fn boxcar_smooth(values: &[f64], width: usize) -> Vec<f64> {
    let n = values.len();
    if width <= 1 || n == 0 {
        return values.to_vec();
    }
    // Even widths reach one sample further right than left.
    let left = (width - 1) / 2;
    let last = n - 1;
    let scale = 1.0 / width as f64;
    (0..n)
        .map(|i| {
            let sum: f64 = (0..width)
                .map(|j| {
                    let idx = (i + j).saturating_sub(left).min(last);
                    values[idx]
                })
                .sum();
            sum * scale
        })
        .collect()
}

/// `Σ |y[n+1] - y[n]|`.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
