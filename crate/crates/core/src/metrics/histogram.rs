use crate::error::{Error, Result};
use crate::types::min_max;

pub const DEFAULT_BINS: usize = 32;

/// Normalized histogram of `values` over `bins` equal-width bins on `[lo, hi]`.
/// The top edge is closed.
fn normalized_histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0usize; bins];
    let range = hi - lo;
    for &v in values {
        let idx = (((v - lo) / range) * bins as f64).floor() as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let total = values.len() as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

/// L1 distance between the normalized histograms of `a` and `b` binned on
/// their shared range. Lies in `[0, 2]`.
pub fn histogram_distance(a: &[f64], b: &[f64], bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::Config(format!("histogram needs at least 2 bins, got {bins}")));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidSeries("histogram distance needs non-empty inputs".into()));
    }
    crate::types::check_finite(a)?;
    crate::types::check_finite(b)?;
    let (a_lo, a_hi) = min_max(a);
    let (b_lo, b_hi) = min_max(b);
    let (lo, hi) = (a_lo.min(b_lo), a_hi.max(b_hi));
    if !(hi > lo) {
        return Ok(0.0);
    }
    let ha = normalized_histogram(a, lo, hi, bins);
    let hb = normalized_histogram(b, lo, hi, bins);
    Ok(ha.iter().zip(&hb).map(|(x, y)| (x - y).abs()).sum())
}
