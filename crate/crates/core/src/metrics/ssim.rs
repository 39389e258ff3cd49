use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 11;

/// Dynamic range of standardized signals in `[-1, 1]`.
pub const DYNAMIC_RANGE: f64 = 2.0;
pub const C1: f64 = (0.01 * DYNAMIC_RANGE) * (0.01 * DYNAMIC_RANGE);
pub const C2: f64 = (0.03 * DYNAMIC_RANGE) * (0.03 * DYNAMIC_RANGE);

/// SSIM of two equal-length patches with uniform weights and population moments.
fn patch_ssim(a: &[f64], b: &[f64]) -> f64 {
    let w = a.len() as f64;
    let mu_a = a.iter().sum::<f64>() / w;
    let mu_b = b.iter().sum::<f64>() / w;
    let (mut var_a, mut var_b, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - mu_a, y - mu_b);
        var_a += dx * dx;
        var_b += dy * dy;
        cov += dx * dy;
    }
    var_a /= w;
    var_b /= w;
    cov /= w;
    ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
        / ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2))
}

/// Mean SSIM over all sliding windows of width `win`.
pub fn ssim(a: &[f64], b: &[f64], win: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    if win == 0 || win % 2 == 0 {
        return Err(Error::Config(format!("SSIM window must be odd and positive, got {win}")));
    }
    if win > a.len() {
        return Err(Error::InvalidWindow(format!(
            "SSIM window {win} is longer than the series ({})",
            a.len()
        )));
    }
    let positions = a.len() - win + 1;
    let total: f64 = (0..positions)
        .map(|p| patch_ssim(&a[p..p + win], &b[p..p + win]))
        .sum();
    Ok(total / positions as f64)
}

/// Structural dissimilarity `1 - SSIM`, in `[0, 2]`.
pub fn structural_dissimilarity(a: &[f64], b: &[f64], win: usize) -> Result<f64> {
    Ok(1.0 - ssim(a, b, win)?)
}
