use crate::error::{Error, Result};

/// Dynamic time warping distance with local cost `|a[i] - b[j]|`.
///
/// `band` restricts the path to cells with `|i - j| <= band` (Sakoe-Chiba).
/// The accumulated cost is not normalized by path length.
pub fn dtw(a: &[f64], b: &[f64], band: Option<usize>) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidSeries("DTW needs non-empty inputs".into()));
    }
    let (rows, cols) = (a.len(), b.len());
    let w = band.unwrap_or(usize::MAX);
    if w < rows.abs_diff(cols) {
        return Err(Error::BandInfeasible {
            band: w,
            rows,
            cols,
        });
    }

    let mut prev = vec![f64::INFINITY; cols + 1];
    let mut curr = vec![f64::INFINITY; cols + 1];
    prev[0] = 0.0;
    for i in 1..=rows {
        curr.fill(f64::INFINITY);
        let j_lo = i.saturating_sub(w).max(1);
        let j_hi = i.saturating_add(w).min(cols);
        for j in j_lo..=j_hi {
            let cost = (a[i - 1] - b[j - 1]).abs();
            curr[j] = cost + prev[j].min(curr[j - 1]).min(prev[j - 1]);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[cols])
}
