use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Full two-sided DFT `A[k] = Σ a[n]·e^{-2πi kn/N}`.
pub fn dft_spectrum(a: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::<f64>::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// One-sided magnitude spectrum, `⌊N/2⌋ + 1` bins; bin `k` is `k/N` cycles
/// per sample.
pub fn dft_magnitude(a: &[f64]) -> Vec<f64> {
    let spectrum = dft_spectrum(a);
    spectrum
        .iter()
        .take(a.len() / 2 + 1)
        .map(|c| c.norm())
        .collect()
}

/// Frequency of bin `k` for a window of `n` samples.
pub fn bin_frequency(k: usize, n: usize) -> f64 {
    k as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use super::*;

    #[test]
    fn constant_is_dc_only() {
        let mag = dft_magnitude(&[-1.5; 20]);
        assert_eq!(mag.len(), 11);
        assert!((mag[0] - 30.0).abs() < 1e-9);
        assert!(mag[1..].iter().all(|m| m.abs() < 1e-9));
    }

    #[test]
    fn on_bin_sine_peaks() {
        let n = 64;
        let a: Vec<f64> = (0..n).map(|i| (TAU * 8.0 * i as f64 / n as f64).sin()).collect();
        let mag = dft_magnitude(&a);
        assert_eq!(mag.len(), 33);
        assert!((mag[8] - 32.0).abs() < 1e-9);
        for (k, m) in mag.iter().enumerate() {
            if k != 8 {
                assert!(*m < 1e-9, "bin {k}: {m}");
            }
        }
    }

    #[test]
    fn odd_length_bins() {
        assert_eq!(dft_magnitude(&[1.0; 9]).len(), 5);
        assert!(dft_magnitude(&[]).is_empty());
    }
}
