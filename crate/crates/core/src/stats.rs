//! Batch-means statistics over path ensembles.
//!
//! Standard errors use a fixed partition of the path index range into
//! contiguous batches, so they depend only on the ordered sample vector.

use serde::{Deserialize, Serialize};

/// Number of batches used for standard errors (fewer when there are fewer samples).
pub const DEFAULT_BATCHES: usize = 100;

/// Sample mean with a batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// `|mean − target| ≤ k·std_error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }
}

pub fn batch_mean(values: &[f64]) -> MeanEstimate {
    batch_mean_with(values, DEFAULT_BATCHES)
}

pub fn batch_mean_with(values: &[f64], batches: usize) -> MeanEstimate {
    let n = values.len();
    if n == 0 {
        return MeanEstimate { mean: f64::NAN, std_error: f64::NAN, n: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let b = batches.clamp(1, n);
    if b < 2 {
        return MeanEstimate { mean, std_error: 0.0, n };
    }
    let means: Vec<f64> = (0..b)
        .map(|i| {
            let chunk = &values[i * n / b..(i + 1) * n / b];
            chunk.iter().sum::<f64>() / chunk.len() as f64
        })
        .collect();
    let mm = means.iter().sum::<f64>() / b as f64;
    let var = means.iter().map(|m| (m - mm).powi(2)).sum::<f64>() / (b - 1) as f64;
    MeanEstimate { mean, std_error: (var / b as f64).sqrt(), n }
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Unbiased sample covariance.
pub fn sample_covariance(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_zero_error() {
        let m = batch_mean(&[2.0; 1000]);
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn small_samples_fall_back_to_plain_standard_error() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let m = batch_mean(&v);
        assert_eq!(m.mean, 2.5);
        let expect = (sample_variance(&v) / 4.0).sqrt();
        assert!((m.std_error - expect).abs() < 1e-15);
    }
}
