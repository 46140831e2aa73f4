//! Summary metrics and small signal-analysis helpers.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

#[derive(Debug, Clone, Default, Serialize)]
pub struct SummaryMetrics {
    /// RMS position error over the final half of the run, m.
    pub rms_position_error_m: f64,
    /// Peak attitude error norm over the final half, deg.
    pub max_attitude_error_deg: f64,
    /// Fraction of control ticks with any thruster clamped.
    pub saturation_fraction: f64,
    /// Peak observer output-error norm over the run.
    pub max_observer_output_error: f64,
    /// Peak disturbance-estimate error norm over the run.
    pub max_disturbance_estimate_error: f64,
    /// Position error at the final sample, m.
    pub final_position_error_m: f64,
    pub rows: usize,
}

/// Dominant nonzero frequency of a uniformly sampled series, Hz. The mean is
/// removed first; returns None for degenerate inputs.
pub fn dominant_frequency(samples: &[f64], sample_rate_hz: f64) -> Option<f64> {
    let n = samples.len();
    if n < 8 || !(sample_rate_hz > 0.0) {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> =
        samples.iter().map(|&s| Complex::new(s - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let (mut best, mut best_mag) = (0usize, 0.0f64);
    for (k, c) in buf.iter().enumerate().take(half).skip(1) {
        let mag = c.norm_sqr();
        if mag > best_mag {
            best_mag = mag;
            best = k;
        }
    }
    if best == 0 {
        return None;
    }
    Some(best as f64 * sample_rate_hz / n as f64)
}

/// Frequency resolution of a DFT over the same window, Hz per bin.
pub fn frequency_resolution(n_samples: usize, sample_rate_hz: f64) -> f64 {
    sample_rate_hz / n_samples as f64
}
