//! Dominant wave period from the spectrum of the covariance series.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::moments::FrameMoments;
use crate::stats::{linear_fit, median};

/// False-alarm probability used to set the spectral peak threshold.
pub const PEAK_FALSE_ALARM: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveLine {
    /// Period of the spectral peak of cov_rf (s).
    pub period: f64,
    /// Peak power over the median spectral floor.
    pub peak_ratio: f64,
    /// Ratio the peak had to exceed.
    pub threshold: f64,
    /// Peak period of cov_ff, when it has a significant line.
    pub ff_period: Option<f64>,
}

/// Valid samples of a moment field, with invalid frames bridged linearly.
pub(crate) fn filled(moments: &[FrameMoments], field: impl Fn(&FrameMoments) -> f64) -> Vec<f64> {
    let valid: Vec<usize> = (0..moments.len()).filter(|&i| moments[i].valid).collect();
    let mut out = vec![0.0; moments.len()];
    if valid.is_empty() {
        return out;
    }
    for (i, o) in out.iter_mut().enumerate() {
        let k = valid.partition_point(|&j| j < i);
        *o = if k < valid.len() && valid[k] == i {
            field(&moments[i])
        } else if k == 0 {
            field(&moments[valid[0]])
        } else if k == valid.len() {
            field(&moments[valid[k - 1]])
        } else {
            let (a, b) = (valid[k - 1], valid[k]);
            let w = (moments[i].t - moments[a].t) / (moments[b].t - moments[a].t);
            field(&moments[a]) * (1.0 - w) + field(&moments[b]) * w
        };
    }
    out
}

/// Periodogram of the detrended series: (period, power) for the bins strictly
/// between DC and Nyquist.
pub fn periodogram(t: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let n = y.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    let (c0, c1) = linear_fit(t, y);
    let mut buf: Vec<Complex<f64>> =
        t.iter().zip(y).map(|(t, y)| Complex::new(y - c0 - c1 * t, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (1..(n + 1) / 2).map(|k| (n as f64 * dt / k as f64, buf[k].norm_sqr())).collect()
}

fn strongest_line(spec: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    if spec.len() < 4 {
        return None;
    }
    let floor = median(&spec.iter().map(|s| s.1).collect::<Vec<_>>());
    let threshold = (spec.len() as f64 / PEAK_FALSE_ALARM).ln() / std::f64::consts::LN_2;
    let threshold = threshold.max(3.0);
    // bin 1 spans the whole record and cannot be a line
    let best = (1..spec.len())
        .filter(|&k| spec[k].1 >= spec[k - 1].1 && (k + 1 == spec.len() || spec[k].1 >= spec[k + 1].1))
        .max_by(|&a, &b| spec[a].1.total_cmp(&spec[b].1))?;
    let ratio = if floor > 0.0 { spec[best].1 / floor } else if spec[best].1 > 0.0 { f64::INFINITY } else { 0.0 };
    (ratio > threshold).then_some((spec[best].0, ratio, threshold))
}

/// Period of the dominant spectral line of cov_rf.
///
/// The peak must be a local maximum and exceed the median spectral floor by
/// the ratio a white-noise periodogram reaches with probability
/// [`PEAK_FALSE_ALARM`].
pub fn dominant_wave_period(moments: &[FrameMoments]) -> Result<WaveLine> {
    let n_valid = moments.iter().filter(|m| m.valid).count();
    if n_valid < 16 {
        return Err(CoreError::TooFewSamples { needed: 16, have: n_valid });
    }
    let t: Vec<f64> = moments.iter().map(|m| m.t).collect();
    let rf = filled(moments, |m| m.cov_rf);
    let ff = filled(moments, |m| m.cov_ff);
    let (period, peak_ratio, threshold) = strongest_line(&periodogram(&t, &rf)).ok_or(CoreError::NoWaveLine)?;
    let ff_period = strongest_line(&periodogram(&t, &ff)).map(|l| l.0);
    Ok(WaveLine { period, peak_ratio, threshold, ff_period })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn series(vals: &[f64], dt: f64) -> Vec<FrameMoments> {
        let base = crate::moments::frame_moments(&[], Default::default());
        vals.iter()
            .enumerate()
            .map(|(i, &v)| FrameMoments { t: i as f64 * dt, valid: true, cov_rf: v, cov_ff: v * v, ..base })
            .collect()
    }

    #[test]
    fn pure_sinusoid_period() {
        let dt = 0.5;
        let v: Vec<f64> = (0..120).map(|i| (2.0 * std::f64::consts::PI * i as f64 * dt / 10.0).sin()).collect();
        let line = dominant_wave_period(&series(&v, dt)).unwrap();
        let bin = 1.0 / 60.0;
        assert!((1.0 / line.period - 0.1).abs() <= bin);
    }

    #[test]
    fn white_noise_has_no_line() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = Normal::new(0.0, 1.0).unwrap();
            let v: Vec<f64> = (0..120).map(|_| n.sample(&mut rng)).collect();
            assert_eq!(dominant_wave_period(&series(&v, 0.5)), Err(CoreError::NoWaveLine), "seed {seed}");
        }
    }

    #[test]
    fn smooth_trend_has_no_line() {
        let v: Vec<f64> = (0..120).map(|i| (i as f64 * 0.5 / 60.0 - 0.3).powi(2) * 0.01).collect();
        assert_eq!(dominant_wave_period(&series(&v, 0.5)), Err(CoreError::NoWaveLine));
    }

    #[test]
    fn needs_sixteen_frames() {
        let v = vec![1.0; 10];
        assert!(matches!(dominant_wave_period(&series(&v, 0.5)), Err(CoreError::TooFewSamples { .. })));
    }

    #[test]
    fn filling_bridges_invalid_frames() {
        let mut s = series(&[0.0, 1.0, 2.0, 3.0], 1.0);
        s[1].valid = false;
        s[1].cov_rf = 99.0;
        s[2].valid = false;
        assert_eq!(filled(&s, |m| m.cov_rf), vec![0.0, 1.0, 2.0, 3.0]);
    }
}
