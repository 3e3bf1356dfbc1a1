//! Length overall from range extent.
//!
//! Each usable frame gives `(r_max − r_min)/(cosφ·cosθ)` less a width
//! correction `beam·|tanφ|`. The beam comes from a naval-architecture
//! rule of thumb applied to the length estimate itself, and the dwell value
//! is a two-stage median of the per-frame values.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::moments::FrameMoments;
use crate::ship::{AngleTrack, Dwell, TargetReport};
use crate::stats::{mad, median, percentile, std_dev};
use crate::validation::BadFitSeries;

const FOOT: f64 = 0.3048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LengthConfig {
    /// Multipath trim distance beyond the 90th-percentile range, in robust
    /// range spreads.
    pub multipath_k: f64,
    /// A trimmed report must be this much weaker than the frame median (dB).
    pub multipath_snr_db: f64,
    /// Smallest usable |cosφ·cosθ|.
    pub min_cosine: f64,
    /// Half-width of the second median window, as a fraction.
    pub median_window: f64,
    pub min_frames: usize,
}

impl Default for LengthConfig {
    fn default() -> Self {
        Self { multipath_k: 1.0, multipath_snr_db: 6.0, min_cosine: 0.1, median_window: 0.25, min_frames: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthEstimate {
    pub loa: f64,
    /// Per-frame corrected LOA; `None` where the frame was not used.
    pub loa_series: Vec<Option<f64>>,
    pub rmin_std: f64,
    pub rmax_std: f64,
    pub frames_used: usize,
    /// Beam from the rule of thumb at the final LOA (m).
    pub beam: f64,
    /// Median width correction subtracted from the raw extent (m).
    pub width_correction: f64,
    pub flags: Vec<String>,
}

/// Beam from length: LOA^(2/3) + 1 with both in feet.
pub fn beam_rule(loa: f64) -> f64 {
    ((loa.max(0.0) / FOOT).powf(2.0 / 3.0) + 1.0) * FOOT
}

/// LOA from one frame's range extent, or `None` when the cosine guard fails.
pub fn frame_loa(m: &FrameMoments, phi: f64, theta: f64, beam: f64) -> Option<f64> {
    loa_from_extent(m.r_min, m.r_max, phi, theta, beam, 0.1)
}

fn loa_from_extent(r_min: f64, r_max: f64, phi: f64, theta: f64, beam: f64, min_cos: f64) -> Option<f64> {
    let c = phi.cos() * theta.cos();
    if !(c.abs() > min_cos) || !(r_max >= r_min) {
        return None;
    }
    let raw = (r_max - r_min) / c.abs();
    Some((raw - beam * phi.tan().abs()).max(0.5 * raw))
}

/// Drop weak far-range outliers; near-range reports are never trimmed.
pub fn multipath_guard(reports: &[TargetReport], cfg: &LengthConfig) -> Vec<TargetReport> {
    if reports.len() < 5 {
        return reports.to_vec();
    }
    let r: Vec<f64> = reports.iter().map(|x| x.r).collect();
    let snr: Vec<f64> = reports.iter().map(|x| x.snr).collect();
    let cut = percentile(&r, 90.0) + cfg.multipath_k * 1.4826 * mad(&r);
    let weak = median(&snr) - cfg.multipath_snr_db;
    reports.iter().filter(|x| !(x.r > cut && x.snr < weak)).copied().collect()
}

/// Dwell LOA from unflagged frames.
pub fn estimate_loa(dwell: &Dwell, track: &AngleTrack, badfit: &BadFitSeries, cfg: &LengthConfig) -> Result<LengthEstimate> {
    let n = dwell.frames.len();
    let mut usable: Vec<(usize, f64, f64, f64, f64)> = Vec::new();
    for (i, fr) in dwell.frames.iter().enumerate() {
        if badfit.flagged.get(i).copied().unwrap_or(true) {
            continue;
        }
        let Some(ang) = track.samples.get(i) else { continue };
        let kept = multipath_guard(&fr.reports, cfg);
        if kept.len() < 3 {
            continue;
        }
        let (lo, hi) = kept.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x.r), b.max(x.r)));
        if loa_from_extent(lo, hi, ang.phi, ang.theta, 0.0, cfg.min_cosine).is_some() {
            usable.push((i, lo, hi, ang.phi, ang.theta));
        }
    }
    if usable.len() < cfg.min_frames {
        return Err(CoreError::InsufficientFrames);
    }
    let per_frame = |beam: f64| -> Vec<f64> {
        usable
            .iter()
            .filter_map(|&(_, lo, hi, p, t)| loa_from_extent(lo, hi, p, t, beam, cfg.min_cosine))
            .collect()
    };
    let mut loa = median(&per_frame(0.0));
    let mut flags = Vec::new();
    let mut converged = false;
    for _ in 0..100 {
        let next = median(&per_frame(beam_rule(loa)));
        if (next - loa).abs() <= 1e-9 * loa.max(1.0) {
            loa = next;
            converged = true;
            break;
        }
        loa = next;
    }
    if !converged {
        flags.push("beam iteration did not converge".into());
    }
    let beam = beam_rule(loa);
    let values = per_frame(beam);
    let inner = median(&values);
    let window: Vec<f64> = values.iter().copied().filter(|v| (v - inner).abs() <= cfg.median_window * inner).collect();
    let loa = median(&window);
    let mut loa_series = vec![None; n];
    for (k, &(i, ..)) in usable.iter().enumerate() {
        loa_series[i] = Some(values[k]);
    }
    let corrections: Vec<f64> = usable.iter().map(|u| beam * u.3.tan().abs()).collect();
    let rmin: Vec<f64> = usable.iter().map(|u| u.1).collect();
    let rmax: Vec<f64> = usable.iter().map(|u| u.2).collect();
    Ok(LengthEstimate {
        loa,
        loa_series,
        rmin_std: std_dev(&rmin),
        rmax_std: std_dev(&rmax),
        frames_used: usable.len(),
        beam,
        width_correction: median(&corrections),
        flags,
    })
}
