//! Aspect and tilt recovery from a moments series.
//!
//! The dominant wave period seeds a grid of candidate periods. At each
//! candidate the cov_rf series is split into bands, the low band is
//! integrated into a slow aspect track, and the wave band is fitted jointly
//! with the intrinsic Doppler variance. The candidate with the smallest
//! covariance residual wins.

pub mod bands;
pub mod lowpass;
pub mod model;
pub mod spectrum;
pub mod wavefit;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bands::{chapeau_band_split, BandProjector, BandSplit};
pub use lowpass::{lowpass_aspect_solve, LowpassSolution};
pub use model::{model_covariances, model_moments, ModelCovariances, ModelMoments};
pub use spectrum::{dominant_wave_period, WaveLine};
pub use wavefit::{waveband_joint_fit, FitInputs, FitOptions, FitState};

use crate::error::{CoreError, Result};
use crate::moments::{time_derivative, FrameMoments};
use crate::ship::{AngleSample, AngleTrack};
use crate::stats::gradient;
use crate::DEG;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorOptions {
    /// Number of candidate periods (odd, centered on the seed).
    pub period_grid: usize,
    /// Half-width of the period search as a fraction of the seed.
    pub period_span: f64,
    pub fit: FitOptions,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self { period_grid: 9, period_span: 0.2, fit: FitOptions::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodCandidate {
    pub period: f64,
    pub residual: f64,
    pub bsq: f64,
    pub hsq: f64,
    pub floored_frames: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleDiagnostics {
    pub wave_line: Option<WaveLine>,
    pub candidates: Vec<PeriodCandidate>,
    pub selected_period: Option<f64>,
    pub bsq: f64,
    pub hsq: f64,
    pub steady_rate: f64,
    pub residual: f64,
    pub interpolated_frames: usize,
    pub floored_frames: usize,
    /// Low-band-only solution was used.
    pub fallback: bool,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleEstimate {
    pub track: AngleTrack,
    pub diagnostics: AngleDiagnostics,
    pub fit: Option<FitState>,
}

/// The candidate periods searched around a seed.
pub fn period_grid(seed: f64, opts: &EstimatorOptions) -> Vec<f64> {
    let g = opts.period_grid.max(1);
    if g == 1 {
        return vec![seed];
    }
    (0..g)
        .map(|k| seed * (1.0 - opts.period_span + 2.0 * opts.period_span * k as f64 / (g - 1) as f64))
        .collect()
}

fn assemble(t: &[f64], dt: f64, phi: &[f64], theta: &[f64]) -> AngleTrack {
    let ok = vec![true; t.len()];
    let d = |x: &[f64]| time_derivative(t, x, &ok).unwrap_or_else(|_| gradient(x, dt));
    let (pd, td) = (d(phi), d(theta));
    let (pdd, tdd) = (d(&pd), d(&td));
    let samples = (0..t.len())
        .map(|i| AngleSample {
            t: t[i],
            phi: phi[i],
            theta: theta[i],
            phi_dot: pd[i],
            theta_dot: td[i],
            phi_ddot: pdd[i],
            theta_ddot: tdd[i],
        })
        .collect();
    AngleTrack { samples, dt }
}

/// Recover the angle track from a moments series and the mean angles.
pub fn estimate_angles(
    moments: &[FrameMoments],
    phi0: f64,
    theta0: f64,
    opts: &EstimatorOptions,
) -> Result<AngleEstimate> {
    let n = moments.len();
    let n_valid = moments.iter().filter(|m| m.valid).count();
    if n_valid < 16 {
        return Err(CoreError::TooFewSamples { needed: 16, have: n_valid });
    }
    if phi0.tan().abs() <= (3.0 * DEG).tan() {
        return Err(CoreError::AspectUnobservable);
    }
    let t: Vec<f64> = moments.iter().map(|m| m.t).collect();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    let rf = spectrum::filled(moments, |m| m.cov_rf);
    let d = spectrum::filled(moments, |m| m.d_intrinsic);
    let inp = FitInputs { t: &t, dt, cov_rf: &rf, d: &d, phi0, theta0 };
    let mut flags = Vec::new();
    if n_valid < n {
        flags.push(format!("{} invalid frames interpolated", n - n_valid));
    }
    let tilt_ok = theta0.tan().abs() > (3.0 * DEG).tan();
    if !tilt_ok {
        flags.push("tilt unobservable".into());
    }

    let wave_line = dominant_wave_period(moments);
    let duration = t[n - 1] - t[0];
    let candidates: Vec<(PeriodCandidate, FitState)> = match (&wave_line, tilt_ok) {
        (Ok(line), true) => period_grid(line.period, opts)
            .into_par_iter()
            .filter(|p| duration >= 3.0 * p)
            .filter_map(|p| waveband_joint_fit(&inp, p, &opts.fit).ok())
            .map(|s| {
                let c = PeriodCandidate {
                    period: s.period,
                    residual: s.residual_rms,
                    bsq: s.bsq_est,
                    hsq: s.hsq_est,
                    floored_frames: s.floored.iter().filter(|f| **f).count(),
                };
                (c, s)
            })
            .collect(),
        _ => Vec::new(),
    };
    let wave_line = match wave_line {
        Ok(l) => Some(l),
        Err(e) => {
            flags.push(e.to_string());
            None
        }
    };
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.residual.total_cmp(&b.1 .0.residual).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i);

    let Some(best) = best else {
        flags.push("no wave solution".into());
        return fallback(&inp, wave_line, n - n_valid, flags);
    };
    let state = candidates[best].1.clone();
    let track = assemble(&t, dt, &state.phi, &state.theta);
    let floored_frames = candidates[best].0.floored_frames;
    if state.bsq_clamped {
        flags.push("bsq clamped".into());
    }
    let diagnostics = AngleDiagnostics {
        wave_line,
        candidates: candidates.iter().map(|c| c.0).collect(),
        selected_period: Some(state.period),
        bsq: state.bsq_est,
        hsq: state.hsq_est,
        steady_rate: state.steady_rate,
        residual: state.residual_rms,
        interpolated_frames: n - n_valid,
        floored_frames,
        fallback: false,
        flags,
    };
    Ok(AngleEstimate { track, diagnostics, fit: Some(state) })
}

/// Steady turn in aspect only, tilt held at θ0.
fn fallback(inp: &FitInputs, wave_line: Option<WaveLine>, interpolated: usize, flags: Vec<String>) -> Result<AngleEstimate> {
    let n = inp.t.len();
    let duration = inp.t[n - 1] - inp.t[0];
    let proj = BandProjector::new(inp.t, duration.max(inp.dt) / 3.0, 1.0);
    let lhs: Vec<f64> = inp.cov_rf.iter().map(|c| -c).collect();
    let low = proj.split(&lhs).low;
    let lp = lowpass_aspect_solve(&low, inp.phi0, 1.0, inp.dt)?;
    let theta = vec![inp.theta0; n];
    let track = assemble(inp.t, inp.dt, &lp.phi, &theta);
    let out = model_covariances(&track, 0.0, 0.0);
    let rf_out: Vec<f64> = out.iter().map(|c| c.cov_rf).collect();
    let d_out: Vec<f64> = out.iter().map(|c| c.d).collect();
    let quiet = inp.cov_rf.iter().chain(inp.d).all(|v| v.abs() < 1e-300);
    let residual = if quiet { 0.0 } else { wavefit::covariance_residual(inp.cov_rf, inp.d, &rf_out, &d_out) };
    let diagnostics = AngleDiagnostics {
        wave_line,
        candidates: Vec::new(),
        selected_period: None,
        bsq: 0.0,
        hsq: 0.0,
        steady_rate: lp.steady_rate,
        residual,
        interpolated_frames: interpolated,
        floored_frames: 0,
        fallback: true,
        flags,
    };
    Ok(AngleEstimate { track, diagnostics, fit: None })
}
