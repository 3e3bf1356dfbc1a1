//! Forward model: exact range, range rate and range acceleration of point
//! scatterers on a rotating ship, plus degraded dwells with noise, fading
//! and injected confusers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ship::{AngleSample, AngleTrack, Dwell, DwellMeta, Frame, Scatterer, ShipModel, TargetReport};
use crate::DEG;

/// Range of a scatterer: x0·cosθ·cosφ − y0·cosθ·sinφ − z0·sinθ.
pub fn range_of(s: &Scatterer, ang: &AngleSample) -> f64 {
    let (sf, cf) = ang.phi.sin_cos();
    let (st, ct) = ang.theta.sin_cos();
    s.x0 * ct * cf - s.y0 * ct * sf - s.z0 * st
}

/// Time derivative of [`range_of`].
pub fn rate_of(s: &Scatterer, ang: &AngleSample) -> f64 {
    let (sf, cf) = ang.phi.sin_cos();
    let (st, ct) = ang.theta.sin_cos();
    let g = s.x0 * cf - s.y0 * sf;
    let gp = -s.x0 * sf - s.y0 * cf;
    -st * ang.theta_dot * g + ct * gp * ang.phi_dot - s.z0 * ct * ang.theta_dot
}

/// Second time derivative of [`range_of`].
pub fn accel_of(s: &Scatterer, ang: &AngleSample) -> f64 {
    let (sf, cf) = ang.phi.sin_cos();
    let (st, ct) = ang.theta.sin_cos();
    let g = s.x0 * cf - s.y0 * sf;
    let gp = -s.x0 * sf - s.y0 * cf;
    let (td, pd) = (ang.theta_dot, ang.phi_dot);
    -ct * td * td * g - st * ang.theta_ddot * g - 2.0 * st * td * pd * gp
        + ct * (-g * pd * pd + gp * ang.phi_ddot)
        + s.z0 * (st * td * td - ct * ang.theta_ddot)
}

/// Sinusoidal oscillation amplitude (rad) and period (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude: f64,
    pub period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Range noise (m).
    pub sigma_r: f64,
    /// Doppler noise (m/s).
    pub sigma_f: f64,
    /// Acceleration noise (m/s²).
    pub sigma_a: f64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { sigma_r: 0.3, sigma_f: 0.05, sigma_a: 0.05 }
    }
}

impl NoiseSpec {
    pub fn zero() -> Self {
        Self { sigma_r: 0.0, sigma_f: 0.0, sigma_a: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSpec {
    /// SNR of a unit-reflectivity scatterer (dB).
    pub snr_db: f64,
    /// Standard deviation of the per-frame log-normal fade (dB).
    pub fade_sigma_db: f64,
    /// Reports below this SNR are dropped (dB).
    pub snr_floor_db: f64,
}

impl Default for DetectionSpec {
    fn default() -> Self {
        Self { snr_db: 30.0, fade_sigma_db: 0.0, snr_floor_db: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegradationKind {
    /// Confuser ship moving rapidly through range at an aliased Doppler.
    Bogey {
        range_start: f64,
        range_rate: f64,
        doppler: f64,
        n_reports: usize,
        spread: f64,
        snr_db: f64,
    },
    /// Persistent narrow Doppler band migrating across the scene.
    NarrowbandInterference {
        doppler_start: f64,
        doppler_rate: f64,
        width: f64,
        density: usize,
        range_span: f64,
        snr_db: f64,
    },
    /// Episodic bursts spread over a wide Doppler extent.
    BroadbandInterference {
        doppler_span: f64,
        density: usize,
        probability: f64,
        range_span: f64,
        snr_db: f64,
    },
    /// Random dropout of the farthest-range reports.
    FarEndFade { fraction: f64, probability: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    #[serde(flatten)]
    pub kind: DegradationKind,
    /// Window start time (s).
    pub start: f64,
    /// Window end time (s).
    pub end: f64,
}

impl DegradationSpec {
    fn active(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

/// Scenario definition for the forward simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub duration: f64,
    pub frame_interval: f64,
    /// Integration time T (s).
    pub integration_time: f64,
    /// φ0 (rad).
    pub mean_aspect: f64,
    /// θ0 (rad).
    pub mean_tilt: f64,
    /// Steady aspect turning rate (rad/s).
    pub steady_aspect_rate: f64,
    pub aspect_osc: Oscillation,
    pub tilt_osc: Oscillation,
    pub noise: NoiseSpec,
    pub detection: DetectionSpec,
    pub injectors: Vec<DegradationSpec>,
    pub range_resolution: f64,
    pub wavelength: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    /// Steady 0.3°/s turn at 45° aspect and 30° tilt with 1° oscillations of
    /// 12 s in aspect and 10 s in tilt, observed for 60 s in 0.5 s frames.
    fn default() -> Self {
        Self {
            duration: 60.0,
            frame_interval: 0.5,
            integration_time: 1.0,
            mean_aspect: 45.0 * DEG,
            mean_tilt: 30.0 * DEG,
            steady_aspect_rate: 0.3 * DEG,
            aspect_osc: Oscillation { amplitude: 1.0 * DEG, period: 12.0 },
            tilt_osc: Oscillation { amplitude: 1.0 * DEG, period: 10.0 },
            noise: NoiseSpec::default(),
            detection: DetectionSpec::default(),
            injectors: Vec::new(),
            range_resolution: 1.0,
            wavelength: 0.03,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(CoreError::InvalidInput(m.to_string()));
        if !(self.duration > 0.0 && self.frame_interval > 0.0 && self.integration_time > 0.0) {
            return bad("duration, frame_interval and integration_time must be positive");
        }
        if self.frame_count() == 0 {
            return bad("duration shorter than one frame");
        }
        for (name, osc) in [("aspect_osc", self.aspect_osc), ("tilt_osc", self.tilt_osc)] {
            if osc.amplitude != 0.0 && !(osc.period > 2.0 * self.frame_interval) {
                return bad(&format!("{name} period must exceed twice the frame interval"));
            }
        }
        if self.mean_aspect.abs() >= std::f64::consts::FRAC_PI_2
            || self.mean_tilt.abs() >= std::f64::consts::FRAC_PI_2
        {
            return bad("mean angles must lie inside (-90°, 90°)");
        }
        for inj in &self.injectors {
            if inj.start < 0.0 || inj.end > self.duration || inj.end < inj.start {
                return bad("injector window outside the dwell");
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration / self.frame_interval + 1e-9).floor() as usize
    }

    pub fn frame_time(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.frame_interval
    }

    pub fn meta(&self) -> DwellMeta {
        DwellMeta {
            frame_interval: self.frame_interval,
            integration_time: self.integration_time,
            mean_aspect: self.mean_aspect,
            mean_tilt: self.mean_tilt,
            range_resolution: self.range_resolution,
            wavelength: self.wavelength,
        }
    }

    /// Angle state at an arbitrary time.
    pub fn angles_at(&self, t: f64) -> AngleSample {
        let tbar = 0.5 * self.duration;
        let (pa, pw) = osc_terms(self.aspect_osc, t);
        let (ta, tw) = osc_terms(self.tilt_osc, t);
        AngleSample {
            t,
            phi: self.mean_aspect + self.steady_aspect_rate * (t - tbar) + pa.0,
            theta: self.mean_tilt + ta.0,
            phi_dot: self.steady_aspect_rate + pa.1,
            theta_dot: ta.1,
            phi_ddot: pw,
            theta_ddot: tw,
        }
    }
}

fn osc_terms(o: Oscillation, t: f64) -> ((f64, f64), f64) {
    if o.amplitude == 0.0 {
        return ((0.0, 0.0), 0.0);
    }
    let w = 2.0 * std::f64::consts::PI / o.period;
    let (s, c) = (w * t).sin_cos();
    ((o.amplitude * s, o.amplitude * w * c), -o.amplitude * w * w * s)
}

/// Steady turn plus aspect and tilt oscillations, sampled at frame centers.
pub fn build_angle_track(cfg: &ScenarioConfig) -> AngleTrack {
    let samples = (0..cfg.frame_count()).map(|i| cfg.angles_at(cfg.frame_time(i))).collect();
    AngleTrack { samples, dt: cfg.frame_interval }
}

fn snr_of(s: &Scatterer, det: &DetectionSpec) -> f64 {
    det.snr_db + 10.0 * s.rcs.log10()
}

fn exact_report(i: usize, id: usize, s: &Scatterer, ang: &AngleSample, det: &DetectionSpec) -> TargetReport {
    TargetReport {
        frame_index: i,
        t: ang.t,
        snr: snr_of(s, det),
        r: range_of(s, ang),
        f: rate_of(s, ang),
        a: accel_of(s, ang),
        doppler_width: None,
        truth_id: Some(id),
    }
}

/// Exact reports for every scatterer in every frame.
pub fn simulate_perfect(model: &ShipModel, track: &AngleTrack, cfg: &ScenarioConfig) -> Dwell {
    let frames = track
        .samples
        .iter()
        .enumerate()
        .map(|(i, ang)| Frame {
            t: ang.t,
            integration_time: cfg.integration_time,
            reports: model
                .scatterers
                .iter()
                .enumerate()
                .map(|(id, s)| exact_report(i, id, s, ang, &cfg.detection))
                .collect(),
        })
        .collect();
    Dwell { meta: cfg.meta(), frames }
}

fn gauss(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).map(|n| n.sample(rng)).unwrap_or(0.0)
    } else {
        0.0
    }
}

fn injected(i: usize, t: f64, snr: f64, r: f64, f: f64) -> TargetReport {
    TargetReport { frame_index: i, t, snr, r, f, a: 0.0, doppler_width: None, truth_id: None }
}

/// Noisy, fading reports with optional confuser and interference injection.
///
/// Every frame draws from its own stream of a seeded ChaCha generator, so
/// the result does not depend on scheduling.
pub fn simulate_degraded(model: &ShipModel, track: &AngleTrack, cfg: &ScenarioConfig) -> Dwell {
    let frames = track
        .samples
        .par_iter()
        .enumerate()
        .map(|(i, ang)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64 + 1);
            let det = &cfg.detection;
            let mut reports = Vec::with_capacity(model.scatterers.len());
            for (id, s) in model.scatterers.iter().enumerate() {
                let mut rep = exact_report(i, id, s, ang, det);
                rep.snr += gauss(&mut rng, det.fade_sigma_db);
                rep.r += gauss(&mut rng, cfg.noise.sigma_r);
                rep.f += gauss(&mut rng, cfg.noise.sigma_f);
                rep.a += gauss(&mut rng, cfg.noise.sigma_a);
                if rep.snr >= det.snr_floor_db {
                    reports.push(rep);
                }
            }
            for inj in cfg.injectors.iter().filter(|d| d.active(ang.t)) {
                apply_injector(inj, i, ang.t, &mut reports, &mut rng, cfg);
            }
            Frame { t: ang.t, integration_time: cfg.integration_time, reports }
        })
        .collect();
    Dwell { meta: cfg.meta(), frames }
}

fn apply_injector(
    inj: &DegradationSpec,
    i: usize,
    t: f64,
    reports: &mut Vec<TargetReport>,
    rng: &mut ChaCha8Rng,
    cfg: &ScenarioConfig,
) {
    match inj.kind {
        DegradationKind::Bogey { range_start, range_rate, doppler, n_reports, spread, snr_db } => {
            let centre = range_start + range_rate * (t - inj.start);
            for k in 0..n_reports {
                let frac = if n_reports > 1 { k as f64 / (n_reports - 1) as f64 - 0.5 } else { 0.0 };
                let mut rep = injected(i, t, snr_db, centre + spread * frac, doppler);
                rep.r += gauss(rng, cfg.noise.sigma_r);
                rep.f += gauss(rng, cfg.noise.sigma_f);
                rep.a += gauss(rng, cfg.noise.sigma_a);
                reports.push(rep);
            }
        }
        DegradationKind::NarrowbandInterference {
            doppler_start,
            doppler_rate,
            width,
            density,
            range_span,
            snr_db,
        } => {
            let centre = doppler_start + doppler_rate * (t - inj.start);
            for _ in 0..density {
                let r = range_span * (rng.random::<f64>() - 0.5);
                let f = centre + width * (rng.random::<f64>() - 0.5);
                let mut rep = injected(i, t, snr_db, r, f);
                rep.a += gauss(rng, cfg.noise.sigma_a);
                reports.push(rep);
            }
        }
        DegradationKind::BroadbandInterference {
            doppler_span,
            density,
            probability,
            range_span,
            snr_db,
        } => {
            if rng.random::<f64>() < probability {
                for _ in 0..density {
                    let r = range_span * (rng.random::<f64>() - 0.5);
                    let f = doppler_span * (rng.random::<f64>() - 0.5);
                    let mut rep = injected(i, t, snr_db, r, f);
                    rep.a += gauss(rng, cfg.noise.sigma_a);
                    reports.push(rep);
                }
            }
        }
        DegradationKind::FarEndFade { fraction, probability } => {
            let mut ranges: Vec<f64> = reports.iter().map(|r| r.r).collect();
            ranges.sort_by(|a, b| b.total_cmp(a));
            let k = ((fraction * ranges.len() as f64).ceil() as usize).min(ranges.len());
            if k == 0 {
                return;
            }
            let cut = ranges[k - 1];
            reports.retain(|rep| rep.r < cut || rng.random::<f64>() >= probability);
        }
    }
}
