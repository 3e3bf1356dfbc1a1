//! Domain types shared by every stage: ships, angle tracks, target reports
//! and dwells.
//!
//! Angles are radians throughout. Ranges are offsets from the ship reference
//! point in meters, Doppler is range rate in m/s and acceleration is in m/s².

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// One point scatterer in drydock coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Alongship position (m).
    pub x0: f64,
    /// Cross-ship position (m).
    pub y0: f64,
    /// Height (m).
    pub z0: f64,
    /// Relative reflectivity, linear.
    pub rcs: f64,
}

impl Scatterer {
    pub fn new(x0: f64, y0: f64, z0: f64, rcs: f64) -> Self {
        Self { x0, y0, z0, rcs }
    }

    pub fn is_valid(&self) -> bool {
        self.rcs > 0.0 && self.x0.is_finite() && self.y0.is_finite() && self.z0.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShipModel {
    pub scatterers: Vec<Scatterer>,
    /// Known length overall, simulation only.
    #[serde(default)]
    pub loa_true: Option<f64>,
}

impl ShipModel {
    pub fn new(scatterers: Vec<Scatterer>) -> Self {
        Self { scatterers, loa_true: None }
    }

    pub fn with_loa(mut self, loa: f64) -> Self {
        self.loa_true = Some(loa);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scatterers.is_empty() {
            return Err(CoreError::InvalidInput("ship has no scatterers".into()));
        }
        if let Some(s) = self.scatterers.iter().find(|s| !s.is_valid()) {
            return Err(CoreError::InvalidInput(format!("invalid scatterer {s:?}")));
        }
        if let Some(loa) = self.loa_true {
            let (lo, hi) = self.x_extent();
            if hi - lo > loa + 1e-9 {
                return Err(CoreError::InvalidInput(format!(
                    "alongship extent {} exceeds loa {loa}",
                    hi - lo
                )));
            }
        }
        Ok(())
    }

    pub fn x_extent(&self) -> (f64, f64) {
        self.scatterers
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.x0), hi.max(s.x0)))
    }

    /// Unweighted centroid of the scatterers.
    pub fn centroid(&self) -> [f64; 3] {
        let n = self.scatterers.len().max(1) as f64;
        let mut c = [0.0; 3];
        for s in &self.scatterers {
            c[0] += s.x0;
            c[1] += s.y0;
            c[2] += s.z0;
        }
        c.map(|v| v / n)
    }

    /// Copy with the centroid moved to the origin.
    pub fn centered(&self) -> ShipModel {
        let c = self.centroid();
        ShipModel {
            scatterers: self
                .scatterers
                .iter()
                .map(|s| Scatterer::new(s.x0 - c[0], s.y0 - c[1], s.z0 - c[2], s.rcs))
                .collect(),
            loa_true: self.loa_true,
        }
    }
}

/// Second moments of a centroid-removed ship.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShipMoments {
    /// ⟨x0²⟩ (m²).
    pub x2: f64,
    /// ⟨y0²⟩/⟨x0²⟩.
    pub bsq: f64,
    /// ⟨z0²⟩/⟨x0²⟩.
    pub hsq: f64,
}

/// Alongship second moment and the width and height ratios bsq, hsq.
pub fn ship_moments(model: &ShipModel) -> Result<ShipMoments> {
    if model.scatterers.is_empty() {
        return Err(CoreError::ZeroAlongshipVariance);
    }
    let c = model.centroid();
    let n = model.scatterers.len() as f64;
    let (mut x2, mut y2, mut z2) = (0.0, 0.0, 0.0);
    for s in &model.scatterers {
        x2 += (s.x0 - c[0]).powi(2);
        y2 += (s.y0 - c[1]).powi(2);
        z2 += (s.z0 - c[2]).powi(2);
    }
    x2 /= n;
    y2 /= n;
    z2 /= n;
    let scale = model
        .scatterers
        .iter()
        .map(|s| s.x0.abs().max(s.y0.abs()).max(s.z0.abs()))
        .fold(0.0, f64::max);
    if x2 <= (1e-12 * scale).powi(2) || x2 == 0.0 {
        return Err(CoreError::ZeroAlongshipVariance);
    }
    Ok(ShipMoments { x2, bsq: y2 / x2, hsq: z2 / x2 })
}

/// Aspect and tilt state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngleSample {
    pub t: f64,
    pub phi: f64,
    pub theta: f64,
    pub phi_dot: f64,
    pub theta_dot: f64,
    pub phi_ddot: f64,
    pub theta_ddot: f64,
}

impl AngleSample {
    pub fn at_rest(t: f64, phi: f64, theta: f64) -> Self {
        Self { t, phi, theta, ..Default::default() }
    }
}

/// Uniformly sampled angle history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleTrack {
    pub samples: Vec<AngleSample>,
    pub dt: f64,
}

impl AngleTrack {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(CoreError::InvalidInput("track dt must be positive".into()));
        }
        for w in self.samples.windows(2) {
            let step = w[1].t - w[0].t;
            if step <= 0.0 || (step - self.dt).abs() > 1e-6 * self.dt.max(1.0) {
                return Err(CoreError::InvalidInput(format!(
                    "non-uniform track spacing at t = {}",
                    w[1].t
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn phi(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phi).collect()
    }

    pub fn theta(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta).collect()
    }

    pub fn phi_dot(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phi_dot).collect()
    }

    pub fn theta_dot(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta_dot).collect()
    }

    /// Assemble a track from angle series, differentiating numerically.
    pub fn from_angles(t: &[f64], phi: &[f64], theta: &[f64]) -> AngleTrack {
        let dt = if t.len() > 1 { t[1] - t[0] } else { 1.0 };
        let pd = crate::stats::gradient(phi, dt);
        let td = crate::stats::gradient(theta, dt);
        let pdd = crate::stats::gradient(&pd, dt);
        let tdd = crate::stats::gradient(&td, dt);
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
}

/// One detected scatterer in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    pub frame_index: usize,
    /// Frame center time (s).
    pub t: f64,
    /// Signal-to-noise ratio (dB).
    pub snr: f64,
    /// Range offset (m).
    pub r: f64,
    /// Range rate (m/s).
    pub f: f64,
    /// Range acceleration (m/s²).
    pub a: f64,
    /// Doppler width (m/s); carried through I/O, not used.
    #[serde(default)]
    pub doppler_width: Option<f64>,
    /// Scatterer identity, simulation only.
    #[serde(default)]
    pub truth_id: Option<usize>,
}

impl TargetReport {
    pub fn is_finite(&self) -> bool {
        self.snr.is_finite() && self.r.is_finite() && self.f.is_finite() && self.a.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: f64,
    /// Integration time T (s).
    pub integration_time: f64,
    pub reports: Vec<TargetReport>,
}

/// Dwell-level metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DwellMeta {
    pub frame_interval: f64,
    pub integration_time: f64,
    /// Mean aspect φ0 (rad).
    pub mean_aspect: f64,
    /// Mean tilt θ0 (rad).
    pub mean_tilt: f64,
    /// Range resolution (m).
    pub range_resolution: f64,
    /// Radar wavelength (m).
    pub wavelength: f64,
}

impl Default for DwellMeta {
    fn default() -> Self {
        Self {
            frame_interval: 0.5,
            integration_time: 1.0,
            mean_aspect: 45.0 * crate::DEG,
            mean_tilt: 30.0 * crate::DEG,
            range_resolution: 1.0,
            wavelength: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dwell {
    pub meta: DwellMeta,
    pub frames: Vec<Frame>,
}

impl Dwell {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(CoreError::EmptyDwell);
        }
        let dt = self.meta.frame_interval;
        for w in self.frames.windows(2) {
            let step = w[1].t - w[0].t;
            if step <= 0.0 {
                return Err(CoreError::InvalidInput(format!(
                    "frame times not increasing at t = {}",
                    w[1].t
                )));
            }
            if (step - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(CoreError::InvalidInput(format!(
                    "frame spacing {step} differs from frame interval {dt}"
                )));
            }
        }
        Ok(())
    }
}
