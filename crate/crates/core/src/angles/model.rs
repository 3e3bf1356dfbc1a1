//! Covariances implied by an angle track and the ship shape ratios.

use serde::{Deserialize, Serialize};

use crate::pose::motion_rows;
use crate::ship::AngleTrack;

/// Output covariances for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCovariances {
    pub cov_rf: f64,
    pub cov_ff: f64,
    pub d: f64,
}

/// Output covariances including the acceleration terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelMoments {
    pub cov_rf: f64,
    pub cov_ff: f64,
    pub cov_ra: f64,
    pub cov_fa: f64,
    pub d: f64,
}

/// Thin-ship denominator 1 + bsq·tan²φ + hsq·tan²θ/cos²φ.
pub fn denom(phi: f64, theta: f64, bsq: f64, hsq: f64) -> f64 {
    let (tf, tt, cf) = (phi.tan(), theta.tan(), phi.cos());
    1.0 + bsq * tf * tf + hsq * tt * tt / (cf * cf)
}

/// Closed-form covariances at one angle state.
pub fn covariances_at(phi: f64, theta: f64, phi_dot: f64, theta_dot: f64, bsq: f64, hsq: f64) -> ModelCovariances {
    let (tf, tt, cf) = (phi.tan(), theta.tan(), phi.cos());
    let den = denom(phi, theta, bsq, hsq);
    let cov_rf = -(phi_dot * (1.0 - bsq) * tf + theta_dot * (1.0 + bsq * tf * tf - hsq / (cf * cf)) * tt) / den;
    let num = (phi_dot * tf + theta_dot * tt).powi(2)
        + bsq * (phi_dot - theta_dot * tt * tf).powi(2)
        + hsq * theta_dot * theta_dot / (cf * cf);
    let cov_ff = num / den;
    ModelCovariances { cov_rf, cov_ff, d: cov_ff - cov_rf * cov_rf }
}

/// The covariance series implied by the angles alone.
pub fn model_covariances(track: &AngleTrack, bsq: f64, hsq: f64) -> Vec<ModelCovariances> {
    track
        .samples
        .iter()
        .map(|s| covariances_at(s.phi, s.theta, s.phi_dot, s.theta_dot, bsq, hsq))
        .collect()
}

/// All four scaled covariances from the motion-matrix rows, weighting the
/// x, y and z columns by 1, bsq and hsq.
pub fn model_moments(track: &AngleTrack, bsq: f64, hsq: f64) -> Vec<ModelMoments> {
    let w = [1.0, bsq, hsq];
    track
        .samples
        .iter()
        .map(|s| {
            let m = motion_rows(s);
            let dot = |i: usize, j: usize| (0..3).map(|k| w[k] * m[i][k] * m[j][k]).sum::<f64>();
            let rr = dot(0, 0);
            let cov_rf = dot(0, 1) / rr;
            let cov_ff = dot(1, 1) / rr;
            ModelMoments {
                cov_rf,
                cov_ff,
                cov_ra: dot(0, 2) / rr,
                cov_fa: dot(1, 2) / rr,
                d: cov_ff - cov_rf * cov_rf,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ship::AngleSample;
    use crate::simulator::{build_angle_track, ScenarioConfig};
    use crate::DEG;

    #[test]
    fn zero_rates_give_zero_covariances() {
        let c = covariances_at(0.7, 0.4, 0.0, 0.0, 0.05, 0.03);
        assert_eq!((c.cov_rf, c.cov_ff), (0.0, 0.0));
    }

    #[test]
    fn pure_tilt_rate_reduction() {
        let (theta, td) = (30.0 * DEG, 0.02);
        let c = covariances_at(0.0, theta, 0.0, td, 0.0, 0.0);
        let den = 1.0;
        assert!((c.cov_rf + td * theta.tan() / den).abs() < 1e-15);
        assert!(c.d.abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_row_form() {
        let cfg = ScenarioConfig::default();
        let tr = build_angle_track(&cfg);
        let (b, h) = (0.04, 0.03);
        for (c, m) in model_covariances(&tr, b, h).iter().zip(model_moments(&tr, b, h)) {
            assert!((c.cov_rf - m.cov_rf).abs() < 1e-12 * m.cov_ff.sqrt());
            assert!((c.cov_ff - m.cov_ff).abs() < 1e-12 * m.cov_ff);
        }
    }

    #[test]
    fn gram_form_of_d() {
        let s = AngleSample { t: 0.0, phi: 0.8, theta: 0.5, phi_dot: 0.01, theta_dot: -0.02, ..Default::default() };
        let (b, h) = (0.05, 0.02);
        let c = covariances_at(s.phi, s.theta, s.phi_dot, s.theta_dot, b, h);
        let (sf, cf) = s.phi.sin_cos();
        let (st, ct) = s.theta.sin_cos();
        let (pd, td) = (s.phi_dot, s.theta_dot);
        let k = (ct * ct * cf * cf * denom(s.phi, s.theta, b, h)).powi(2);
        let gram = b * (ct * ct * pd).powi(2)
            + h * (cf * td + st * ct * sf * pd).powi(2)
            + b * h * (sf * td - st * ct * cf * pd).powi(2);
        assert!((c.d - gram / k).abs() < 1e-12 * c.cov_ff);
    }
}
