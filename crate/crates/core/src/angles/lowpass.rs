//! Low-band aspect solution: the slow part of the covariance signal is
//! attributed to a turning motion in aspect only.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::stats::{gradient, integrate_zero_mean, mean};
use crate::DEG;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowpassSolution {
    /// Slow aspect track φ0 + φ_M (rad).
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    /// Mean of `phi_dot` (rad/s).
    pub steady_rate: f64,
    /// First-order solution φ0 + ∫LHS/(P·tanφ0), kept as a diagnostic.
    pub phi_linear: Vec<f64>,
    /// Frames whose quadratic had no real root and were clamped to the vertex.
    pub clamped: Vec<bool>,
}

/// Aspect track from the low band of −CovRF·denom.
///
/// The integral of the low band equals `P·φ_M·tanφ0 + (P/2)·sec²φ0·φ_M²`
/// up to a constant. Each frame takes the root of smaller |φ_M|, and the
/// constant is chosen so that φ_M has zero mean.
pub fn lowpass_aspect_solve(lhs_low: &[f64], phi0: f64, p: f64, dt: f64) -> Result<LowpassSolution> {
    let tn = phi0.tan();
    if tn.abs() <= (3.0 * DEG).tan() {
        return Err(CoreError::AspectUnobservable);
    }
    let integral = integrate_zero_mean(lhs_low, dt);
    let a = 0.5 / phi0.cos().powi(2);
    let mut offset = 0.0;
    let mut phi_m = vec![0.0; lhs_low.len()];
    let mut clamped = vec![false; lhs_low.len()];
    for _ in 0..50 {
        for (i, v) in integral.iter().enumerate() {
            let j = (v + offset) / p;
            let disc = tn * tn + 4.0 * a * j;
            clamped[i] = disc < 0.0;
            phi_m[i] = (-tn + tn.signum() * disc.max(0.0).sqrt()) / (2.0 * a);
        }
        let m = mean(&phi_m);
        if m.abs() < 1e-15 {
            break;
        }
        offset -= p * tn * m;
    }
    let phi: Vec<f64> = phi_m.iter().map(|m| phi0 + m).collect();
    let phi_dot = gradient(&phi, dt);
    let phi_linear = integral.iter().map(|v| phi0 + v / (p * tn)).collect();
    Ok(LowpassSolution { steady_rate: mean(&phi_dot), phi, phi_dot, phi_linear, clamped })
}
