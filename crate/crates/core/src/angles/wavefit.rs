//! Wave-band fit of the angle fluctuations.
//!
//! Per frame, the wave band of −CovRF·denom fixes a line in the
//! (φ̇, θ̇) plane and the intrinsic Doppler variance D fixes a conic, so the
//! tilt rate solves a quadratic. The branch sequence is chosen by dynamic
//! programming over the two roots, the rates are band-limited and
//! integrated, and the solve is repeated with the updated angles. The shape
//! ratios bsq and hsq are found by minimizing the covariance residual.

use serde::{Deserialize, Serialize};

use super::bands::BandProjector;
use super::lowpass::{lowpass_aspect_solve, LowpassSolution};
use super::model::{covariances_at, denom};
use crate::error::{CoreError, Result};
use crate::stats::{gradient, integrate_zero_mean, mean, variance};

/// Options for the wave-band fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Line/conic solve passes per fit.
    pub iterations: usize,
    /// Weight of the rate-energy term against roughness in branch selection.
    pub energy_weight: f64,
    /// Knot spacing of the wave-band envelope, in periods.
    pub envelope: f64,
    /// Bounds and size of the logarithmic bsq/hsq starting grid.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_grid: usize,
    /// Pattern-search refinement steps.
    pub refine_steps: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            iterations: 3,
            energy_weight: 2.0,
            envelope: 1.0,
            ratio_min: 0.005,
            ratio_max: 0.3,
            ratio_grid: 9,
            refine_steps: 40,
        }
    }
}

/// Data seen by the fit: uniformly sampled cov_rf and D.
#[derive(Debug, Clone, Copy)]
pub struct FitInputs<'a> {
    pub t: &'a [f64],
    pub dt: f64,
    pub cov_rf: &'a [f64],
    pub d: &'a [f64],
    pub phi0: f64,
    pub theta0: f64,
}

/// Fit state for one candidate period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitState {
    pub period: f64,
    /// Wave-band aspect fluctuation (rad).
    pub phi_hat: Vec<f64>,
    /// Wave-band tilt fluctuation (rad).
    pub theta_hat: Vec<f64>,
    pub bsq_est: f64,
    pub hsq_est: f64,
    /// Slow aspect correction φ_M (rad).
    pub phi_m: Vec<f64>,
    /// 1 − bsq
    pub p: f64,
    /// 1 + bsq·tan²φ0 − hsq/cos²φ0
    pub q: f64,
    /// P·tan(φ0 + φ_M)·cosφ0 per frame.
    pub p_hat: Vec<f64>,
    /// 1 + bsq·tan²φ0 + hsq·tan²θ0/cos²φ0
    pub denom: f64,
    pub residual_rms: f64,
    /// Full aspect and tilt tracks (rad).
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub steady_rate: f64,
    /// Frames whose quadratic discriminant was negative and floored.
    pub floored: Vec<bool>,
    /// bsq was clamped below 1.
    pub bsq_clamped: bool,
}

/// Roots of a·h² + b·h + c = 0. A negative discriminant is floored to zero
/// and reported.
pub fn solve_tilt_quadratic(a: f64, b: f64, c: f64) -> (f64, f64, bool) {
    if a.abs() < 1e-300 {
        let h = if b != 0.0 { -c / b } else { 0.0 };
        return (h, h, false);
    }
    let disc = b * b - 4.0 * a * c;
    let floored = disc < 0.0;
    let s = disc.max(0.0).sqrt();
    ((-b + s) / (2.0 * a), (-b - s) / (2.0 * a), floored)
}

/// Choose one of two candidate (v, u) pairs per frame minimizing the summed
/// squared second differences plus `mu`·(v² + u²).
pub fn select_branch(v: &[[f64; 2]], u: &[[f64; 2]], mu: f64) -> Vec<usize> {
    let n = v.len();
    if n < 3 {
        return (0..n).map(|i| if v[i][0].abs() <= v[i][1].abs() { 0 } else { 1 }).collect();
    }
    let e = |i: usize, s: usize| mu * (v[i][s] * v[i][s] + u[i][s] * u[i][s]);
    // cost[a][b]: best cost with state a at i−1 and b at i
    let mut cost = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            cost[a][b] = e(0, a) + e(1, b);
        }
    }
    let mut back = Vec::with_capacity(n - 2);
    for i in 2..n {
        let mut next = [[f64::INFINITY; 2]; 2];
        let mut bk = [[0usize; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let dv = v[i][c] - 2.0 * v[i - 1][b] + v[i - 2][a];
                    let du = u[i][c] - 2.0 * u[i - 1][b] + u[i - 2][a];
                    let val = cost[a][b] + dv * dv + du * du + e(i, c);
                    if val < next[b][c] {
                        next[b][c] = val;
                        bk[b][c] = a;
                    }
                }
            }
        }
        cost = next;
        back.push(bk);
    }
    let (mut b, mut c) = (0, 0);
    for bb in 0..2 {
        for cc in 0..2 {
            if cost[bb][cc] < cost[b][c] {
                b = bb;
                c = cc;
            }
        }
    }
    let mut s = vec![0; n];
    s[n - 1] = c;
    s[n - 2] = b;
    for i in (2..n).rev() {
        s[i - 2] = back[i - 2][s[i - 1]][s[i]];
    }
    s
}

/// Outcome of one fit at fixed period and shape ratios.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub residual: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub phi_hat: Vec<f64>,
    pub theta_hat: Vec<f64>,
    pub lowpass: LowpassSolution,
    pub floored: Vec<bool>,
}

/// Normalized RMS misfit of output cov_rf and D against the data.
pub fn covariance_residual(rf: &[f64], d: &[f64], rf_out: &[f64], d_out: &[f64]) -> f64 {
    let ms = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64;
    let floor = 1e-300;
    (ms(rf_out, rf) / variance(rf).max(floor) + ms(d_out, d) / variance(d).max(floor)).sqrt()
}

/// One complete fit at a given period and (bsq, hsq).
pub fn fit_at(
    inp: &FitInputs,
    proj: &BandProjector,
    period: f64,
    bsq: f64,
    hsq: f64,
    opts: &FitOptions,
) -> Result<FitOutcome> {
    let n = inp.t.len();
    let (phi0, theta0, dt) = (inp.phi0, inp.theta0, inp.dt);
    let den0 = denom(phi0, theta0, bsq, hsq);
    let lhs0: Vec<f64> = inp.cov_rf.iter().map(|c| -c * den0).collect();
    let low = proj.split(&lhs0).low;
    let lp = lowpass_aspect_solve(&low, phi0, 1.0 - bsq, dt)?;
    let omega = 2.0 * std::f64::consts::PI / period;
    let mu = opts.energy_weight * (omega * dt).powi(4);

    let mut phi_hat = vec![0.0; n];
    let mut theta_hat = vec![0.0; n];
    let mut floored = vec![false; n];
    for _ in 0..opts.iterations {
        let mut v = vec![[0.0; 2]; n];
        let mut u = vec![[0.0; 2]; n];
        for i in 0..n {
            let ph = lp.phi[i] + phi_hat[i];
            let th = theta0 + theta_hat[i];
            let (sf, cf) = ph.sin_cos();
            let (st, ct) = th.sin_cos();
            let (tf, tt) = (ph.tan(), th.tan());
            let den = denom(ph, th, bsq, hsq);
            let al = (1.0 - bsq) * tf;
            let be = (1.0 + bsq * tf * tf - hsq / (cf * cf)) * tt;
            let lw = -inp.cov_rf[i] * den - al * lp.phi_dot[i];
            // φ̇ = p0 + p1·θ̇ on the line
            let p0 = lp.phi_dot[i] + lw / al;
            let p1 = -be / al;
            let k = (ct * ct * cf * cf * den).powi(2);
            let terms = [(bsq, ct * ct, 0.0), (hsq, st * ct * sf, cf), (bsq * hsq, -st * ct * cf, sf)];
            let (mut qa, mut qb, mut qc) = (0.0, 0.0, -inp.d[i].max(0.0) * k);
            for (w, c1, c2) in terms {
                let e0 = c1 * p0;
                let e1 = c1 * p1 + c2;
                qa += w * e1 * e1;
                qb += w * 2.0 * e0 * e1;
                qc += w * e0 * e0;
            }
            let (r1, r2, fl) = solve_tilt_quadratic(qa, qb, qc);
            floored[i] = fl;
            v[i] = [r1, r2];
            u[i] = [(lw - be * r1) / al, (lw - be * r2) / al];
        }
        let pick = select_branch(&v, &u, mu);
        let vs: Vec<f64> = (0..n).map(|i| v[i][pick[i]]).collect();
        let us: Vec<f64> = (0..n).map(|i| u[i][pick[i]]).collect();
        theta_hat = integrate_zero_mean(&proj.wave(&vs), dt);
        phi_hat = integrate_zero_mean(&proj.wave(&us), dt);
    }
    let phi: Vec<f64> = (0..n).map(|i| lp.phi[i] + phi_hat[i]).collect();
    let theta: Vec<f64> = theta_hat.iter().map(|h| theta0 + h).collect();
    let pd = gradient(&phi, dt);
    let td = gradient(&theta, dt);
    let (mut rf_out, mut d_out) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let c = covariances_at(phi[i], theta[i], pd[i], td[i], bsq, hsq);
        rf_out[i] = c.cov_rf;
        d_out[i] = c.d;
    }
    let residual = covariance_residual(inp.cov_rf, inp.d, &rf_out, &d_out);
    Ok(FitOutcome { residual, phi, theta, phi_hat, theta_hat, lowpass: lp, floored })
}

fn fit_residual(inp: &FitInputs, proj: &BandProjector, period: f64, b: f64, h: f64, opts: &FitOptions) -> f64 {
    match fit_at(inp, proj, period, b, h, opts) {
        Ok(o) if o.residual.is_finite() => o.residual,
        _ => f64::INFINITY,
    }
}

/// Fit the wave band at one period, searching bsq and hsq.
///
/// A logarithmic grid seeds a compass search that minimizes the covariance
/// residual.
pub fn waveband_joint_fit(inp: &FitInputs, period: f64, opts: &FitOptions) -> Result<FitState> {
    let n = inp.t.len();
    let proj = BandProjector::new(inp.t, period, opts.envelope);
    let quiet = inp.cov_rf.iter().chain(inp.d).all(|v| v.abs() < 1e-300);
    if quiet {
        let lp = lowpass_aspect_solve(&vec![0.0; n], inp.phi0, 1.0, inp.dt)?;
        return Ok(state_from(inp, period, 0.0, 0.0, false, FitOutcome {
            residual: 0.0,
            phi: lp.phi.clone(),
            theta: vec![inp.theta0; n],
            phi_hat: vec![0.0; n],
            theta_hat: vec![0.0; n],
            lowpass: lp,
            floored: vec![false; n],
        }));
    }
    let g = opts.ratio_grid.max(2);
    let grid: Vec<f64> = (0..g)
        .map(|k| opts.ratio_min * (opts.ratio_max / opts.ratio_min).powf(k as f64 / (g - 1) as f64))
        .collect();
    let mut best = (f64::INFINITY, grid[0], grid[0]);
    for &b in &grid {
        for &h in &grid {
            let r = fit_residual(inp, &proj, period, b, h, opts);
            if r < best.0 {
                best = (r, b, h);
            }
        }
    }
    let (mut r, mut b, mut h) = best;
    if !r.is_finite() {
        return Err(CoreError::InvalidInput(format!("no finite fit at period {period}")));
    }
    let (mut sb, mut sh) = (0.3 * b, 0.3 * h);
    for _ in 0..opts.refine_steps {
        let mut improved = false;
        for (db, dh) in [(sb, 0.0), (-sb, 0.0), (0.0, sh), (0.0, -sh)] {
            let (nb, nh) = ((b + db).clamp(1e-4, 0.9), (h + dh).max(1e-4));
            let rr = fit_residual(inp, &proj, period, nb, nh, opts);
            if rr < r {
                r = rr;
                b = nb;
                h = nh;
                improved = true;
            }
        }
        if !improved {
            sb *= 0.5;
            sh *= 0.5;
            if sb < 1e-4 * b && sh < 1e-4 * h {
                break;
            }
        }
    }
    let clamped = b >= 0.9;
    let out = fit_at(inp, &proj, period, b, h, opts)?;
    Ok(state_from(inp, period, b, h, clamped, out))
}

fn state_from(inp: &FitInputs, period: f64, b: f64, h: f64, bsq_clamped: bool, o: FitOutcome) -> FitState {
    let (phi0, theta0) = (inp.phi0, inp.theta0);
    let p = 1.0 - b;
    let c2 = phi0.cos().powi(2);
    let phi_m: Vec<f64> = o.lowpass.phi.iter().map(|v| v - phi0).collect();
    FitState {
        period,
        p_hat: o.lowpass.phi.iter().map(|v| p * v.tan() * phi0.cos()).collect(),
        phi_m,
        bsq_est: b,
        hsq_est: h,
        p,
        q: 1.0 + b * phi0.tan().powi(2) - h / c2,
        denom: denom(phi0, theta0, b, h),
        residual_rms: o.residual,
        steady_rate: mean(&gradient(&o.phi, inp.dt)),
        phi_hat: o.phi_hat,
        theta_hat: o.theta_hat,
        phi: o.phi,
        theta: o.theta,
        floored: o.floored,
        bsq_clamped,
    }
}
