//! Per-frame scaled covariances and the two-parameter focus regression.
//!
//! All covariances are centered and divided by the range variance, so
//! `cov_rf = ⟨r·f⟩/⟨r·r⟩` and so on. Per frame, the acceleration is modeled
//! as a linear field `a ≈ a_r·r + a_f·f`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::ship::{Dwell, TargetReport};

/// Above this squared range-Doppler correlation the regression is damped.
pub const CRF2_GUARD: f64 = 0.98;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Uniform,
    /// Weight each report by its linear SNR.
    Snr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMoments {
    pub t: f64,
    pub n_targets: usize,
    pub valid: bool,
    /// 1/s
    pub cov_rf: f64,
    /// 1/s²
    pub cov_ff: f64,
    /// 1/s²
    pub cov_ra: f64,
    /// 1/s³
    pub cov_fa: f64,
    pub crf: f64,
    /// cov_ff − cov_rf² (1/s²)
    pub d_intrinsic: f64,
    /// m²
    pub r_var: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// ∂a/∂r (1/s²)
    pub a_r: f64,
    /// ∂a/∂f (1/s)
    pub a_f: f64,
    /// The determinant guard damped or nulled the regression.
    pub guarded: bool,
}

impl FrameMoments {
    fn invalid(t: f64, n: usize) -> Self {
        Self {
            t,
            n_targets: n,
            valid: false,
            cov_rf: 0.0,
            cov_ff: 0.0,
            cov_ra: 0.0,
            cov_fa: 0.0,
            crf: 0.0,
            d_intrinsic: 0.0,
            r_var: 0.0,
            r_min: f64::NAN,
            r_max: f64::NAN,
            a_r: 0.0,
            a_f: 0.0,
            guarded: false,
        }
    }
}

/// Result of the focus regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusFit {
    pub a_r: f64,
    pub a_f: f64,
    /// Guard shrinkage was applied or the determinant vanished.
    pub guarded: bool,
}

/// Regression slopes from scaled covariances, damped near collinearity.
///
/// When crf² exceeds [`CRF2_GUARD`] the slopes are multiplied by
/// `(1 − crf²)/(1 − CRF2_GUARD)`, which cancels the vanishing determinant.
pub fn focus_from_covariances(cov_rf: f64, cov_ff: f64, cov_ra: f64, cov_fa: f64) -> FocusFit {
    let det = cov_ff - cov_rf * cov_rf;
    if !(cov_ff > 0.0) || !det.is_finite() {
        return FocusFit { a_r: 0.0, a_f: 0.0, guarded: true };
    }
    let crf2 = (cov_rf * cov_rf / cov_ff).min(1.0);
    let num_r = cov_ra * cov_ff - cov_fa * cov_rf;
    let num_f = cov_fa - cov_ra * cov_rf;
    if crf2 > CRF2_GUARD {
        // num/det · (1 − crf²)/(1 − guard) with det = cov_ff·(1 − crf²)
        let k = 1.0 / (cov_ff * (1.0 - CRF2_GUARD));
        return FocusFit { a_r: num_r * k, a_f: num_f * k, guarded: true };
    }
    FocusFit { a_r: num_r / det, a_f: num_f / det, guarded: false }
}

struct Centered {
    w: Vec<f64>,
    r: Vec<f64>,
    f: Vec<f64>,
    a: Vec<f64>,
}

fn centered(reports: &[TargetReport], weighting: Weighting) -> Centered {
    let w: Vec<f64> = match weighting {
        Weighting::Uniform => vec![1.0; reports.len()],
        Weighting::Snr => reports.iter().map(|r| 10f64.powf(r.snr / 10.0)).collect(),
    };
    let sw: f64 = w.iter().sum();
    let wmean = |g: &dyn Fn(&TargetReport) -> f64| {
        reports.iter().zip(&w).map(|(r, wi)| wi * g(r)).sum::<f64>() / sw
    };
    let (mr, mf, ma) = (wmean(&|x| x.r), wmean(&|x| x.f), wmean(&|x| x.a));
    Centered {
        r: reports.iter().map(|x| x.r - mr).collect(),
        f: reports.iter().map(|x| x.f - mf).collect(),
        a: reports.iter().map(|x| x.a - ma).collect(),
        w: w.iter().map(|v| v / sw).collect(),
    }
}

fn wdot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Scaled covariances, correlation, intrinsic Doppler variance and focus
/// slopes for one frame.
pub fn frame_moments(reports: &[TargetReport], weighting: Weighting) -> FrameMoments {
    let t = reports.first().map_or(f64::NAN, |r| r.t);
    let n = reports.len();
    if n < 3 || reports.iter().any(|r| !r.is_finite()) {
        return FrameMoments::invalid(t, n);
    }
    let c = centered(reports, weighting);
    let rr = wdot(&c.w, &c.r, &c.r);
    let scale = reports.iter().map(|x| x.r.abs()).fold(0.0, f64::max);
    if !(rr > (1e-12 * scale).powi(2)) {
        return FrameMoments::invalid(t, n);
    }
    let cov_rf = wdot(&c.w, &c.r, &c.f) / rr;
    let cov_ff = wdot(&c.w, &c.f, &c.f) / rr;
    let cov_ra = wdot(&c.w, &c.r, &c.a) / rr;
    let cov_fa = wdot(&c.w, &c.f, &c.a) / rr;
    let crf = if cov_ff > 0.0 { (cov_rf / cov_ff.sqrt()).clamp(-1.0, 1.0) } else { 0.0 };
    let fit = focus_from_covariances(cov_rf, cov_ff, cov_ra, cov_fa);
    let (r_min, r_max) = reports
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x.r), hi.max(x.r)));
    FrameMoments {
        t,
        n_targets: n,
        valid: true,
        cov_rf,
        cov_ff,
        cov_ra,
        cov_fa,
        crf,
        d_intrinsic: cov_ff - cov_rf * cov_rf,
        r_var: rr,
        r_min,
        r_max,
        a_r: fit.a_r,
        a_f: fit.a_f,
        guarded: fit.guarded,
    }
}

/// Least-squares slopes of centered acceleration on centered range and
/// Doppler, with the determinant guard.
pub fn focus_regression(reports: &[TargetReport]) -> FocusFit {
    let m = frame_moments(reports, Weighting::Uniform);
    if !m.valid {
        return FocusFit { a_r: 0.0, a_f: 0.0, guarded: true };
    }
    FocusFit { a_r: m.a_r, a_f: m.a_f, guarded: m.guarded }
}

/// Frame moments for every frame of a dwell, in order.
pub fn moments_series(dwell: &Dwell, weighting: Weighting) -> Result<Vec<FrameMoments>> {
    if dwell.frames.is_empty() {
        return Err(CoreError::EmptyDwell);
    }
    Ok(dwell
        .frames
        .iter()
        .map(|fr| {
            let mut m = frame_moments(&fr.reports, weighting);
            m.t = fr.t;
            m
        })
        .collect())
}

/// Derivative of a sampled series, skipping invalid samples.
///
/// Interior points use the three-point formula on the actual (possibly
/// uneven) spacing of their valid neighbours; end points are one-sided.
/// Invalid samples receive the derivative interpolated from their
/// neighbours.
pub fn time_derivative(t: &[f64], y: &[f64], valid: &[bool]) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..t.len()).filter(|&i| valid[i] && y[i].is_finite()).collect();
    if idx.len() < 3 {
        return Err(CoreError::TooFewSamples { needed: 3, have: idx.len() });
    }
    let n = idx.len();
    let mut dv = vec![0.0; n];
    let d3 = |a: usize, b: usize, c: usize, at: usize| -> f64 {
        // derivative at t[at] of the quadratic through (a, b, c)
        let (ta, tb, tc, x) = (t[a], t[b], t[c], t[at]);
        y[a] * (2.0 * x - tb - tc) / ((ta - tb) * (ta - tc))
            + y[b] * (2.0 * x - ta - tc) / ((tb - ta) * (tb - tc))
            + y[c] * (2.0 * x - ta - tb) / ((tc - ta) * (tc - tb))
    };
    dv[0] = d3(idx[0], idx[1], idx[2], idx[0]);
    dv[n - 1] = d3(idx[n - 3], idx[n - 2], idx[n - 1], idx[n - 1]);
    for k in 1..n - 1 {
        dv[k] = d3(idx[k - 1], idx[k], idx[k + 1], idx[k]);
    }
    let mut out = vec![0.0; t.len()];
    for (k, &i) in idx.iter().enumerate() {
        out[i] = dv[k];
    }
    for i in 0..t.len() {
        if valid[i] && y[i].is_finite() {
            continue;
        }
        let after = idx.partition_point(|&j| j < i);
        out[i] = if after == 0 {
            dv[0]
        } else if after == n {
            dv[n - 1]
        } else {
            let (j0, j1) = (idx[after - 1], idx[after]);
            let w = (t[i] - t[j0]) / (t[j1] - t[j0]);
            dv[after - 1] * (1.0 - w) + dv[after] * w
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rep(r: f64, f: f64, a: f64) -> TargetReport {
        TargetReport { frame_index: 0, t: 1.0, snr: 20.0, r, f, a, doppler_width: None, truth_id: None }
    }

    #[test]
    fn collinear_frame_is_pearls() {
        let reps = [rep(-5.0, -1.5, 0.0), rep(0.0, 0.0, 0.0), rep(7.0, 2.1, 0.0)];
        let m = frame_moments(&reps, Weighting::Uniform);
        assert!(m.valid);
        assert!((m.crf - 1.0).abs() < 1e-12);
        assert!(m.d_intrinsic.abs() < 1e-12);
    }

    #[test]
    fn too_few_or_flat_frames_invalid() {
        assert!(!frame_moments(&[rep(1.0, 0.0, 0.0), rep(2.0, 1.0, 0.0)], Weighting::Uniform).valid);
        let flat = [rep(3.0, 0.0, 0.0), rep(3.0, 1.0, 0.0), rep(3.0, 2.0, 1.0)];
        assert!(!frame_moments(&flat, Weighting::Uniform).valid);
    }

    #[test]
    fn exact_linear_field_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let reps: Vec<_> = (0..12)
            .map(|_| {
                let r = rng.random_range(-40.0..40.0);
                let f = rng.random_range(-2.0..2.0);
                rep(r, f, 2.0 * r + 3.0 * f)
            })
            .collect();
        let fit = focus_regression(&reps);
        assert!(!fit.guarded);
        assert!((fit.a_r - 2.0).abs() < 1e-10 && (fit.a_f - 3.0).abs() < 1e-10);
    }

    #[test]
    fn constant_acceleration_gives_zero_slopes() {
        let reps: Vec<_> = (0..6).map(|i| rep(i as f64, (i * i) as f64 * 0.1, 4.0)).collect();
        let fit = focus_regression(&reps);
        assert!(fit.a_r.abs() < 1e-12 && fit.a_f.abs() < 1e-12);
    }

    fn oracle(reps: &[TargetReport]) -> (f64, f64) {
        let n = reps.len() as f64;
        let mr = reps.iter().map(|x| x.r).sum::<f64>() / n;
        let mf = reps.iter().map(|x| x.f).sum::<f64>() / n;
        let ma = reps.iter().map(|x| x.a).sum::<f64>() / n;
        let x = DMatrix::from_fn(reps.len(), 2, |i, j| if j == 0 { reps[i].r - mr } else { reps[i].f - mf });
        let y = DVector::from_fn(reps.len(), |i, _| reps[i].a - ma);
        let beta = x.clone().svd(true, true).solve(&y, 1e-14).unwrap();
        (beta[0], beta[1])
    }

    #[test]
    fn random_frame_matches_lstsq_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reps: Vec<_> = (0..20)
            .map(|_| rep(rng.random_range(-50.0..50.0), rng.random_range(-3.0..3.0), rng.random_range(-1.0..1.0)))
            .collect();
        let fit = focus_regression(&reps);
        let (ar, af) = oracle(&reps);
        assert!(!fit.guarded);
        assert!((fit.a_r - ar).abs() < 1e-10 * ar.abs().max(1e-3));
        assert!((fit.a_f - af).abs() < 1e-10 * af.abs().max(1e-3));
    }

    #[test]
    fn guard_keeps_near_collinear_finite() {
        let reps: Vec<_> = (0..10)
            .map(|i| {
                let r = i as f64 - 4.5;
                rep(r, 0.3 * r + 1e-9 * (i % 3) as f64, 0.1 * r * r)
            })
            .collect();
        let fit = focus_regression(&reps);
        assert!(fit.guarded);
        assert!(fit.a_r.is_finite() && fit.a_f.is_finite());
        assert!(fit.a_f.abs() < 1e3);
    }

    #[test]
    fn guard_is_continuous_at_threshold() {
        let (rf, ff, ra, fa) = (0.3, 0.09 / 0.98, 0.01, 0.02);
        let at = focus_from_covariances(rf, ff, ra, fa);
        let below = focus_from_covariances(rf, ff * (1.0 + 1e-9), ra, fa);
        assert!((at.a_r - below.a_r).abs() < 1e-5 * at.a_r.abs());
        assert!((at.a_f - below.a_f).abs() < 1e-5 * at.a_f.abs());
    }

    #[test]
    fn series_flags_empty_frames() {
        use crate::ship::{Dwell, DwellMeta, Frame};
        let full = Frame { t: 0.0, integration_time: 1.0, reports: vec![rep(0.0, 0.0, 0.0), rep(1.0, 1.0, 0.0), rep(3.0, -1.0, 1.0)] };
        let empty = Frame { t: 0.5, integration_time: 1.0, reports: vec![] };
        let mut third = full.clone();
        third.t = 1.0;
        let d = Dwell { meta: DwellMeta::default(), frames: vec![full.clone(), empty, third] };
        let s = moments_series(&d, Weighting::Uniform).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s[0].valid && !s[1].valid && s[2].valid);
        assert_eq!(s[1].t, 0.5);
        assert_eq!(s[0].cov_rf, s[2].cov_rf);
        let one = Dwell { meta: DwellMeta::default(), frames: vec![full] };
        assert_eq!(moments_series(&one, Weighting::Uniform).unwrap().len(), 1);
        let none = Dwell { meta: DwellMeta::default(), frames: vec![] };
        assert_eq!(moments_series(&none, Weighting::Uniform), Err(CoreError::EmptyDwell));
    }

    #[test]
    fn derivative_examples() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let ok = vec![true; t.len()];
        let lin: Vec<f64> = t.iter().map(|v| 1.5 * v - 2.0).collect();
        assert!(time_derivative(&t, &lin, &ok).unwrap().iter().all(|d| (d - 1.5).abs() < 1e-12));
        let c = vec![7.0; t.len()];
        assert!(time_derivative(&t, &c, &ok).unwrap().iter().all(|d| d.abs() < 1e-12));
        assert!(time_derivative(&t[..2], &c[..2], &ok[..2]).is_err());
    }

    #[test]
    fn sine_derivative_is_second_order() {
        let err = |dt: f64| {
            let t: Vec<f64> = (0..(20.0 / dt) as usize).map(|i| i as f64 * dt).collect();
            let y: Vec<f64> = t.iter().map(|v| (0.7 * v).sin()).collect();
            let d = time_derivative(&t, &y, &vec![true; t.len()]).unwrap();
            t.iter().zip(&d).skip(1).take(t.len() - 2).map(|(t, d)| (d - 0.7 * (0.7 * t).cos()).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e1 < 0.01);
        assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5);
    }

    #[test]
    fn derivative_bridges_gaps() {
        let t: Vec<f64> = (0..30).map(|i| i as f64 * 0.5).collect();
        let y: Vec<f64> = t.iter().map(|v| v * v).collect();
        let mut valid = vec![true; t.len()];
        valid[10] = false;
        valid[11] = false;
        let mut yb = y.clone();
        yb[10] = 1e6;
        yb[11] = f64::NAN;
        let d = time_derivative(&t, &yb, &valid).unwrap();
        for (i, v) in d.iter().enumerate() {
            assert!((v - 2.0 * t[i]).abs() < 1e-9, "i = {i}: {v}");
        }
    }

    proptest! {
        #[test]
        fn covariances_translation_invariant(
            pts in prop::collection::vec((-50.0..50.0f64, -3.0..3.0f64, -1.0..1.0f64), 3..25),
            dr in -1e3..1e3f64, df in -10.0..10.0f64, da in -5.0..5.0f64,
        ) {
            let a: Vec<_> = pts.iter().map(|p| rep(p.0, p.1, p.2)).collect();
            let b: Vec<_> = pts.iter().map(|p| rep(p.0 + dr, p.1 + df, p.2 + da)).collect();
            let (ma, mb) = (frame_moments(&a, Weighting::Uniform), frame_moments(&b, Weighting::Uniform));
            prop_assume!(ma.valid && ma.r_var > 1.0);
            let close = |x: f64, y: f64, s: f64| (x - y).abs() <= 1e-8 * s;
            let s = ma.cov_ff.abs().max(ma.cov_rf.abs()).max(1e-6);
            prop_assert!(close(ma.cov_rf, mb.cov_rf, s));
            prop_assert!(close(ma.cov_ff, mb.cov_ff, s));
            prop_assert!(close(ma.cov_ra, mb.cov_ra, ma.cov_ra.abs().max(1e-3)));
            prop_assert!(close(ma.cov_fa, mb.cov_fa, ma.cov_fa.abs().max(1e-3)));
        }

        #[test]
        fn duplicating_reports_changes_nothing(
            pts in prop::collection::vec((-50.0..50.0f64, -3.0..3.0f64, -1.0..1.0f64), 3..25),
        ) {
            let a: Vec<_> = pts.iter().map(|p| rep(p.0, p.1, p.2)).collect();
            let mut b = a.clone();
            b.extend(a.iter().copied());
            let (ma, mb) = (frame_moments(&a, Weighting::Uniform), frame_moments(&b, Weighting::Uniform));
            prop_assume!(ma.valid);
            for (x, y) in [(ma.cov_rf, mb.cov_rf), (ma.cov_ff, mb.cov_ff), (ma.cov_ra, mb.cov_ra), (ma.cov_fa, mb.cov_fa)] {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-9));
            }
        }

        #[test]
        fn crf_two_ways(pts in prop::collection::vec((-50.0..50.0f64, -3.0..3.0f64, -1.0..1.0f64), 3..25)) {
            let a: Vec<_> = pts.iter().map(|p| rep(p.0, p.1, p.2)).collect();
            let m = frame_moments(&a, Weighting::Uniform);
            prop_assume!(m.valid && m.cov_ff > 0.0);
            let n = a.len() as f64;
            let (mr, mf) = (a.iter().map(|x| x.r).sum::<f64>() / n, a.iter().map(|x| x.f).sum::<f64>() / n);
            let srf: f64 = a.iter().map(|x| (x.r - mr) * (x.f - mf)).sum();
            let srr: f64 = a.iter().map(|x| (x.r - mr).powi(2)).sum();
            let sff: f64 = a.iter().map(|x| (x.f - mf).powi(2)).sum();
            let raw = srf / (srr * sff).sqrt();
            prop_assert!((raw - m.crf).abs() <= 1e-12 * raw.abs().max(1e-3));
        }

        #[test]
        fn regression_is_least_squares_optimal(
            pts in prop::collection::vec((-50.0..50.0f64, -3.0..3.0f64, -1.0..1.0f64), 4..25),
            pr in -0.5..0.5f64, pf in -0.5..0.5f64,
        ) {
            let a: Vec<_> = pts.iter().map(|p| rep(p.0, p.1, p.2)).collect();
            let m = frame_moments(&a, Weighting::Uniform);
            prop_assume!(m.valid && !m.guarded);
            let n = a.len() as f64;
            let (mr, mf, ma) = (
                a.iter().map(|x| x.r).sum::<f64>() / n,
                a.iter().map(|x| x.f).sum::<f64>() / n,
                a.iter().map(|x| x.a).sum::<f64>() / n,
            );
            let resid = |ar: f64, af: f64| -> f64 {
                a.iter().map(|x| ((x.a - ma) - ar * (x.r - mr) - af * (x.f - mf)).powi(2)).sum()
            };
            let best = resid(m.a_r, m.a_f);
            prop_assert!(best <= resid(m.a_r + pr * 1e-3, m.a_f + pf) * (1.0 + 1e-12) + 1e-15);
        }
    }
}
