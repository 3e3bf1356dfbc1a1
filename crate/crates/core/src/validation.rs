//! Acceleration-consistency checks and the BadFit score.
//!
//! For fixed scatterers the acceleration covariances follow from the
//! range-Doppler ones:
//!
//! ```text
//! CovRA = d/dt CovRF − CovFF + 2·CovRF²
//! CovFA = (d/dt CovFF)/2 + CovFF·CovRF
//! ```
//!
//! Frames where measured and synthesized values disagree, or where the
//! fitted angles fail to reproduce D, are flagged.

use serde::{Deserialize, Serialize};

use crate::angles::ModelMoments;
use crate::error::{CoreError, Result};
use crate::moments::{focus_from_covariances, time_derivative, FrameMoments};
use crate::stats::{mad, median, rms};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthCovariances {
    pub cov_ra: f64,
    pub cov_fa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRecord {
    pub t: f64,
    pub cov_ra_data: f64,
    pub cov_fa_data: f64,
    pub cov_ra_synth: f64,
    pub cov_fa_synth: f64,
    pub cov_ra_out: f64,
    pub cov_fa_out: f64,
    pub cov_rf_out: f64,
    pub d_out: f64,
}

/// BadFit weights and threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BadFitConfig {
    pub weight_accel: f64,
    pub weight_doppler: f64,
    /// Flag threshold in robust standard deviations.
    pub threshold: f64,
    /// Smallest robust scale, as a fraction of the RMS level of the data
    /// quantity being compared.
    pub scale_floor: f64,
}

impl Default for BadFitConfig {
    fn default() -> Self {
        Self { weight_accel: 0.7, weight_doppler: 0.3, threshold: 3.0, scale_floor: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadFitSeries {
    pub t: Vec<f64>,
    pub badfit: Vec<f64>,
    pub flagged: Vec<bool>,
    pub threshold: f64,
}

impl BadFitSeries {
    pub fn flag_count(&self) -> usize {
        self.flagged.iter().filter(|f| **f).count()
    }
}

/// CovRA and CovFA synthesized from CovRF, CovFF and their derivatives.
/// Invalid frames yield NaN.
pub fn consistency_synth(moments: &[FrameMoments]) -> Result<Vec<SynthCovariances>> {
    let t: Vec<f64> = moments.iter().map(|m| m.t).collect();
    let valid: Vec<bool> = moments.iter().map(|m| m.valid).collect();
    let rf: Vec<f64> = moments.iter().map(|m| m.cov_rf).collect();
    let ff: Vec<f64> = moments.iter().map(|m| m.cov_ff).collect();
    let drf = time_derivative(&t, &rf, &valid)?;
    let dff = time_derivative(&t, &ff, &valid)?;
    Ok(moments
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if !m.valid {
                return SynthCovariances { cov_ra: f64::NAN, cov_fa: f64::NAN };
            }
            SynthCovariances {
                cov_ra: drf[i] - m.cov_ff + 2.0 * m.cov_rf * m.cov_rf,
                cov_fa: 0.5 * dff[i] + m.cov_ff * m.cov_rf,
            }
        })
        .collect())
}

/// Data, synthesized and output covariances side by side.
pub fn consistency_records(moments: &[FrameMoments], out: &[ModelMoments]) -> Result<Vec<ConsistencyRecord>> {
    if moments.len() != out.len() {
        return Err(CoreError::InvalidInput("moments and output series differ in length".into()));
    }
    let synth = consistency_synth(moments)?;
    Ok(moments
        .iter()
        .zip(&synth)
        .zip(out)
        .map(|((m, s), o)| ConsistencyRecord {
            t: m.t,
            cov_ra_data: m.cov_ra,
            cov_fa_data: m.cov_fa,
            cov_ra_synth: s.cov_ra,
            cov_fa_synth: s.cov_fa,
            cov_ra_out: o.cov_ra,
            cov_fa_out: o.cov_fa,
            cov_rf_out: o.cov_rf,
            d_out: o.d,
        })
        .collect())
}

/// BadFit from raw residual series.
///
/// `scale` gives, per residual, a reference magnitude used for the scale
/// floor.
pub fn badfit_from_residuals(
    t: &[f64],
    e_ra: &[f64],
    e_fa: &[f64],
    e_d: &[f64],
    scale: [f64; 3],
    valid: &[bool],
    cfg: &BadFitConfig,
) -> BadFitSeries {
    let pick = |e: &[f64]| -> Vec<f64> { e.iter().zip(valid).filter(|(_, v)| **v).map(|(e, _)| *e).collect() };
    let z_of = |e: &[f64], s: f64| -> Vec<f64> {
        let kept = pick(e);
        let m = median(&kept);
        let sd = (1.4826 * mad(&kept)).max(cfg.scale_floor * s).max(f64::MIN_POSITIVE);
        e.iter().map(|v| if v.is_finite() { (v - m).abs() / sd } else { f64::INFINITY }).collect()
    };
    let (zra, zfa, zd) = (z_of(e_ra, scale[0]), z_of(e_fa, scale[1]), z_of(e_d, scale[2]));
    let badfit: Vec<f64> = (0..t.len())
        .map(|i| {
            if !valid[i] {
                return f64::INFINITY;
            }
            let na = ((zra[i] * zra[i] + zfa[i] * zfa[i]) / 2.0).sqrt();
            cfg.weight_accel * na + cfg.weight_doppler * zd[i]
        })
        .collect();
    let flagged = badfit.iter().map(|b| !(*b <= cfg.threshold)).collect();
    BadFitSeries { t: t.to_vec(), badfit, flagged, threshold: cfg.threshold }
}

/// BadFit(t): weighted robust residuals of the acceleration consistency
/// relations and of D against the fitted output.
pub fn badfit(moments: &[FrameMoments], out: &[ModelMoments], cfg: &BadFitConfig) -> BadFitSeries {
    let t: Vec<f64> = moments.iter().map(|m| m.t).collect();
    let valid: Vec<bool> = moments.iter().map(|m| m.valid).collect();
    let Ok(synth) = consistency_synth(moments) else {
        return BadFitSeries {
            badfit: vec![f64::INFINITY; t.len()],
            flagged: vec![true; t.len()],
            t,
            threshold: cfg.threshold,
        };
    };
    let e_ra: Vec<f64> = moments.iter().zip(&synth).map(|(m, s)| m.cov_ra - s.cov_ra).collect();
    let e_fa: Vec<f64> = moments.iter().zip(&synth).map(|(m, s)| m.cov_fa - s.cov_fa).collect();
    let e_d: Vec<f64> = moments.iter().zip(out).map(|(m, o)| m.d_intrinsic - o.d).collect();
    let kept = |f: fn(&FrameMoments) -> f64| -> Vec<f64> { moments.iter().filter(|m| m.valid).map(f).collect() };
    let scale = [rms(&kept(|m| m.cov_ra)), rms(&kept(|m| m.cov_fa)), rms(&kept(|m| m.d_intrinsic))];
    badfit_from_residuals(&t, &e_ra, &e_fa, &e_d, scale, &valid, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusPair {
    pub t: f64,
    pub a_r_out: f64,
    pub a_f_out: f64,
    pub a_r_data: f64,
    pub a_f_data: f64,
}

/// Focus slopes from the output covariances next to the data values.
pub fn crosscheck_focus(out: &[ModelMoments], moments: &[FrameMoments]) -> Vec<FocusPair> {
    out.iter()
        .zip(moments)
        .map(|(o, m)| {
            let fo = focus_from_covariances(o.cov_rf, o.cov_ff, o.cov_ra, o.cov_fa);
            FocusPair { t: m.t, a_r_out: fo.a_r, a_f_out: fo.a_f, a_r_data: m.a_r, a_f_data: m.a_f }
        })
        .collect()
}
