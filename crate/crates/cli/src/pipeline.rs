//! moments → angles → validation → pose → length, and the run report.

use std::collections::BTreeMap;
use std::path::Path;

use isar3d_core::angles::{estimate_angles, model_moments, AngleEstimate, ModelMoments};
use isar3d_core::length::{estimate_loa, LengthEstimate};
use isar3d_core::moments::moments_series;
use isar3d_core::pose::{class_counts, classify_frames, compose, invert_frame, motion_matrix, CompositeImage, PoseConfig};
use isar3d_core::simulator::{build_angle_track, simulate_degraded, simulate_perfect};
use isar3d_core::stats::{correlation, mean, rms};
use isar3d_core::validation::{badfit, consistency_records, crosscheck_focus, ConsistencyRecord, FocusPair};
use isar3d_core::{ship_moments, AngleTrack, BadFitSeries, Dwell, FrameClass, FrameMoments, FrameSolution};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::dwell_io::{load_dwell, save_dwell};
use crate::error::RunError;
use crate::output::{line_chart, num, pgm, sidecar, write_json, ManifestEntry, OutputSet};

/// Everything the pipeline computes for one dwell.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub moments: Vec<FrameMoments>,
    pub estimate: AngleEstimate,
    pub out: Vec<ModelMoments>,
    pub consistency: Vec<ConsistencyRecord>,
    pub badfit: BadFitSeries,
    pub focus: Vec<FocusPair>,
    pub solutions: Vec<FrameSolution>,
    pub profile: CompositeImage,
    pub plan: CompositeImage,
    pub length: Result<LengthEstimate, String>,
}

/// Invert and classify every frame along an angle track.
pub fn pose_frames(dwell: &Dwell, track: &AngleTrack, badfit: &BadFitSeries, cfg: &PoseConfig) -> Vec<FrameSolution> {
    let m = &dwell.meta;
    let noise = cfg.sigmas(m.range_resolution, m.wavelength, m.integration_time);
    let mut sols: Vec<FrameSolution> = dwell
        .frames
        .iter()
        .zip(&track.samples)
        .map(|(fr, a)| invert_frame(&fr.reports, &motion_matrix(a), &noise, cfg))
        .collect();
    classify_frames(&mut sols, badfit, cfg);
    sols
}

pub fn analyze(dwell: &Dwell, cfg: &RunConfig) -> Result<Analysis, RunError> {
    dwell.validate().map_err(|e| RunError::Data(e.to_string()))?;
    let moments = moments_series(dwell, cfg.weighting).map_err(RunError::stage("moments"))?;
    let estimate = estimate_angles(&moments, dwell.meta.mean_aspect, dwell.meta.mean_tilt, &cfg.estimator)
        .map_err(RunError::stage("angle estimation"))?;
    let d = &estimate.diagnostics;
    let out = model_moments(&estimate.track, d.bsq, d.hsq);
    let consistency = consistency_records(&moments, &out).map_err(RunError::stage("validation"))?;
    let bf = badfit(&moments, &out, &cfg.validation);
    let focus = crosscheck_focus(&out, &moments);
    let solutions = pose_frames(dwell, &estimate.track, &bf, &cfg.pose);
    let profile = compose(&solutions, &estimate.track, FrameClass::Profile, &cfg.composite);
    let plan = compose(&solutions, &estimate.track, FrameClass::Plan, &cfg.composite);
    let length = estimate_loa(dwell, &estimate.track, &bf, &cfg.length).map_err(|e| format!("length: {e}"));
    Ok(Analysis { moments, estimate, out, consistency, badfit: bf, focus, solutions, profile, plan, length })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSummary {
    pub mean_phi_deg: f64,
    pub mean_theta_deg: f64,
    pub mean_phi_dot_dps: f64,
    pub mean_theta_dot_dps: f64,
    pub rms_phi_dot_dps: f64,
    pub rms_theta_dot_dps: f64,
    pub spectral_period_s: Option<f64>,
    pub wave_period_s: Option<f64>,
    pub bsq: f64,
    pub hsq: f64,
    pub residual: f64,
    pub fallback: bool,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub loa_m: f64,
    pub beam_m: f64,
    pub width_correction_m: f64,
    pub frames_used: usize,
    pub rmin_std_m: f64,
    pub rmax_std_m: f64,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub frames: usize,
    pub valid_frames: usize,
    pub angles: AngleSummary,
    pub frame_classes: BTreeMap<String, usize>,
    pub length: Option<LengthSummary>,
    pub length_error: Option<String>,
    pub badfit_flags: usize,
    pub manifest: Vec<ManifestEntry>,
}

fn class_name(c: FrameClass) -> String {
    serde_json::to_value(c).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn summary(a: &Analysis) -> RunReport {
    let tr = &a.estimate.track;
    let d = &a.estimate.diagnostics;
    let deg = |f: fn(&isar3d_core::AngleSample) -> f64| tr.samples.iter().map(|s| f(s).to_degrees()).collect::<Vec<_>>();
    let (pd, td) = (deg(|s| s.phi_dot), deg(|s| s.theta_dot));
    let detrend = |x: &[f64]| {
        let m = mean(x);
        rms(&x.iter().map(|v| v - m).collect::<Vec<_>>())
    };
    RunReport {
        frames: a.moments.len(),
        valid_frames: a.moments.iter().filter(|m| m.valid).count(),
        angles: AngleSummary {
            mean_phi_deg: mean(&deg(|s| s.phi)),
            mean_theta_deg: mean(&deg(|s| s.theta)),
            mean_phi_dot_dps: mean(&pd),
            mean_theta_dot_dps: mean(&td),
            rms_phi_dot_dps: detrend(&pd),
            rms_theta_dot_dps: detrend(&td),
            spectral_period_s: d.wave_line.map(|l| l.period),
            wave_period_s: d.selected_period,
            bsq: d.bsq,
            hsq: d.hsq,
            residual: d.residual,
            fallback: d.fallback,
            flags: d.flags.clone(),
        },
        frame_classes: class_counts(&a.solutions).iter().map(|(c, n)| (class_name(*c), *n)).collect(),
        length: a.length.as_ref().ok().map(|l| LengthSummary {
            loa_m: l.loa,
            beam_m: l.beam,
            width_correction_m: l.width_correction,
            frames_used: l.frames_used,
            rmin_std_m: l.rmin_std,
            rmax_std_m: l.rmax_std,
            flags: l.flags.clone(),
        }),
        length_error: a.length.as_ref().err().cloned(),
        badfit_flags: a.badfit.flag_count(),
        manifest: Vec::new(),
    }
}

fn rows<T>(items: &[T], f: impl Fn(&T) -> Vec<f64>) -> Vec<Vec<String>> {
    items.iter().map(|x| f(x).into_iter().map(num).collect()).collect()
}

fn write_products(a: &Analysis, cfg: &RunConfig, out: &mut OutputSet) -> std::io::Result<()> {
    let tr = &a.estimate.track;
    out.csv(
        "angles.csv",
        &["t", "phi_deg", "theta_deg", "phi_dot_dps", "theta_dot_dps", "phi_ddot_dps2", "theta_ddot_dps2"],
        &rows(&tr.samples, |s| {
            vec![
                s.t,
                s.phi.to_degrees(),
                s.theta.to_degrees(),
                s.phi_dot.to_degrees(),
                s.theta_dot.to_degrees(),
                s.phi_ddot.to_degrees(),
                s.theta_ddot.to_degrees(),
            ]
        }),
    )?;
    let cov: Vec<(&FrameMoments, &ModelMoments)> = a.moments.iter().zip(&a.out).collect();
    out.csv(
        "covariances.csv",
        &[
            "t", "valid", "cov_rf_data", "cov_rf_out", "cov_ff_data", "cov_ff_out", "d_data", "d_out",
            "cov_ra_data", "cov_ra_out", "cov_fa_data", "cov_fa_out",
        ],
        &rows(&cov, |(m, o)| {
            let v = |x: f64| if m.valid { x } else { f64::NAN };
            vec![
                m.t,
                if m.valid { 1.0 } else { 0.0 },
                v(m.cov_rf),
                o.cov_rf,
                v(m.cov_ff),
                o.cov_ff,
                v(m.d_intrinsic),
                o.d,
                v(m.cov_ra),
                o.cov_ra,
                v(m.cov_fa),
                o.cov_fa,
            ]
        }),
    )?;
    out.csv(
        "consistency.csv",
        &["t", "cov_ra_data", "cov_ra_synth", "cov_ra_out", "cov_fa_data", "cov_fa_synth", "cov_fa_out"],
        &rows(&a.consistency, |c| {
            vec![c.t, c.cov_ra_data, c.cov_ra_synth, c.cov_ra_out, c.cov_fa_data, c.cov_fa_synth, c.cov_fa_out]
        }),
    )?;
    let bf: Vec<usize> = (0..a.badfit.t.len()).collect();
    out.csv(
        "badfit.csv",
        &["t", "badfit", "flagged"],
        &rows(&bf, |&i| vec![a.badfit.t[i], a.badfit.badfit[i], if a.badfit.flagged[i] { 1.0 } else { 0.0 }]),
    )?;
    let foc: Vec<(&FocusPair, &FrameMoments)> = a.focus.iter().zip(&a.moments).collect();
    out.csv(
        "focus.csv",
        &["t", "crf", "a_r_data", "a_r_out", "a_f_data", "a_f_out"],
        &rows(&foc, |(p, m)| vec![p.t, m.crf, p.a_r_data, p.a_r_out, p.a_f_data, p.a_f_out]),
    )?;
    let loa_series = a.length.as_ref().map(|l| l.loa_series.clone()).unwrap_or_else(|_| vec![None; a.solutions.len()]);
    let frame_rows: Vec<Vec<String>> = a
        .solutions
        .iter()
        .zip(&loa_series)
        .map(|(s, l)| {
            vec![
                num(s.t),
                class_name(s.class),
                num(s.scores.profile),
                num(s.scores.plan),
                num(s.scores.pearls),
                num(s.cond),
                l.map(num).unwrap_or_default(),
            ]
        })
        .collect();
    out.csv("frames.csv", &["t", "class", "profile_score", "plan_score", "pearls_score", "cond", "loa_m"], &frame_rows)?;
    for (name, img) in [("profile", &a.profile), ("plan", &a.plan)] {
        out.write(&format!("composite_{name}.pgm"), "pgm", img.height, &pgm(img))?;
        let mut side = Vec::new();
        write_json(&mut side, &sidecar(img))?;
        out.write(&format!("composite_{name}.json"), "json", 1, &side)?;
    }
    if cfg.emit_plots {
        write_plots(a, out)?;
    }
    Ok(())
}

fn write_plots(a: &Analysis, out: &mut OutputSet) -> std::io::Result<()> {
    let t: Vec<f64> = a.moments.iter().map(|m| m.t).collect();
    let tr = &a.estimate.track.samples;
    let col = |f: &dyn Fn(usize) -> f64| (0..t.len()).map(f).collect::<Vec<f64>>();
    let data = |f: fn(&FrameMoments) -> f64| col(&|i| if a.moments[i].valid { f(&a.moments[i]) } else { f64::NAN });
    let plots = [
        (
            "plots/angles.svg",
            line_chart(
                "Angle rates (deg/s)",
                "t (s)",
                &t,
                &[
                    ("phi_dot", col(&|i| tr[i].phi_dot.to_degrees())),
                    ("theta_dot", col(&|i| tr[i].theta_dot.to_degrees())),
                ],
            ),
        ),
        (
            "plots/covariances.svg",
            line_chart(
                "Range-Doppler covariances",
                "t (s)",
                &t,
                &[
                    ("cov_rf data", data(|m| m.cov_rf)),
                    ("cov_rf out", col(&|i| a.out[i].cov_rf)),
                    ("d data", data(|m| m.d_intrinsic)),
                    ("d out", col(&|i| a.out[i].d)),
                ],
            ),
        ),
        (
            "plots/consistency.svg",
            line_chart(
                "Acceleration consistency",
                "t (s)",
                &t,
                &[
                    ("cov_ra data", col(&|i| a.consistency[i].cov_ra_data)),
                    ("cov_ra synth", col(&|i| a.consistency[i].cov_ra_synth)),
                    ("cov_fa data", col(&|i| a.consistency[i].cov_fa_data)),
                    ("cov_fa synth", col(&|i| a.consistency[i].cov_fa_synth)),
                ],
            ),
        ),
        (
            "plots/badfit.svg",
            line_chart(
                "BadFit",
                "t (s)",
                &t,
                &[("badfit", a.badfit.badfit.clone()), ("threshold", vec![a.badfit.threshold; t.len()])],
            ),
        ),
        (
            "plots/focus.svg",
            line_chart(
                "Focus slopes",
                "t (s)",
                &t,
                &[
                    ("a_r data", col(&|i| a.focus[i].a_r_data)),
                    ("a_r out", col(&|i| a.focus[i].a_r_out)),
                    ("a_f data", col(&|i| a.focus[i].a_f_data)),
                    ("a_f out", col(&|i| a.focus[i].a_f_out)),
                ],
            ),
        ),
    ];
    for (path, svg) in plots {
        out.write(path, "svg", 1, svg.as_bytes())?;
    }
    Ok(())
}

/// Create the output directory and confirm it is writable.
pub fn prepare_output_dir(dir: &Path) -> Result<(), RunError> {
    if dir.exists() && !dir.is_dir() {
        return Err(RunError::Config(format!("{} is not a directory", dir.display())));
    }
    std::fs::create_dir_all(dir).map_err(|e| RunError::Config(format!("{}: {e}", dir.display())))?;
    let probe = dir.join(".isar3d-write-probe");
    std::fs::write(&probe, b"").map_err(|e| RunError::Config(format!("{} not writable: {e}", dir.display())))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

fn finish(a: &Analysis, cfg: &RunConfig, out: &mut OutputSet) -> Result<RunReport, RunError> {
    let mut report = summary(a);
    let result = (|| -> std::io::Result<()> {
        write_products(a, cfg, out)?;
        report.manifest = out.manifest.clone();
        let mut bytes = Vec::new();
        write_json(&mut bytes, &report)?;
        bytes.push(b'\n');
        out.write_extra("run_report.json", &bytes)
    })();
    match result {
        Ok(()) => Ok(report),
        Err(e) => {
            out.discard();
            Err(RunError::Output(e))
        }
    }
}

/// Analyze a dwell file and write all products under `out_dir`.
pub fn run_analyze(input: &Path, cfg: &RunConfig, out_dir: &Path) -> Result<RunReport, RunError> {
    if cfg.scenario.is_some() {
        return Err(RunError::Config("analyze mode takes no scenario".into()));
    }
    prepare_output_dir(out_dir)?;
    let dwell = load_dwell(input)?;
    let a = analyze(&dwell, cfg)?;
    finish(&a, cfg, &mut OutputSet::new(out_dir))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthComparison {
    pub bsq_true: f64,
    pub hsq_true: f64,
    pub loa_true: Option<f64>,
    pub oscillation_periods_s: [f64; 2],
    pub phi_dot_correlation: f64,
    pub theta_dot_correlation: f64,
    pub phi_dot_rms_error_dps: f64,
    pub theta_dot_rms_error_dps: f64,
}

/// Simulate a dwell, save it as `dwell.csv`, analyze it and write the
/// products plus `truth.json` under `out_dir`.
pub fn run_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<RunReport, RunError> {
    let scenario = cfg.scenario()?;
    let ship = cfg.ship.build()?;
    prepare_output_dir(out_dir)?;
    let track = build_angle_track(&scenario);
    let dwell = if cfg.perfect {
        simulate_perfect(&ship, &track, &scenario)
    } else {
        simulate_degraded(&ship, &track, &scenario)
    };
    let a = analyze(&dwell, cfg)?;
    let sm = ship_moments(&ship.centered()).map_err(RunError::stage("simulation"))?;
    let est = &a.estimate.track.samples;
    let pick = |s: &[isar3d_core::AngleSample], f: fn(&isar3d_core::AngleSample) -> f64| s.iter().map(f).collect::<Vec<_>>();
    let err_rms = |f: fn(&isar3d_core::AngleSample) -> f64| {
        rms(&est.iter().zip(&track.samples).map(|(e, t)| (f(e) - f(t)).to_degrees()).collect::<Vec<_>>())
    };
    let truth = TruthComparison {
        bsq_true: sm.bsq,
        hsq_true: sm.hsq,
        loa_true: ship.loa_true,
        oscillation_periods_s: [scenario.aspect_osc.period, scenario.tilt_osc.period],
        phi_dot_correlation: correlation(&pick(est, |s| s.phi_dot), &pick(&track.samples, |s| s.phi_dot)),
        theta_dot_correlation: correlation(&pick(est, |s| s.theta_dot), &pick(&track.samples, |s| s.theta_dot)),
        phi_dot_rms_error_dps: err_rms(|s| s.phi_dot),
        theta_dot_rms_error_dps: err_rms(|s| s.theta_dot),
    };
    let mut out = OutputSet::new(out_dir);
    let report = finish(&a, cfg, &mut out)?;
    let extras = (|| -> Result<(), RunError> {
        let dwell_path = out_dir.join("dwell.csv");
        save_dwell(&dwell, &dwell_path)?;
        let mut bytes = Vec::new();
        write_json(&mut bytes, &truth)?;
        bytes.push(b'\n');
        out.write_extra("truth.json", &bytes)?;
        Ok(())
    })();
    if let Err(e) = extras {
        out.discard();
        let _ = std::fs::remove_file(out_dir.join("dwell.csv"));
        return Err(e);
    }
    Ok(report)
}
