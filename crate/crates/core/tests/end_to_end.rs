use isar3d_core::angles::{estimate_angles, model_covariances, model_moments};
use isar3d_core::length::{estimate_loa, LengthConfig};
use isar3d_core::moments::{frame_moments, moments_series};
use isar3d_core::simulator::{build_angle_track, simulate_perfect, ScenarioConfig};
use isar3d_core::stats::correlation;
use isar3d_core::validation::{badfit, consistency_records, BadFitConfig};
use isar3d_core::{ship_moments, ships, Weighting};

#[test]
fn moments_match_model_at_true_angles() {
    let cfg = ScenarioConfig::default();
    let ship = ships::demo_ship();
    let sm = ship_moments(&ship).unwrap();
    let track = build_angle_track(&cfg);
    let dwell = simulate_perfect(&ship, &track, &cfg);
    let full = model_moments(&track, sm.bsq, sm.hsq);
    for ((fr, mc), mm) in dwell.frames.iter().zip(model_covariances(&track, sm.bsq, sm.hsq)).zip(full) {
        let m = frame_moments(&fr.reports, Weighting::Uniform);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs().max(1e-12);
        assert!(close(m.cov_rf, mc.cov_rf) && close(m.cov_ff, mc.cov_ff) && close(m.d_intrinsic, mc.d));
        assert!(close(m.cov_ra, mm.cov_ra) && close(m.cov_fa, mm.cov_fa));
    }
}

#[test]
fn snr_weighting_matches_model_with_weighted_ship_moments() {
    // with equal RCS the two weightings coincide
    let half = [(40.0, 5.0, 0.0, 1.0), (20.0, 7.0, 6.0, 1.0), (10.0, 3.0, 12.0, 1.0)];
    let ship = ships::mirrored(&half);
    let cfg = ScenarioConfig::default();
    let track = build_angle_track(&cfg);
    let dwell = simulate_perfect(&ship, &track, &cfg);
    let u = moments_series(&dwell, Weighting::Uniform).unwrap();
    let s = moments_series(&dwell, Weighting::Snr).unwrap();
    for (a, b) in u.iter().zip(&s) {
        assert!((a.cov_rf - b.cov_rf).abs() <= 1e-12 * a.cov_rf.abs().max(1e-9));
    }
}

#[test]
fn ideal_case_rates_track_truth() {
    let cfg = ScenarioConfig::default();
    let track = build_angle_track(&cfg);
    let dwell = simulate_perfect(&ships::demo_ship(), &track, &cfg);
    let m = moments_series(&dwell, Weighting::Uniform).unwrap();
    let est = estimate_angles(&m, cfg.mean_aspect, cfg.mean_tilt, &Default::default()).unwrap();
    assert!(correlation(&est.track.phi_dot(), &track.phi_dot()) > 0.95);
    assert!(correlation(&est.track.theta_dot(), &track.theta_dot()) > 0.95);
    let d = &est.diagnostics;
    assert!(!d.fallback);
    // the selected candidate has the smallest residual
    assert!(d.candidates.iter().all(|c| c.residual >= d.residual));
    let sm = ship_moments(&ships::demo_ship()).unwrap();
    assert!((d.bsq - sm.bsq).abs() < 0.3 * sm.bsq);
    assert!((d.hsq - sm.hsq).abs() < 0.3 * sm.hsq);
}

#[test]
fn clean_dwell_is_consistent_and_measures_length() {
    let cfg = ScenarioConfig::default();
    let ship = ships::box_ship(120.0);
    let track = build_angle_track(&cfg);
    let dwell = simulate_perfect(&ship, &track, &cfg);
    let m = moments_series(&dwell, Weighting::Uniform).unwrap();
    let est = estimate_angles(&m, cfg.mean_aspect, cfg.mean_tilt, &Default::default()).unwrap();
    let out = model_moments(&est.track, est.diagnostics.bsq, est.diagnostics.hsq);
    let recs = consistency_records(&m, &out).unwrap();
    assert_eq!(recs.len(), m.len());
    let bf = badfit(&m, &out, &BadFitConfig::default());
    assert_eq!(bf.flag_count(), 0, "{:?}", bf.badfit);
    let loa = estimate_loa(&dwell, &est.track, &bf, &LengthConfig::default()).unwrap();
    assert!((loa.loa - 120.0).abs() <= cfg.range_resolution, "{}", loa.loa);
}

#[test]
fn perfect_demo_dwell_has_no_badfit_flags() {
    let cfg = ScenarioConfig::default();
    let track = build_angle_track(&cfg);
    let dwell = simulate_perfect(&ships::demo_ship(), &track, &cfg);
    let m = moments_series(&dwell, Weighting::Uniform).unwrap();
    let est = estimate_angles(&m, cfg.mean_aspect, cfg.mean_tilt, &Default::default()).unwrap();
    let out = model_moments(&est.track, est.diagnostics.bsq, est.diagnostics.hsq);
    let bf = badfit(&m, &out, &BadFitConfig::default());
    assert_eq!(bf.flag_count(), 0);
    assert!(bf.badfit.iter().all(|b| *b < bf.threshold));
}
