use std::path::Path;
use std::process::Command;

use isar3d_cli::{load_dwell, run_analyze, run_simulate, save_dwell, RunConfig, RunError};
use isar3d_core::simulator::{build_angle_track, simulate_degraded, simulate_perfect, ScenarioConfig};
use isar3d_core::ships;
use proptest::prelude::*;

fn sim_config() -> RunConfig {
    RunConfig { scenario: Some(ScenarioConfig::default()), emit_plots: true, ..Default::default() }
}

#[test]
fn dwell_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig::default();
    let track = build_angle_track(&cfg);
    let mut dwell = simulate_degraded(&ships::demo_ship(), &track, &cfg);
    dwell.frames[3].reports.clear();
    dwell.frames[4].reports[0].doppler_width = Some(0.125);
    let path = dir.path().join("d.csv");
    save_dwell(&dwell, &path).unwrap();
    let back = load_dwell(&path).unwrap();
    assert_eq!(back, dwell);
    let again = dir.path().join("e.csv");
    save_dwell(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn header_degrees_become_radians() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let header = r#"{"frame_interval":0.5,"integration_time":1.0,"mean_aspect_deg":45,"mean_tilt_deg":30,"range_resolution":1.0,"n_frames":1}"#;
    std::fs::write(&path, format!("{header}\nframe_index,t,snr_db,range_m,doppler_mps,accel_mps2\n0,0.25,20,1,0,0\n")).unwrap();
    let d = load_dwell(&path).unwrap();
    assert_eq!(d.meta.mean_aspect, std::f64::consts::FRAC_PI_4);
    assert!((d.meta.mean_tilt - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
}

fn load_err(body: &str) -> String {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let header = r#"{"frame_interval":0.5,"integration_time":1.0,"mean_aspect_deg":45,"mean_tilt_deg":30,"range_resolution":1.0,"n_frames":2}"#;
    std::fs::write(&path, format!("{header}\n{body}")).unwrap();
    match load_dwell(&path) {
        Err(RunError::Data(m)) => m,
        other => panic!("expected data error, got {other:?}"),
    }
}

#[test]
fn schema_errors_name_line_and_column() {
    let m = load_err("frame_index,t,snr_db,range_m,doppler_mps\n0,0.25,20,1,0\n");
    assert!(m.contains("accel_mps2") && m.contains("line 2"), "{m}");
    let m = load_err("frame_index,t,snr_db,range_m,doppler_mps,accel_mps2\n0,0.25,20,1,0,0\n1,0.75,x,1,0,0\n");
    assert!(m.contains("line 4") && m.contains("snr_db"), "{m}");
    let m = load_err("frame_index,t,snr_db,range_m,doppler_mps,accel_mps2\n0,0.75,20,1,0,0\n1,0.25,20,1,0,0\n");
    assert!(m.contains("not increasing"), "{m}");
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn analyze_of_saved_dwell_matches_simulate() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let report = run_simulate(&sim_config(), a.path()).unwrap();
    for e in &report.manifest {
        assert!(a.path().join(&e.path).exists(), "{}", e.path);
    }
    let analyze_cfg = RunConfig { scenario: None, ..sim_config() };
    run_analyze(&a.path().join("dwell.csv"), &analyze_cfg, b.path()).unwrap();
    assert_eq!(read(a.path(), "run_report.json"), read(b.path(), "run_report.json"));
    for e in &report.manifest {
        assert_eq!(std::fs::read(a.path().join(&e.path)).unwrap(), std::fs::read(b.path().join(&e.path)).unwrap(), "{}", e.path);
    }
}

#[test]
fn figure_csvs_share_frame_times() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_simulate(&sim_config(), dir.path()).unwrap();
    let times = |name: &str| -> Vec<String> {
        let mut r = csv::Reader::from_path(dir.path().join(name)).unwrap();
        r.records().map(|x| x.unwrap()[0].to_string()).collect()
    };
    let reference = times("angles.csv");
    assert_eq!(reference.len(), report.frames);
    for e in report.manifest.iter().filter(|e| e.kind == "csv") {
        assert_eq!(times(&e.path), reference, "{}", e.path);
    }
}

#[test]
fn invalid_output_dir_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, b"x").unwrap();
    let err = run_simulate(&sim_config(), &file).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn failed_write_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // a directory where a product file should go makes that write fail
    std::fs::create_dir(dir.path().join("focus.csv")).unwrap();
    let err = run_simulate(&sim_config(), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    let left: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(left, vec![std::ffi::OsString::from("focus.csv")]);
}

#[test]
fn analyze_rejects_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_analyze(Path::new("nope.csv"), &sim_config(), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_isar3d");
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = dir.path().join("bad.json");
    std::fs::write(&bad_cfg, "{ not json").unwrap();
    let out = dir.path().join("out");
    let status = |args: &[&str]| Command::new(exe).args(args).status().unwrap().code();
    assert_eq!(status(&["simulate", "--config", bad_cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]), Some(2));
    let missing = dir.path().join("missing.csv");
    assert_eq!(status(&["analyze", "--input", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]), Some(3));

    let short = dir.path().join("short.json");
    std::fs::write(&short, r#"{"scenario": {"duration": 4.0}}"#).unwrap();
    assert_eq!(status(&["simulate", "--config", short.to_str().unwrap(), "--out", out.to_str().unwrap()]), Some(4));

    let good = dir.path().join("good.json");
    std::fs::write(&good, r#"{"scenario": {}, "seed": 3}"#).unwrap();
    assert_eq!(status(&["simulate", "--config", good.to_str().unwrap(), "--out", out.to_str().unwrap()]), Some(0));
    assert!(out.join("run_report.json").exists());
}

#[test]
fn perfect_flag_gives_exact_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig { perfect: true, ..sim_config() };
    run_simulate(&cfg, dir.path()).unwrap();
    let d = load_dwell(&dir.path().join("dwell.csv")).unwrap();
    let s = ScenarioConfig::default();
    assert_eq!(d, simulate_perfect(&ships::demo_ship(), &build_angle_track(&s), &s));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn arbitrary_reports_round_trip(vals in proptest::collection::vec((-1e6..1e6f64, -1e3..1e3f64, -50.0..80.0f64), 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ScenarioConfig { duration: 2.0, ..Default::default() };
        let track = build_angle_track(&cfg);
        let mut dwell = simulate_perfect(&ships::demo_ship(), &track, &cfg);
        for (k, (r, f, snr)) in vals.iter().enumerate() {
            let fr = &mut dwell.frames[k % 4];
            let mut rep = fr.reports[0];
            rep.r = *r;
            rep.f = *f;
            rep.snr = *snr;
            rep.truth_id = None;
            fr.reports.push(rep);
        }
        let path = dir.path().join("d.csv");
        save_dwell(&dwell, &path).unwrap();
        prop_assert_eq!(load_dwell(&path).unwrap(), dwell);
    }
}
