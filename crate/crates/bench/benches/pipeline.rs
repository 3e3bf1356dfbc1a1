use criterion::{criterion_group, criterion_main, Criterion};
use isar3d_core::angles::{estimate_angles, model_moments};
use isar3d_core::moments::moments_series;
use isar3d_core::pose::{invert_frame, motion_matrix, PoseConfig};
use isar3d_core::simulator::{build_angle_track, simulate_degraded, ScenarioConfig};
use isar3d_core::validation::{badfit, BadFitConfig};
use isar3d_core::{ships, Weighting};
use std::hint::black_box;

fn stages(c: &mut Criterion) {
    let cfg = ScenarioConfig::default();
    let ship = ships::demo_ship();
    let track = build_angle_track(&cfg);
    let dwell = isar3d_bench::default_dwell();
    let moments = moments_series(&dwell, Weighting::Uniform).unwrap();
    let est = estimate_angles(&moments, cfg.mean_aspect, cfg.mean_tilt, &Default::default()).unwrap();

    c.bench_function("simulate_degraded", |b| b.iter(|| simulate_degraded(black_box(&ship), &track, &cfg)));
    c.bench_function("moments_series", |b| b.iter(|| moments_series(black_box(&dwell), Weighting::Uniform)));
    c.bench_function("estimate_angles", |b| {
        b.iter(|| estimate_angles(black_box(&moments), cfg.mean_aspect, cfg.mean_tilt, &Default::default()))
    });
    let d = &est.diagnostics;
    c.bench_function("badfit", |b| {
        b.iter(|| {
            let out = model_moments(&est.track, d.bsq, d.hsq);
            badfit(black_box(&moments), &out, &BadFitConfig::default())
        })
    });
    let pc = PoseConfig::default();
    let noise = pc.sigmas(1.0, 0.03, 1.0);
    c.bench_function("invert_dwell", |b| {
        b.iter(|| {
            dwell
                .frames
                .iter()
                .zip(&est.track.samples)
                .map(|(f, a)| invert_frame(&f.reports, &motion_matrix(a), &noise, &pc))
                .count()
        })
    });
}

criterion_group!(benches, stages);
criterion_main!(benches);
