//! Rigid-body inversion from (range, Doppler, acceleration) to drydock
//! coordinates, noise propagation, frame scoring and composite images.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::moments::{frame_moments, Weighting};
use crate::ship::{AngleSample, AngleTrack, TargetReport};
use crate::stats::{median, variance};
use crate::validation::BadFitSeries;

/// Rows of the motion matrix: the coefficients of (x0, y0, z0) in r, ṙ, r̈.
pub fn motion_rows(a: &AngleSample) -> [[f64; 3]; 3] {
    let (sf, cf) = a.phi.sin_cos();
    let (st, ct) = a.theta.sin_cos();
    let (pd, td, pdd, tdd) = (a.phi_dot, a.theta_dot, a.phi_ddot, a.theta_ddot);
    let w2 = pd * pd + td * td;
    [
        [ct * cf, -ct * sf, -st],
        [-st * cf * td - ct * sf * pd, st * sf * td - ct * cf * pd, -ct * td],
        [
            2.0 * sf * st * pd * td - sf * ct * pdd - st * cf * tdd - cf * ct * w2,
            sf * st * tdd + sf * ct * w2 + 2.0 * st * cf * pd * td - cf * ct * pdd,
            st * td * td - ct * tdd,
        ],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionMatrix {
    pub t: f64,
    pub m: [[f64; 3]; 3],
    /// Condition number after scaling every row to unit length; infinite
    /// when a row vanishes.
    pub cond: f64,
}

impl MotionMatrix {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.m[i][j])
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [0, 1, 2].map(|i| m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2])
    }
}

/// Motion matrix at one angle state with its row-equilibrated condition
/// number.
pub fn motion_matrix(ang: &AngleSample) -> MotionMatrix {
    let m = motion_rows(ang);
    let mut scaled = Matrix3::zeros();
    let mut cond = 0.0;
    for i in 0..3 {
        let norm = (m[i][0].powi(2) + m[i][1].powi(2) + m[i][2].powi(2)).sqrt();
        if !(norm > 0.0) {
            cond = f64::INFINITY;
            break;
        }
        for j in 0..3 {
            scaled[(i, j)] = m[i][j] / norm;
        }
    }
    if cond == 0.0 {
        let sv = scaled.singular_values();
        let (hi, lo) = (sv.max(), sv.min());
        cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    }
    MotionMatrix { t: ang.t, m, cond }
}

/// Measurement noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSigmas {
    /// m
    pub sigma_r: f64,
    /// m/s
    pub sigma_f: f64,
    /// m/s²
    pub sigma_a: f64,
}

/// Pose scoring and classification settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoseConfig {
    /// σ_r as a fraction of the range resolution.
    pub range_fraction: f64,
    /// σ_f as a fraction of the Doppler resolution λ/(2T).
    pub doppler_fraction: f64,
    /// σ_a in units of λ/(2T²).
    pub accel_factor: f64,
    /// Largest usable row-equilibrated condition number.
    pub cond_guard: f64,
    pub profile_threshold: f64,
    pub plan_threshold: f64,
    pub pearls_threshold: f64,
    /// Profile and plan scores within this ratio make a 3-D frame.
    pub three_d_ratio: f64,
    /// Noise variance multiplier on BadFit-flagged frames.
    pub badfit_inflation: f64,
    pub pearls_epsilon: f64,
}

impl Default for PoseConfig {
    fn default() -> Self {
        Self {
            range_fraction: 0.5,
            doppler_fraction: 0.3,
            accel_factor: 1.0,
            cond_guard: 1e4,
            profile_threshold: 4.0,
            plan_threshold: 4.0,
            pearls_threshold: 49.0,
            three_d_ratio: 0.5,
            badfit_inflation: 10.0,
            pearls_epsilon: 1e-6,
        }
    }
}

impl PoseConfig {
    /// Noise levels for a radar of the given range resolution, wavelength and
    /// integration time.
    pub fn sigmas(&self, range_resolution: f64, wavelength: f64, integration_time: f64) -> NoiseSigmas {
        let half = 0.5 * wavelength;
        NoiseSigmas {
            sigma_r: self.range_fraction * range_resolution,
            sigma_f: self.doppler_fraction * half / integration_time,
            sigma_a: self.accel_factor * half / (integration_time * integration_time),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameClass {
    Profile,
    Plan,
    ThreeD,
    StringOfPearls,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameScores {
    pub profile: f64,
    pub plan: f64,
    pub pearls: f64,
}

/// A report as seen in the range-Doppler image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagePoint {
    pub r: f64,
    pub f: f64,
    pub snr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSolution {
    pub t: f64,
    /// Centered drydock estimates per report (m); empty when invalid.
    pub xyz: Vec<[f64; 3]>,
    /// (N_X, N_Y, N_Z) in m².
    pub noise_var: [f64; 3],
    pub scores: FrameScores,
    pub class: FrameClass,
    pub cond: f64,
    /// The motion matrix failed the condition guard.
    pub singular: bool,
    pub points: Vec<ImagePoint>,
}

/// Class from scores: the highest score over its threshold wins, and
/// Profile and Plan together within the ratio band make ThreeD.
pub fn decide_class(s: &FrameScores, cfg: &PoseConfig) -> FrameClass {
    let cands = [
        (FrameClass::Profile, s.profile, cfg.profile_threshold),
        (FrameClass::Plan, s.plan, cfg.plan_threshold),
        (FrameClass::StringOfPearls, s.pearls, cfg.pearls_threshold),
    ];
    let winner = cands
        .iter()
        .filter(|c| c.1 > c.2)
        .fold(None::<(FrameClass, f64)>, |best, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some((c.0, c.1)),
        });
    match winner {
        None => FrameClass::Invalid,
        Some((FrameClass::StringOfPearls, _)) => FrameClass::StringOfPearls,
        Some((c, _)) => {
            let both = s.profile > cfg.profile_threshold && s.plan > cfg.plan_threshold;
            if both && s.profile.min(s.plan) / s.profile.max(s.plan) > cfg.three_d_ratio {
                FrameClass::ThreeD
            } else {
                c
            }
        }
    }
}

/// Invert one frame through the motion matrix and score it.
pub fn invert_frame(reports: &[TargetReport], m: &MotionMatrix, noise: &NoiseSigmas, cfg: &PoseConfig) -> FrameSolution {
    let points: Vec<ImagePoint> = reports.iter().map(|r| ImagePoint { r: r.r, f: r.f, snr: r.snr }).collect();
    let fm = frame_moments(reports, Weighting::Uniform);
    let crf2 = if fm.valid { fm.crf * fm.crf } else { 0.0 };
    let pearls = crf2 / (1.0 - crf2 + cfg.pearls_epsilon);
    let inv = m.matrix().try_inverse();
    let (Some(inv), true) = (inv, m.cond <= cfg.cond_guard && reports.len() >= 3) else {
        return FrameSolution {
            t: m.t,
            xyz: Vec::new(),
            noise_var: [f64::INFINITY; 3],
            scores: FrameScores { profile: 0.0, plan: 0.0, pearls },
            class: FrameClass::Invalid,
            cond: m.cond,
            singular: true,
            points,
        };
    };
    let n = reports.len() as f64;
    let mr = reports.iter().map(|x| x.r).sum::<f64>() / n;
    let mf = reports.iter().map(|x| x.f).sum::<f64>() / n;
    let ma = reports.iter().map(|x| x.a).sum::<f64>() / n;
    let xyz: Vec<[f64; 3]> = reports
        .iter()
        .map(|x| {
            let v = inv * nalgebra::Vector3::new(x.r - mr, x.f - mf, x.a - ma);
            [v[0], v[1], v[2]]
        })
        .collect();
    let s2 = [noise.sigma_r.powi(2), noise.sigma_f.powi(2), noise.sigma_a.powi(2)];
    let noise_var = [0, 1, 2].map(|k| (0..3).map(|j| inv[(k, j)].powi(2) * s2[j]).sum::<f64>());
    let ys: Vec<f64> = xyz.iter().map(|p| p[1]).collect();
    let zs: Vec<f64> = xyz.iter().map(|p| p[2]).collect();
    let scores = FrameScores { profile: variance(&zs) / noise_var[2], plan: variance(&ys) / noise_var[1], pearls };
    FrameSolution {
        t: m.t,
        class: decide_class(&scores, cfg),
        xyz,
        noise_var,
        scores,
        cond: m.cond,
        singular: false,
        points,
    }
}

/// Apply BadFit noise inflation and the class decision rule.
pub fn classify_frames(solutions: &mut [FrameSolution], badfit: &BadFitSeries, cfg: &PoseConfig) {
    for (i, s) in solutions.iter_mut().enumerate() {
        if s.singular {
            s.class = FrameClass::Invalid;
            s.xyz.clear();
            continue;
        }
        if badfit.flagged.get(i).copied().unwrap_or(false) {
            let k = cfg.badfit_inflation;
            s.noise_var = s.noise_var.map(|v| v * k);
            s.scores.profile /= k;
            s.scores.plan /= k;
        }
        s.class = decide_class(&s.scores, cfg);
        if s.class == FrameClass::Invalid {
            s.xyz.clear();
        }
    }
}

/// Count of frames per class, in a fixed order.
pub fn class_counts(solutions: &[FrameSolution]) -> [(FrameClass, usize); 5] {
    [FrameClass::Profile, FrameClass::Plan, FrameClass::ThreeD, FrameClass::StringOfPearls, FrameClass::Invalid]
        .map(|c| (c, solutions.iter().filter(|s| s.class == c).count()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompositeGrid {
    /// Cell size (m).
    pub cell: f64,
    /// Half extents (m); derived from the data when absent.
    pub half_range: Option<f64>,
    pub half_cross: Option<f64>,
    /// Frames whose rate is below this fraction of the dwell median are skipped.
    pub min_rate_fraction: f64,
}

impl Default for CompositeGrid {
    fn default() -> Self {
        Self { cell: 1.0, half_range: None, half_cross: None, min_rate_fraction: 0.1 }
    }
}

/// Accumulated range × cross-range image, row-major with cross-range rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeImage {
    pub kind: FrameClass,
    pub width: usize,
    pub height: usize,
    pub cell: f64,
    pub range_min: f64,
    pub cross_min: f64,
    pub data: Vec<f64>,
    pub frames_used: usize,
}

impl CompositeImage {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Span (m) of occupied cells along range and cross-range.
    pub fn extents(&self) -> (f64, f64) {
        let (mut c0, mut c1, mut r0, mut r1) = (usize::MAX, 0, usize::MAX, 0);
        for row in 0..self.height {
            for col in 0..self.width {
                if self.at(row, col) > 0.0 {
                    c0 = c0.min(col);
                    c1 = c1.max(col);
                    r0 = r0.min(row);
                    r1 = r1.max(row);
                }
            }
        }
        if c0 == usize::MAX {
            return (0.0, 0.0);
        }
        ((c1 - c0) as f64 * self.cell, (r1 - r0) as f64 * self.cell)
    }
}

/// Sum the frames of one class into a centroid-aligned composite.
///
/// Doppler converts to cross-range through the tilt rate for Profile frames
/// and the aspect rate for Plan frames; frames with a negative rate are
/// mirrored.
pub fn compose(solutions: &[FrameSolution], track: &AngleTrack, kind: FrameClass, grid: &CompositeGrid) -> CompositeImage {
    let rate_of = |s: &AngleSample| match kind {
        FrameClass::Profile => s.theta_dot,
        _ => s.phi_dot,
    };
    let rate_floor = grid.min_rate_fraction * median(&track.samples.iter().map(|s| rate_of(s).abs()).collect::<Vec<_>>());
    let nearest = |t: f64| {
        track
            .samples
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .copied()
    };
    let mut frames: Vec<Vec<(f64, f64, f64)>> = Vec::new();
    for s in solutions.iter().filter(|s| s.class == kind && !s.points.is_empty()) {
        let Some(ang) = nearest(s.t) else { continue };
        let rate = rate_of(&ang);
        if !(rate.abs() > rate_floor) {
            continue;
        }
        let mirror = if rate < 0.0 { -1.0 } else { 1.0 };
        let pts: Vec<(f64, f64, f64)> =
            s.points.iter().map(|p| (p.r, mirror * p.f / rate.abs(), 10f64.powf(p.snr / 10.0))).collect();
        let w: f64 = pts.iter().map(|p| p.2).sum();
        let mr = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / w;
        let mc = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / w;
        frames.push(pts.iter().map(|p| (p.0 - mr, p.1 - mc, p.2)).collect());
    }
    let cell = grid.cell;
    let auto = |f: fn(&(f64, f64, f64)) -> f64| {
        frames.iter().flatten().map(|p| f(p).abs()).fold(0.0, f64::max) + cell
    };
    let hr = grid.half_range.unwrap_or_else(|| auto(|p| p.0));
    let hc = grid.half_cross.unwrap_or_else(|| auto(|p| p.1));
    let width = (2.0 * hr / cell).ceil() as usize + 1;
    let height = (2.0 * hc / cell).ceil() as usize + 1;
    let mut data = vec![0.0; width * height];
    for p in frames.iter().flatten() {
        let col = ((p.0 + hr) / cell).round();
        let row = ((p.1 + hc) / cell).round();
        if col >= 0.0 && row >= 0.0 && (col as usize) < width && (row as usize) < height {
            data[row as usize * width + col as usize] += p.2;
        }
    }
    CompositeImage {
        kind,
        width,
        height,
        cell,
        range_min: -hr,
        cross_min: -hc,
        data,
        frames_used: frames.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{accel_of, range_of, rate_of, simulate_perfect, build_angle_track, ScenarioConfig};
    use crate::ship::Scatterer;
    use crate::ships::demo_ship;
    use crate::DEG;
    use proptest::prelude::*;

    #[test]
    fn static_geometry_is_singular() {
        let m = motion_matrix(&AngleSample::at_rest(0.0, 0.0, 0.0));
        assert_eq!(m.m[0], [1.0, 0.0, 0.0]);
        assert!(m.m[1].iter().chain(&m.m[2]).all(|v| *v == 0.0));
        assert!(m.cond.is_infinite());
    }

    #[test]
    fn steady_turn_rows() {
        let w = 0.04;
        let m = motion_matrix(&AngleSample { phi_dot: w, ..Default::default() });
        assert_eq!(m.m[1], [0.0, -w, 0.0]);
        assert_eq!(m.m[2], [-w * w, 0.0, 0.0]);
    }

    #[test]
    fn class_rule() {
        let c = PoseConfig::default();
        let s = |profile, plan, pearls| FrameScores { profile, plan, pearls };
        assert_eq!(decide_class(&s(10.0, 1.0, 0.0), &c), FrameClass::Profile);
        assert_eq!(decide_class(&s(1.0, 10.0, 0.0), &c), FrameClass::Plan);
        assert_eq!(decide_class(&s(10.0, 8.0, 0.0), &c), FrameClass::ThreeD);
        assert_eq!(decide_class(&s(10.0, 4.5, 0.0), &c), FrameClass::Profile);
        assert_eq!(decide_class(&s(10.0, 8.0, 100.0), &c), FrameClass::StringOfPearls);
        assert_eq!(decide_class(&s(1.0, 1.0, 1.0), &c), FrameClass::Invalid);
    }

    fn frame_reports(ship: &crate::ship::ShipModel, a: &AngleSample) -> Vec<TargetReport> {
        ship.scatterers
            .iter()
            .map(|s| TargetReport {
                frame_index: 0,
                t: a.t,
                snr: 30.0,
                r: range_of(s, a),
                f: rate_of(s, a),
                a: accel_of(s, a),
                doppler_width: None,
                truth_id: None,
            })
            .collect()
    }

    #[test]
    fn perfect_frame_round_trip() {
        let cfg = ScenarioConfig::default();
        let ship = demo_ship();
        let track = build_angle_track(&cfg);
        let pc = PoseConfig::default();
        let noise = pc.sigmas(1.0, 0.03, 1.0);
        let mut used = 0;
        for a in &track.samples {
            let m = motion_matrix(a);
            let sol = invert_frame(&frame_reports(&ship, a), &m, &noise, &pc);
            if sol.singular {
                continue;
            }
            used += 1;
            for (p, s) in sol.xyz.iter().zip(&ship.scatterers) {
                assert!((p[0] - s.x0).abs() < 1e-6 && (p[1] - s.y0).abs() < 1e-6 && (p[2] - s.z0).abs() < 1e-6);
            }
        }
        assert!(used > track.len() / 2);
    }

    #[test]
    fn flat_ship_in_pure_turn_has_plan_not_profile() {
        let mut pts = Vec::new();
        for i in 0..8 {
            for y in [-6.0, 6.0] {
                pts.push(Scatterer::new(-40.0 + 10.0 * i as f64 + 5.0, y, 0.0, 1.0));
            }
        }
        let ship = crate::ship::ShipModel::new(pts);
        let a = AngleSample {
            t: 0.0,
            phi: 0.6,
            theta: 0.5,
            phi_dot: 0.5 * DEG,
            theta_dot: 0.0,
            theta_ddot: -0.3 * DEG * (0.2 * std::f64::consts::PI).powi(2),
            ..Default::default()
        };
        let pc = PoseConfig::default();
        let noise = pc.sigmas(1.0, 0.03, 1.0);
        let sol = invert_frame(&frame_reports(&ship, &a), &motion_matrix(&a), &noise, &pc);
        assert!(!sol.singular);
        assert!(sol.scores.profile < 1e-6);
        assert!(sol.scores.plan > 4.0, "{:?}", sol.scores);
    }

    #[test]
    fn singular_frame_invalid() {
        let ship = demo_ship();
        let a = AngleSample::at_rest(0.0, 0.5, 0.3);
        let pc = PoseConfig::default();
        let sol = invert_frame(&frame_reports(&ship, &a), &motion_matrix(&a), &pc.sigmas(1.0, 0.03, 1.0), &pc);
        assert_eq!(sol.class, FrameClass::Invalid);
        assert!(sol.xyz.is_empty());
    }

    #[test]
    fn noise_scaling_with_integration_time() {
        let a = AngleSample { phi: 0.7, theta: 0.5, phi_dot: 0.01, theta_dot: 0.02, phi_ddot: 0.003, theta_ddot: -0.004, ..Default::default() };
        let pc = PoseConfig { range_fraction: 0.0, ..Default::default() };
        let m = motion_matrix(&a);
        let ship = demo_ship();
        let reps = frame_reports(&ship, &a);
        let n1 = invert_frame(&reps, &m, &pc.sigmas(1.0, 0.03, 1.0), &pc).noise_var;
        let pc_f = PoseConfig { accel_factor: 0.0, ..pc };
        let pc_a = PoseConfig { doppler_fraction: 0.0, ..pc };
        // Doppler-only noise scales as 1/T², acceleration-only as 1/T⁴
        for k in 1..3 {
            let f1 = invert_frame(&reps, &m, &pc_f.sigmas(1.0, 0.03, 1.0), &pc_f).noise_var[k];
            let f2 = invert_frame(&reps, &m, &pc_f.sigmas(1.0, 0.03, 2.0), &pc_f).noise_var[k];
            assert!((f1 / f2 - 4.0).abs() < 1e-9);
            let a1 = invert_frame(&reps, &m, &pc_a.sigmas(1.0, 0.03, 1.0), &pc_a).noise_var[k];
            let a2 = invert_frame(&reps, &m, &pc_a.sigmas(1.0, 0.03, 2.0), &pc_a).noise_var[k];
            assert!((a1 / a2 - 16.0).abs() < 1e-9);
            assert!((n1[k] - f1 - a1).abs() < 1e-9 * n1[k]);
        }
    }

    #[test]
    fn badfit_flag_inflates_noise() {
        let cfg = ScenarioConfig::default();
        let ship = demo_ship();
        let track = build_angle_track(&cfg);
        let pc = PoseConfig::default();
        let noise = pc.sigmas(1.0, 0.03, 1.0);
        let a = track.samples[28];
        let mut sols = vec![invert_frame(&frame_reports(&ship, &a), &motion_matrix(&a), &noise, &pc)];
        let before = sols[0].scores;
        let bf = BadFitSeries { t: vec![a.t], badfit: vec![9.0], flagged: vec![true], threshold: 3.0 };
        classify_frames(&mut sols, &bf, &pc);
        assert!((sols[0].scores.plan - before.plan / 10.0).abs() < 1e-12 * before.plan);
        assert_eq!(sols[0].class, decide_class(&sols[0].scores, &pc));
    }

    #[test]
    fn single_frame_composite_centered() {
        let cfg = ScenarioConfig::default();
        let ship = demo_ship();
        let track = build_angle_track(&cfg);
        let dwell = simulate_perfect(&ship, &track, &cfg);
        let pc = PoseConfig::default();
        let a = track.samples[10];
        let mut sol = invert_frame(&dwell.frames[10].reports, &motion_matrix(&a), &pc.sigmas(1.0, 0.03, 1.0), &pc);
        sol.class = FrameClass::Plan;
        let img = compose(&[sol.clone()], &track, FrameClass::Plan, &CompositeGrid::default());
        assert_eq!(img.frames_used, 1);
        let (mut sr, mut sc, mut w) = (0.0, 0.0, 0.0);
        for row in 0..img.height {
            for col in 0..img.width {
                let v = img.at(row, col);
                sr += v * (img.range_min + col as f64 * img.cell);
                sc += v * (img.cross_min + row as f64 * img.cell);
                w += v;
            }
        }
        assert!((sr / w).abs() < 2.0 && (sc / w).abs() < 2.0);
        let none = compose(&[sol], &track, FrameClass::Profile, &CompositeGrid::default());
        assert_eq!(none.frames_used, 0);
        assert!(none.data.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mirrored_pair_aligns() {
        let pts = vec![
            ImagePoint { r: -10.0, f: 0.3, snr: 20.0 },
            ImagePoint { r: 0.0, f: -0.1, snr: 20.0 },
            ImagePoint { r: 12.0, f: 0.5, snr: 20.0 },
        ];
        let neg: Vec<ImagePoint> = pts.iter().map(|p| ImagePoint { f: -p.f, ..*p }).collect();
        let sol = |t: f64, points: Vec<ImagePoint>| FrameSolution {
            t,
            xyz: vec![],
            noise_var: [1.0; 3],
            scores: FrameScores::default(),
            class: FrameClass::Plan,
            cond: 1.0,
            singular: false,
            points,
        };
        let track = AngleTrack {
            samples: vec![
                AngleSample { t: 0.0, phi_dot: 0.05, ..Default::default() },
                AngleSample { t: 1.0, phi_dot: -0.05, ..Default::default() },
            ],
            dt: 1.0,
        };
        let grid = CompositeGrid { cell: 0.5, half_range: Some(20.0), half_cross: Some(20.0), ..Default::default() };
        let img = compose(&[sol(0.0, pts.clone()), sol(1.0, neg.clone())], &track, FrameClass::Plan, &grid);
        let peak = img.data.iter().cloned().fold(0.0, f64::max);
        let unmirrored_track = AngleTrack {
            samples: vec![track.samples[0], AngleSample { t: 1.0, phi_dot: 0.05, ..Default::default() }],
            dt: 1.0,
        };
        let raw = compose(&[sol(0.0, pts), sol(1.0, neg)], &unmirrored_track, FrameClass::Plan, &grid);
        let raw_peak = raw.data.iter().cloned().fold(0.0, f64::max);
        assert!(peak > raw_peak);
    }

    fn arb_angles() -> impl Strategy<Value = AngleSample> {
        (-1.3..1.3f64, -1.3..1.3f64, -0.1..0.1f64, -0.1..0.1f64, -0.05..0.05f64, -0.05..0.05f64)
            .prop_map(|(phi, theta, phi_dot, theta_dot, phi_ddot, theta_ddot)| AngleSample {
                t: 0.0,
                phi,
                theta,
                phi_dot,
                theta_dot,
                phi_ddot,
                theta_ddot,
            })
    }

    proptest! {
        #[test]
        fn matrix_reproduces_forward_model(a in arb_angles(), x in -80.0..80.0f64, y in -15.0..15.0f64, z in -10.0..25.0f64) {
            let s = Scatterer::new(x, y, z, 1.0);
            let out = motion_matrix(&a).apply([x, y, z]);
            let scale = 100.0;
            prop_assert!((out[0] - range_of(&s, &a)).abs() < 1e-12 * scale);
            prop_assert!((out[1] - rate_of(&s, &a)).abs() < 1e-13 * scale);
            prop_assert!((out[2] - accel_of(&s, &a)).abs() < 1e-13 * scale);
        }

        #[test]
        fn condition_at_least_one(a in arb_angles()) {
            prop_assert!(motion_matrix(&a).cond >= 1.0 - 1e-12);
        }

        #[test]
        fn single_class_per_frame(p in 0.0..100.0f64, q in 0.0..100.0f64, r in 0.0..200.0f64) {
            let s = FrameScores { profile: p, plan: q, pearls: r };
            let c = decide_class(&s, &PoseConfig::default());
            let over = p > 4.0 || q > 4.0 || r > 49.0;
            prop_assert_eq!(c == FrameClass::Invalid, !over);
        }
    }
}
