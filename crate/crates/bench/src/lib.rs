//! Benchmark fixtures for the ISAR pipeline.

use isar3d_core::ship::Dwell;
use isar3d_core::simulator::{build_angle_track, simulate_degraded, ScenarioConfig};

/// The default scenario with the demo ship, simulated with noise.
pub fn default_dwell() -> Dwell {
    let cfg = ScenarioConfig::default();
    let track = build_angle_track(&cfg);
    simulate_degraded(&isar3d_core::ships::demo_ship(), &track, &cfg)
}
