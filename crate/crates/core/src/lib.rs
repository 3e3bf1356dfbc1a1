//! Ship motion estimation from ISAR target reports.
//!
//! The crate recovers a ship's aspect and tilt angle history from per-frame
//! range, Doppler and acceleration reports, inverts the rigid-body motion
//! model to drydock coordinates, classifies frames, estimates length overall
//! and scores every frame for consistency with the rigid-body model.
//!
//! ```
//! use isar3d_core::{simulator, ships, angles};
//!
//! let cfg = simulator::ScenarioConfig::default();
//! let ship = ships::demo_ship();
//! let track = simulator::build_angle_track(&cfg);
//! let dwell = simulator::simulate_perfect(&ship, &track, &cfg);
//! let series = isar3d_core::moments::moments_series(&dwell, Default::default()).unwrap();
//! let est = angles::estimate_angles(&series, cfg.mean_aspect, cfg.mean_tilt, &Default::default()).unwrap();
//! assert_eq!(est.track.samples.len(), dwell.frames.len());
//! ```

pub mod angles;
pub mod error;
pub mod length;
pub mod moments;
pub mod pose;
pub mod ship;
pub mod ships;
pub mod simulator;
pub mod stats;
pub mod validation;

pub use error::{CoreError, Result};
pub use ship::{
    ship_moments, AngleSample, AngleTrack, Dwell, DwellMeta, Frame, Scatterer, ShipModel,
    ShipMoments, TargetReport,
};
pub use moments::{FrameMoments, Weighting};
pub use pose::{FrameClass, FrameSolution, MotionMatrix, NoiseSigmas};
pub use validation::{BadFitSeries, ConsistencyRecord};
pub use length::LengthEstimate;

pub(crate) const DEG: f64 = std::f64::consts::PI / 180.0;
