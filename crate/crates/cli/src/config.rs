//! Run configuration file.

use std::path::Path;

use isar3d_core::angles::EstimatorOptions;
use isar3d_core::length::LengthConfig;
use isar3d_core::pose::{CompositeGrid, PoseConfig};
use isar3d_core::simulator::ScenarioConfig;
use isar3d_core::validation::BadFitConfig;
use isar3d_core::{Scatterer, ShipModel, Weighting};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

/// Ship used in simulate mode.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShipChoice {
    #[default]
    Demo,
    Box {
        length: f64,
    },
    Collinear {
        length: f64,
        n: usize,
    },
    Custom {
        scatterers: Vec<Scatterer>,
        #[serde(default)]
        loa: Option<f64>,
    },
}

impl ShipChoice {
    pub fn build(&self) -> Result<ShipModel, RunError> {
        let model = match self {
            ShipChoice::Demo => isar3d_core::ships::demo_ship(),
            ShipChoice::Box { length } => isar3d_core::ships::box_ship(*length),
            ShipChoice::Collinear { length, n } => isar3d_core::ships::collinear_ship(*length, *n),
            ShipChoice::Custom { scatterers, loa } => {
                let m = ShipModel::new(scatterers.clone());
                match loa {
                    Some(l) => m.with_loa(*l),
                    None => m,
                }
            }
        };
        model.validate().map_err(|e| RunError::Config(format!("ship: {e}")))?;
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Simulation scenario; required for simulate and rejected for analyze.
    pub scenario: Option<ScenarioConfig>,
    pub ship: ShipChoice,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Use exact reports instead of the noisy, degraded simulation.
    pub perfect: bool,
    pub weighting: Weighting,
    pub estimator: EstimatorOptions,
    pub validation: BadFitConfig,
    pub pose: PoseConfig,
    pub length: LengthConfig,
    pub composite: CompositeGrid,
    pub emit_plots: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
    }

    /// Scenario with the seed override applied.
    pub fn scenario(&self) -> Result<ScenarioConfig, RunError> {
        let mut s = self
            .scenario
            .clone()
            .ok_or_else(|| RunError::Config("simulate mode needs a scenario".into()))?;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        s.validate().map_err(|e| RunError::Config(format!("scenario: {e}")))?;
        Ok(s)
    }
}
