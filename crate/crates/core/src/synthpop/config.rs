use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Upper bound on the agent count accepted from a config file.
pub const MAX_AGENTS: usize = 10_000_000;
const MAX_GRID_SIDE: usize = 1_000;

/// Population generator settings, read from a TOML file:
///
/// ```toml
/// n_agents = 10000
/// mean_household_size = 2.5
/// n_schools = 24
/// n_workplaces = 200
/// employment_rate = 0.7
/// grid_rows = 12
/// grid_cols = 12
///
/// [region]
/// min_x = 0.0
/// min_y = 0.0
/// max_x = 36.0
/// max_y = 36.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    pub n_agents: usize,
    pub mean_household_size: f64,
    pub n_schools: usize,
    pub n_workplaces: usize,
    pub employment_rate: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub region: Rect,
}

impl PopulationConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: PopulationConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("population config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("population config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_agents > MAX_AGENTS {
            return Err(Error::Config(format!(
                "n_agents = {} exceeds the supported maximum {MAX_AGENTS}",
                self.n_agents
            )));
        }
        if !(self.mean_household_size.is_finite() && self.mean_household_size >= 1.0) {
            return Err(Error::Config(format!(
                "mean_household_size must be at least 1 (household sizes are in [1, 8]), got {}",
                self.mean_household_size
            )));
        }
        if !(0.0..=1.0).contains(&self.employment_rate) {
            return Err(Error::Config(format!(
                "employment_rate must lie in [0, 1], got {}",
                self.employment_rate
            )));
        }
        if self.grid_rows == 0 || self.grid_cols == 0 {
            return Err(Error::Config(format!(
                "grid must have positive dimensions, got {}x{}",
                self.grid_rows, self.grid_cols
            )));
        }
        if self.grid_rows > MAX_GRID_SIDE || self.grid_cols > MAX_GRID_SIDE {
            return Err(Error::Config(format!(
                "grid side limited to {MAX_GRID_SIDE}, got {}x{}",
                self.grid_rows, self.grid_cols
            )));
        }
        if !self.region.is_valid() {
            return Err(Error::Config(format!(
                "region must be finite with positive area, got {:?}",
                self.region
            )));
        }
        if self.n_schools > MAX_AGENTS || self.n_workplaces > MAX_AGENTS {
            return Err(Error::Config("facility counts are implausibly large".into()));
        }
        Ok(())
    }
}
