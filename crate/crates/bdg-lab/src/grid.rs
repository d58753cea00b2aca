use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform time grid shared by every path discretization.
///
/// `n_steps` must be a power of two so that `dt = horizon / n_steps` is exact
/// in binary floating point and refined grids nest inside coarse ones. Paths
/// that must run past the horizon (e.g. until a first hit) extend in chunks of
/// `extension_chunk` steps, up to the absolute ceiling `hard_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub horizon: f64,
    pub n_steps: usize,
    pub extension_chunk: usize,
    pub hard_cap: f64,
}

impl GridSpec {
    pub fn new(horizon: f64, n_steps: usize, extension_chunk: usize, hard_cap: f64) -> Result<Self> {
        let grid = GridSpec { horizon, n_steps, extension_chunk, hard_cap };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid over `[0, horizon]` with no room for extension.
    pub fn fixed(horizon: f64, n_steps: usize) -> Result<Self> {
        Self::new(horizon, n_steps, n_steps.max(1), horizon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(LabError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.n_steps == 0 || !self.n_steps.is_power_of_two() {
            return Err(LabError::Config(format!(
                "n_steps must be a power of two, got {}",
                self.n_steps
            )));
        }
        if self.extension_chunk < 1 {
            return Err(LabError::Config("extension_chunk must be >= 1".into()));
        }
        if self.hard_cap < self.horizon {
            return Err(LabError::Config(format!(
                "hard_cap {} must be >= horizon {}",
                self.hard_cap, self.horizon
            )));
        }
        Ok(())
    }

    /// Step size; exact because `n_steps` is a power of two.
    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    /// Time of grid node `i`.
    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt()
    }

    /// Index of the grid node nearest to `t`.
    pub fn index_of(&self, t: f64) -> usize {
        (t / self.dt()).round() as usize
    }

    /// Maximum number of steps a path may ever take.
    pub fn max_steps(&self) -> usize {
        (self.hard_cap / self.dt()).round() as usize
    }
}
