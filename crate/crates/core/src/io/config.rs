use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::EmbedMode;
use crate::gpr::GpHyperparameters;
use crate::kernel::KernelHyperparameters;
use crate::molgraph::RadiiTable;
use crate::selection::HyperGrid;

use super::IoError;

/// Settings shared by every CLI subcommand. All fields have defaults, so `{}`
/// is a valid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Candidates searched by `cv`.
    pub grid: HyperGrid,
    /// Fixed kernel hyperparameters for `kernel`, `train` and `distance`.
    pub kernel: KernelHyperparameters,
    /// Fixed GP hyperparameters for `train`.
    pub gp: GpHyperparameters,
    pub normalized: bool,
    pub train_fraction: f64,
    pub radii: RadiiTable,
    /// Metrics emitted by `predict`: any of `mae`, `rmse`, `r2`.
    pub metrics: Vec<String>,
    pub embed_mode: EmbedMode,
    pub distance_bins: usize,
    /// Bin width for the Bertz-index histogram.
    pub bertz_bin_width: f64,
    /// Also write wall-clock timings next to the `cv` report.
    pub timing_sidecar: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: HyperGrid::default(),
            kernel: KernelHyperparameters::default(),
            gp: GpHyperparameters::default(),
            normalized: true,
            train_fraction: 550.0 / 588.0,
            radii: RadiiTable::default(),
            metrics: vec!["mae".into(), "rmse".into(), "r2".into()],
            embed_mode: EmbedMode::Raw,
            distance_bins: 20,
            bertz_bin_width: 25.0,
            timing_sidecar: true,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let text = super::read_to_string(path.as_ref())?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| IoError::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Range checks for every module, run before any computation.
    pub fn validate(&self) -> Result<(), IoError> {
        let bad = |e: &dyn std::fmt::Display| IoError::InvalidConfig(e.to_string());
        self.grid.validate().map_err(|e| bad(&e))?;
        self.kernel.validate().map_err(|e| bad(&e))?;
        self.gp.validate().map_err(|e| bad(&e))?;
        self.radii.validate().map_err(|e| bad(&e))?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(bad(&format!("train_fraction {} must lie in (0, 1)", self.train_fraction)));
        }
        if let Some(m) = self.metrics.iter().find(|m| !["mae", "rmse", "r2"].contains(&m.as_str())) {
            return Err(bad(&format!("unknown metric {m:?}")));
        }
        if self.distance_bins == 0 {
            return Err(bad(&"distance_bins must be positive"));
        }
        if !(self.bertz_bin_width > 0.0 && self.bertz_bin_width.is_finite()) {
            return Err(bad(&"bertz_bin_width must be positive"));
        }
        Ok(())
    }
}
