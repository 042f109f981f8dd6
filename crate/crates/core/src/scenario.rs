//! Scenario files (JSON, schema 1).
//!
//! ```json
//! {
//!   "schema": 1,
//!   "name": "riemann",
//!   "model": {"name": "gc", "B": 1.0, "alpha": 0.5, "source": {"kind": "exit", "k": 0.1}},
//!   "initial": {
//!     "rho": {"kind": "riemann", "left": 1.0, "right": 0.5, "x0": 0.25},
//!     "w":   {"kind": "constant", "value": 1.5}
//!   },
//!   "grid": {"x_left": 0.0, "x_right": 1.0, "n_cells": 1024, "boundary": "outflow"},
//!   "t_end": 0.5,
//!   "record_every": 0.05,
//!   "epsilon": [4e-3, 2e-3, 1e-3],
//!   "region": {"C1": -0.6, "C2": 1.7}
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::characteristics::RegionSpec;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid};
use crate::model::{ModelConfig, ModelSpec};
use crate::profile::{InitialProfile, Profile, ProfileConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub rho: ProfileConfig,
    pub w: ProfileConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
}

fn default_boundary() -> Boundary {
    Boundary::Periodic
}

fn default_cfl() -> f64 {
    0.45
}

fn default_diff_fraction() -> f64 {
    0.4
}

/// The on-disk form of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema: u32,
    pub name: String,
    pub model: ModelConfig,
    pub initial: InitialConfig,
    pub grid: GridConfig,
    pub t_end: f64,
    /// Time between recorded snapshots; 0 records only t = 0 and t_end.
    #[serde(default)]
    pub record_every: f64,
    /// Strictly decreasing; empty means an inviscid finite-volume run.
    #[serde(default)]
    pub epsilon: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionSpec>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_diff_fraction")]
    pub diff_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
}

/// A validated scenario with the model built and profiles loaded.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub model_config: ModelConfig,
    pub model: ModelSpec,
    pub rho0: InitialProfile,
    pub w0: InitialProfile,
    /// Set when w₀ is spatially constant.
    pub w_const: Option<f64>,
    pub grid: Grid,
    pub t_end: f64,
    pub record_every: f64,
    pub epsilons: Vec<f64>,
    pub region: Option<RegionSpec>,
    pub cfl: f64,
    pub diff_fraction: f64,
    pub outputs: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validates and resolves; relative table paths are taken against `base_dir`.
    pub fn resolve(&self, base_dir: &Path) -> Result<Scenario> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        let model = self.model.build()?;
        let grid = Grid::new(self.grid.x_left, self.grid.x_right, self.grid.n_cells, self.grid.boundary)?;
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.record_every >= 0.0) {
            return Err(Error::Config(format!("record_every must be >= 0, got {}", self.record_every)));
        }
        validate_epsilons(&self.epsilon)?;
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1), got {}", self.cfl)));
        }
        if !(self.diff_fraction > 0.0 && self.diff_fraction < 0.5) {
            return Err(Error::Config(format!(
                "diff_fraction must lie in (0, 0.5), got {}",
                self.diff_fraction
            )));
        }
        let rho0 = self.initial.rho.resolve(base_dir)?;
        let w0 = self.initial.w.resolve(base_dir)?;
        for (i, x) in grid.centers().into_iter().enumerate() {
            let r = rho0.at(x);
            if !(r >= 0.0) || !r.is_finite() {
                return Err(Error::Input(format!("initial rho = {r} at cell {i} (x = {x}) must be >= 0")));
            }
            if !w0.at(x).is_finite() {
                return Err(Error::Input(format!("initial w is not finite at cell {i} (x = {x})")));
            }
        }
        Ok(Scenario {
            name: self.name.clone(),
            model_config: self.model.clone(),
            model,
            rho0,
            w0,
            w_const: self.initial.w.constant_value(),
            grid,
            t_end: self.t_end,
            record_every: self.record_every,
            epsilons: self.epsilon.clone(),
            region: self.region,
            cfl: self.cfl,
            diff_fraction: self.diff_fraction,
            outputs: self.outputs.clone(),
        })
    }
}

pub fn validate_epsilons(eps: &[f64]) -> Result<()> {
    if let Some(bad) = eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::Config(format!("epsilon values must be positive, got {bad}")));
    }
    if eps.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Config(format!("epsilon list must be strictly decreasing, got {eps:?}")));
    }
    Ok(())
}

impl Scenario {
    /// Reads and resolves a scenario file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg = ScenarioConfig::from_json(&text)?;
        cfg.resolve(path.parent().unwrap_or_else(|| Path::new(".")))
    }

    pub fn rho0_values(&self) -> Vec<f64> {
        self.grid.centers().into_iter().map(|x| self.rho0.at(x)).collect()
    }

    pub fn w0_values(&self) -> Vec<f64> {
        self.grid.centers().into_iter().map(|x| self.w0.at(x)).collect()
    }

    /// ‖ρ₀‖_{L¹} on the grid.
    pub fn rho0_l1(&self) -> f64 {
        self.rho0_values().iter().map(|r| r.abs()).sum::<f64>() * self.grid.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "schema": 1, "name": "t",
        "model": {"name": "gc", "B": 1.0, "alpha": 0.5},
        "initial": {"rho": {"kind": "constant", "value": 1.0}, "w": {"kind": "constant", "value": 2.0}},
        "grid": {"x_left": 0.0, "x_right": 1.0, "n_cells": 16},
        "t_end": 0.1, "epsilon": [0.01, 0.005]
    }"#;

    #[test]
    fn parses_and_resolves() {
        let s = ScenarioConfig::from_json(BASE).unwrap().resolve(Path::new(".")).unwrap();
        assert_eq!(s.grid.boundary, Boundary::Periodic);
        assert_eq!(s.w_const, Some(2.0));
        assert_eq!(s.cfl, 0.45);
        assert!((s.rho0_l1() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_decreasing_epsilon() {
        let text = BASE.replace("[0.01, 0.005]", "[0.01, 0.01]");
        let err = ScenarioConfig::from_json(&text).unwrap().resolve(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("strictly decreasing"));
    }

    #[test]
    fn rejects_negative_density_and_bad_schema() {
        let text = BASE.replace("\"value\": 1.0", "\"value\": -1.0");
        assert!(ScenarioConfig::from_json(&text).unwrap().resolve(Path::new(".")).is_err());
        let text = BASE.replace("\"schema\": 1", "\"schema\": 2");
        assert!(ScenarioConfig::from_json(&text).unwrap().resolve(Path::new(".")).is_err());
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        let text = BASE.replace("\"t_end\"", "\"bogus\": 1, \"t_end\"");
        assert!(ScenarioConfig::from_json(&text).is_err());
    }
}
