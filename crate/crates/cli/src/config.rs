//! Experiment configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use circle_thermo::dynamics::{CircleMap, FunctionSpec, Potential, TrigPoly};
use circle_thermo::operator::Grid;
use serde::Deserialize;
use thiserror::Error;

use crate::Command;

/// Failure to read or validate a configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration {path}: {message}")]
    Schema { path: PathBuf, message: String },
}

/// Acceptance bound on one reported metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub target: Option<f64>,
    /// Allowed distance from `target`.
    pub tol: Option<f64>,
}

impl Bound {
    pub fn accepts(&self, v: f64) -> bool {
        v.is_finite()
            && self.min.is_none_or(|m| v >= m)
            && self.max.is_none_or(|m| v <= m)
            && self.target.is_none_or(|t| (v - t).abs() <= self.tol.unwrap_or(0.0))
    }

    fn validate(&self) -> Result<(), String> {
        let all = [self.min, self.max, self.target, self.tol];
        if all.iter().flatten().any(|v| !v.is_finite()) {
            return Err("non-finite bound".into());
        }
        if all.iter().all(Option::is_none) {
            return Err("empty bound".into());
        }
        if self.tol.is_some() != self.target.is_some() {
            return Err("\"target\" and \"tol\" go together".into());
        }
        Ok(())
    }
}

/// Perturbation direction `(H₁, H₂)` for response experiments.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    #[serde(default)]
    pub h1: FunctionSpec,
    #[serde(default)]
    pub h2: FunctionSpec,
}

/// One-parameter family `f + εH₁` sampled at the given `ε`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub direction: FunctionSpec,
    pub eps: Vec<f64>,
}

/// One experiment. Command-specific fields are optional; each command
/// checks for the ones it needs.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub case_id: Option<String>,
    pub map: FunctionSpec,
    #[serde(default)]
    pub potential: FunctionSpec,
    pub observable: Option<FunctionSpec>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    pub t_grid: Option<Vec<f64>>,
    pub s_grid: Option<Vec<f64>>,
    pub c_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub directions: Vec<Direction>,
    #[serde(default)]
    pub chain_rule: bool,
    pub family: Option<FamilySpec>,
    pub interval: Option<[f64; 2]>,
    pub n: Option<usize>,
    pub n_values: Option<Vec<usize>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    /// Period bound for orbit sums and periodic defects.
    pub period: Option<usize>,
    /// Tilt `t` for the exact finite-`n` free-energy check.
    pub tilt: Option<f64>,
    pub n_max: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, Bound>,
}

fn default_grid() -> usize {
    circle_thermo::operator::DEFAULT_NODES
}

impl ExperimentConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let schema = |message: String| ConfigError::Schema { path: path.to_path_buf(), message };
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        cfg.validate().map_err(schema)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text, path)
    }

    fn validate(&self) -> Result<(), String> {
        Grid::new(self.grid).map_err(|e| e.to_string())?;
        self.map.to_map().map_err(|e| e.to_string())?;
        let reals = [&self.t_grid, &self.s_grid, &self.c_grid];
        if reals.iter().filter_map(|g| g.as_ref()).flatten().any(|v| !v.is_finite()) {
            return Err("grid values must be finite".into());
        }
        for grid in reals.iter().filter_map(|g| g.as_ref()) {
            if grid.is_empty() {
                return Err("grids must be nonempty".into());
            }
        }
        if self.interval.is_some_and(|[a, b]| !(a.is_finite() && b.is_finite() && a < b)) {
            return Err("\"interval\" must be finite with a < b".into());
        }
        if self.tilt.is_some_and(|t| !t.is_finite()) {
            return Err("\"tilt\" must be finite".into());
        }
        if let Some(f) = &self.family {
            if f.eps.len() < 2 || f.eps.iter().any(|e| !e.is_finite()) {
                return Err("\"family.eps\" needs at least two finite values".into());
            }
        }
        for (name, bound) in &self.thresholds {
            bound.validate().map_err(|e| format!("threshold {name}: {e}"))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.grid).expect("validated")
    }

    pub fn circle_map(&self) -> CircleMap {
        self.map.to_map().expect("validated")
    }

    pub fn phi(&self, map: &CircleMap) -> Result<Potential, String> {
        self.potential.to_potential(map).map_err(|e| format!("potential: {e}"))
    }

    pub fn psi(&self) -> Result<Potential, String> {
        let spec = self.observable.as_ref().ok_or("missing \"observable\"")?;
        Ok(spec.to_trig().map_err(|e| format!("observable: {e}"))?.into())
    }

    pub fn require<T: Clone>(&self, value: &Option<T>, key: &str) -> Result<T, String> {
        value.clone().ok_or_else(|| format!("missing \"{key}\""))
    }
}

impl Direction {
    pub fn parts(&self, map: &CircleMap) -> Result<(TrigPoly, Potential), String> {
        let h1 = self.h1.to_trig().map_err(|e| format!("h1: {e}"))?;
        let h2 = self.h2.to_potential(map).map_err(|e| format!("h2: {e}"))?;
        Ok((h1, h2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(text, Path::new("test.json"))
    }

    #[test]
    fn minimal_config() {
        let cfg = parse(r#"{"map": {"degree": 2}}"#).unwrap();
        assert_eq!(cfg.grid, 128);
        assert!(cfg.thresholds.is_empty());
        assert!(cfg.command.is_none());
    }

    #[test]
    fn schema_rejections() {
        for bad in [
            r#"{"map": {"degree": 2}, "colour": 1}"#,
            r#"{"map": {"degree": 2}, "grid": 7}"#,
            r#"{"map": {"degree": 2}, "grid": 2048}"#,
            r#"{"map": {"sin": [0.1]}}"#,
            r#"{"map": {"degree": 2, "sin": [0.5]}}"#,
            r#"{"map": {"degree": 2}, "interval": [1, 0]}"#,
            r#"{"map": {"degree": 2}, "thresholds": {"x": {}}}"#,
            r#"{"map": {"degree": 2}, "thresholds": {"x": {"target": 1}}}"#,
            r#"{"map": {"degree": 2}, "command": "dance"}"#,
            r#"{"map": {"degree": 2}"#,
        ] {
            assert!(matches!(parse(bad), Err(ConfigError::Schema { .. })), "{bad}");
        }
    }

    #[test]
    fn bounds() {
        let b = Bound { target: Some(1.0), tol: Some(0.1), ..Bound::default() };
        assert!(b.accepts(1.05) && !b.accepts(1.2) && !b.accepts(f64::NAN));
        let b = Bound { max: Some(0.0), ..Bound::default() };
        assert!(b.accepts(0.0) && !b.accepts(1e-300));
    }
}
