//! Flat JSON run configurations with explicit defaults.
//!
//! Every field has a default, unknown fields are rejected with the offending
//! name, and the fully resolved configuration is echoed into the run
//! manifest so a run can be reproduced from its manifest alone.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchmarkConfig {
    pub t_steps: usize,
    pub tol: f64,
    pub target_s0: f64,
    pub target_s1: f64,
    pub direction_tol: f64,
    pub saturation_tol: f64,
    pub witness_r_norm: f64,
    pub witness_n_dirs: u64,
    pub witness_margin: f64,
    pub seed: u64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            t_steps: 60,
            tol: walkbell_core::DEFAULT_TOL,
            target_s0: 0.843,
            target_s1: 0.538,
            direction_tol: 0.005,
            saturation_tol: 1e-6,
            witness_r_norm: 1.45,
            witness_n_dirs: 10_000,
            witness_margin: walkbell_core::DEFAULT_WITNESS_MARGIN,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanRConfig {
    pub t_steps: usize,
    pub tol: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub n_dirs: u64,
    pub seed: u64,
    pub target_s0: f64,
    pub target_s1: f64,
    pub direction_tol: f64,
    pub witness_margin: f64,
}

impl Default for ScanRConfig {
    fn default() -> Self {
        Self {
            t_steps: 60,
            tol: walkbell_core::DEFAULT_TOL,
            r_min: 0.0,
            r_max: 2.0,
            r_step: 0.05,
            n_dirs: 10_000,
            seed: 1,
            target_s0: 0.843,
            target_s1: 0.538,
            direction_tol: 0.005,
            witness_margin: walkbell_core::DEFAULT_WITNESS_MARGIN,
        }
    }
}

impl ScanRConfig {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if !self.r_step.is_finite() || self.r_step <= 0.0 || self.r_max < self.r_min {
            return Err(CliError::Config(format!(
                "invalid magnitude grid: r_min={}, r_max={}, r_step={}",
                self.r_min, self.r_max, self.r_step
            )));
        }
        let n = ((self.r_max - self.r_min) / self.r_step).round() as usize;
        let grid: Vec<f64> = (0..=n).map(|k| self.r_min + k as f64 * self.r_step).collect();
        if grid.is_empty() {
            return Err(CliError::Config("empty magnitude grid".into()));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoarseConfig {
    pub t_steps: usize,
    pub r_norm: f64,
    pub x0_grid: Vec<f64>,
    pub n_trials: u64,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub sign_of_zero: i8,
}

impl Default for CoarseConfig {
    fn default() -> Self {
        Self {
            t_steps: 60,
            r_norm: 1.45,
            x0_grid: vec![0.6],
            n_trials: 10_000,
            seeds: (1..=8).collect(),
            tol: walkbell_core::DEFAULT_TOL,
            sign_of_zero: 1,
        }
    }
}

impl CoarseConfig {
    pub fn to_search_config(&self) -> walkbell_core::SearchConfig {
        walkbell_core::SearchConfig {
            t_steps: self.t_steps,
            r_norm: self.r_norm,
            n_direction_samples: 0,
            n_trials: self.n_trials,
            x0_grid: self.x0_grid.clone(),
            seeds: self.seeds.clone(),
            tol: self.tol,
            sign_of_zero: self.sign_of_zero,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiniteTimeConfig {
    pub t_list: Vec<usize>,
    pub r_norm: f64,
    /// Empty grid means every integer site in `[0, T]` per walk time.
    pub x0_grid: Vec<f64>,
    pub n_trials: u64,
    pub seeds: Vec<u64>,
    pub tol: f64,
    pub sign_of_zero: i8,
}

impl Default for FiniteTimeConfig {
    fn default() -> Self {
        Self {
            t_list: vec![2, 4, 6, 8, 10],
            r_norm: 1.45,
            x0_grid: vec![],
            n_trials: 10_000,
            seeds: (1..=8).collect(),
            tol: walkbell_core::DEFAULT_TOL,
            sign_of_zero: 1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmulateConfig {
    /// Path to a stored witness record JSON.
    pub witness_path: String,
    pub n_shots_list: Vec<u64>,
    pub n_reps: u64,
    pub seed: u64,
}

impl Default for EmulateConfig {
    fn default() -> Self {
        Self {
            witness_path: String::new(),
            n_shots_list: vec![2_000, 6_325, 20_000],
            n_reps: 300,
            seed: 7,
        }
    }
}

/// Loads a config from JSON, or the default when no path is given.
pub fn load<C: DeserializeOwned + Default>(path: Option<&Path>) -> Result<C, CliError> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("config {}: {e}", p.display()))
            })
        }
    }
}
