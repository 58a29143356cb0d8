//! Run configuration: a single TOML file with a documented schema.
//! Unknown keys are rejected; validation failures are itemized.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    TaylorGreen,
    Abc,
    Random,
}

impl Scenario {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::TaylorGreen => "taylor_green",
            Scenario::Abc => "abc",
            Scenario::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbcParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for AbcParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomParams {
    pub spectrum_slope: f64,
    pub k_peak: f64,
    /// Final `|u|_inf`; zero selects the zero-velocity field.
    pub amplitude: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        Self {
            spectrum_slope: -2.0,
            k_peak: 2.0,
            amplitude: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaConfig {
    pub enabled: bool,
    /// Regularization weight; absent selects `1e-6 |omega|_inf^2`.
    pub lambda_reg: Option<f64>,
    pub cg_tol: f64,
    /// Iteration cap; zero selects `10 n^3`.
    pub cg_max_iter: usize,
    /// Field lines traced from the final snapshot; zero disables.
    pub line_seeds: usize,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            lambda_reg: None,
            cg_tol: 1e-10,
            cg_max_iter: 0,
            line_seeds: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticleLayout {
    Lattice,
    OmegaStraddle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticlesConfig {
    pub enabled: bool,
    pub layout: ParticleLayout,
    /// Lattice: seeds per axis (count^3 particles). Straddle: total seeds.
    pub count: usize,
    pub seed: u64,
}

impl Default for ParticlesConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            layout: ParticleLayout::Lattice,
            count: 8,
            seed: 0,
        }
    }
}

/// Everything a run needs; round-trips through TOML bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub grid_n: usize,
    pub viscosity: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub dt_max: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_diag_every")]
    pub diag_every_steps: u64,
    #[serde(default = "default_omega_threshold")]
    pub omega_threshold_rel: f64,
    /// Epsilon sweep list for `sweep-epsilon`; empty selects
    /// {1e-3, 1e-6, 1e-9}.
    #[serde(default)]
    pub omega_threshold_sweep: Vec<f64>,
    #[serde(default)]
    pub theta: ThetaConfig,
    #[serde(default)]
    pub particles: ParticlesConfig,
    pub output_dir: PathBuf,
    /// Checkpoint cadence in steps; zero writes only the final checkpoint.
    #[serde(default)]
    pub checkpoint_every_steps: u64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub abc: AbcParams,
    #[serde(default)]
    pub random: RandomParams,
}

fn default_cfl() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_diag_every() -> u64 {
    1
}

fn default_omega_threshold() -> f64 {
    1e-6
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("parse failure: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("serialize failure: {e}")))
    }

    /// Effective epsilon sweep list.
    pub fn sweep_epsilons(&self) -> Vec<f64> {
        if self.omega_threshold_sweep.is_empty() {
            vec![1e-3, 1e-6, 1e-9]
        } else {
            self.omega_threshold_sweep.clone()
        }
    }

    /// Itemized validation; every problem is reported, not just the first.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.grid_n < 8 || !self.grid_n.is_power_of_two() {
            problems.push(format!(
                "grid_n must be a power of two >= 8, got {}",
                self.grid_n
            ));
        }
        if !(self.viscosity >= 0.0) || !self.viscosity.is_finite() {
            problems.push(format!(
                "viscosity must be finite and >= 0, got {}",
                self.viscosity
            ));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            problems.push(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            problems.push(format!("cfl must be in (0, 1], got {}", self.cfl));
        }
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            problems.push(format!("dt_max must be positive, got {}", self.dt_max));
        }
        if self.diag_every_steps == 0 {
            problems.push("diag_every_steps must be >= 1".into());
        }
        if !(self.omega_threshold_rel > 0.0 && self.omega_threshold_rel < 1.0) {
            problems.push(format!(
                "omega_threshold_rel must be in (0, 1), got {}",
                self.omega_threshold_rel
            ));
        }
        for &e in &self.omega_threshold_sweep {
            if !(e > 0.0 && e < 1.0) {
                problems.push(format!("sweep threshold must be in (0, 1), got {e}"));
            }
        }
        if let Some(l) = self.theta.lambda_reg {
            if !(l >= 0.0) || !l.is_finite() {
                problems.push(format!("theta.lambda_reg must be >= 0, got {l}"));
            }
        }
        if self.theta.enabled && !(self.theta.cg_tol > 0.0) {
            problems.push(format!(
                "theta.cg_tol must be positive, got {}",
                self.theta.cg_tol
            ));
        }
        if self.particles.enabled && self.particles.count == 0 {
            problems.push("particles.count must be >= 1 when enabled".into());
        }
        if self.checkpoint_every_steps != 0
            && self.checkpoint_every_steps % self.diag_every_steps != 0
        {
            problems.push(format!(
                "checkpoint_every_steps ({}) must be a multiple of diag_every_steps ({}) so \
                 resumed runs can reseed time integrals from the records",
                self.checkpoint_every_steps, self.diag_every_steps
            ));
        }
        if self.output_dir.as_os_str().is_empty() {
            problems.push("output_dir must not be empty".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }
}
