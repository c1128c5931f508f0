//! JSON run configurations for `solve` and `evolve`. Unknown keys are errors.

use serde::{Deserialize, Serialize};

use rupture_core::solver::{NewtonOptions, SolverConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Projected gradient flow over the δ schedule.
    #[default]
    Flow,
    /// Damped Newton for critical points (saddle-type rupture solutions).
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub newton: NewtonOptions,
    /// Points whose nearest cell is held at zero (Newton only).
    #[serde(default)]
    pub pin: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default)]
    pub solver: SolverConfig,
    pub t_end: f64,
    pub snapshots: usize,
}

pub fn parse_solve_config(text: &str) -> Result<SolveConfig, CliError> {
    let cfg: SolveConfig = serde_json::from_str(text)?;
    cfg.solver.validate()?;
    if cfg.method == Method::Flow && !cfg.pin.is_empty() {
        return Err(CliError::config("pin requires method \"newton\""));
    }
    Ok(cfg)
}

pub fn parse_evolve_config(text: &str) -> Result<EvolveConfig, CliError> {
    let cfg: EvolveConfig = serde_json::from_str(text)?;
    cfg.solver.validate()?;
    if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
        return Err(CliError::config(format!("t_end = {}", cfg.t_end)));
    }
    Ok(cfg)
}
