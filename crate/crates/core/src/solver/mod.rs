//! Projected explicit gradient flow for `Δu = u⁻ᵖ + f` with a regularized
//! nonlinearity `max(u, δ)⁻ᵖ`, the matching parabolic stepper, and
//! diagnostics on the result.

mod checks;
mod energy_inequality;
mod newton;
mod stepper;

pub use checks::{
    gradient_tail, interior_estimates, morrey_seminorm, nondegeneracy, pde_residual,
    stationarity_defect, GradientTail, InteriorEstimates, Nondegeneracy, Residual,
};
pub use newton::{solve_critical_point, NewtonOptions};
pub use energy_inequality::{energy_inequality_check, EnergyInequality, SpaceCutoff, TimeCutoff};
pub use stepper::{energy, evolve_parabolic, seeded_rupture_problem, solve_elliptic, Snapshot, SolveResult};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldError;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data is negative at cell {0}")]
    NegativeInit(usize),
    #[error("initial data violates the Dirichlet trace at cell {cell} by {gap}")]
    BoundaryMismatch { cell: usize, gap: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("need at least {needed} snapshots, have {available}")]
    TooFewSnapshots { needed: usize, available: usize },
    #[error("empty sample set")]
    EmptySample,
    #[error("non-finite state after step {0}")]
    NonFinite(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Edge cells keep their initial values.
    #[default]
    Dirichlet,
    /// Zero flux: ghost values mirror the edge cell.
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub p: f64,
    /// Strictly decreasing regularization levels; the last is `δ_min`.
    pub delta_schedule: Vec<f64>,
    pub dt_safety: f64,
    pub max_steps: usize,
    pub tol_residual: f64,
    #[serde(default)]
    pub boundary: Boundary,
    /// Histories keep one entry per this many accepted steps.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    10
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: 3.0,
            delta_schedule: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            dt_safety: 0.9,
            max_steps: 200_000,
            tol_residual: 1e-8,
            boundary: Boundary::Dirichlet,
            record_every: default_record_every(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.to_string()));
        if !(self.p > 1.0) || !self.p.is_finite() {
            return bad("p must exceed 1");
        }
        if self.delta_schedule.is_empty() || self.delta_schedule.iter().any(|d| !(*d > 0.0)) {
            return bad("delta_schedule must be nonempty and positive");
        }
        if self.delta_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return bad("delta_schedule must be strictly decreasing");
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad("dt_safety must lie in (0, 1]");
        }
        if !(self.tol_residual > 0.0) {
            return bad("tol_residual must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every must be positive");
        }
        Ok(())
    }

    pub fn delta_min(&self) -> f64 {
        *self.delta_schedule.last().unwrap()
    }
}
