//! Blow-ups `T_{x,r}(u − u(x))(y) = r^{−α}(u(x+ry) − u(x))`, fits by
//! `k`-symmetric functions and quantitative strata.
//!
//! A `k`-symmetric function is `α`-homogeneous about the origin and invariant
//! along a `k`-dimensional subspace `V`, so it has the form
//! `h(y) = |y_⊥|^α g(y_⊥/|y_⊥|)` with `y_⊥` the component orthogonal to `V`.
//! The fit takes `g` as the median of `w(y)/|y_⊥|^α` over angular bins and
//! reports `sup_{B₁}|w − h|`, an upper bound for the distance to the class.

mod blowup;
mod fit;
mod stratum;

pub use blowup::{blow_up, scale_forcing, BlowUp};
pub use fit::{fit_k_symmetric, Frame, FitMethod, SymmetryFit};
pub use stratum::{
    quantitative_stratum, rupture_points, symmetry_defect, StratumPoint, StratumReport,
    SymmetryDefect, SymmetryProbe,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldError;

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("exponent p must exceed 1, got {0}")]
    InvalidExponent(f64),
    #[error("symmetry level {k} outside 0..={dim}")]
    InvalidLevel { k: usize, dim: usize },
    #[error("point has {got} coordinates, grid has {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("blow-up ball lies entirely outside the box")]
    BallOutside,
    #[error("blow-up samples leave the box ({0:.3} of the reference grid clipped)")]
    Clipped(f64),
    #[error("no candidate frames")]
    NoCandidates,
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("scale ladder [{r_min}, {r_max}] is empty")]
    EmptyLadder { r_min: f64, r_max: f64 },
    #[error("sample {index} is {available} from the boundary, needs {needed}")]
    SampleMargin { index: usize, needed: f64, available: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Resolution and frame dictionary settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymmetryOptions {
    /// The reference grid has `2m + 1` points per axis on `[−1, 1]`.
    pub reference_half_width: usize,
    pub random_frames: usize,
    pub seed: u64,
}

impl Default for SymmetryOptions {
    fn default() -> Self {
        Self { reference_half_width: 16, random_frames: 32, seed: 0 }
    }
}
