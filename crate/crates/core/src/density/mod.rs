//! Mollified energies, height, Almgren frequency and monotone densities.
//!
//! For `t = |y−x|²/r²` and the cutoff `φ`:
//!
//! ```text
//! D   = r^{2−n} ∫ (|∇u|² + u^{1−p}) φ
//! D_f = r^{2−n} ∫ (|∇u|² + u^{1−p} + fu) φ
//! F   = r^{2−n} ∫ (|∇u|²/2 − u^{1−p}/(p−1)) φ
//! H   = −r^{−n} ∫ u² φ′
//! I_f = D_f / H
//! θ   = r^{−2α} (F − αH)
//! θ_f = θ − r^{2−2α−n}/(n+2α−2) ∫ ((y−x)·∇u − αu) f φ
//!         − 2/(n+2α−2)² ∫₀^r ρ^{−2α−n−1} ∫ |f|²|y−x|⁴ φ′_{x,ρ} dρ
//! ```

mod classify;
mod cutoff;
mod functionals;
mod pinching;
mod profile;

pub use classify::{RuptureClass, RuptureReport};
pub use cutoff::Cutoff;
pub use functionals::{evaluate_functionals, homogeneity_defect, DensityField, FunctionalValues};
pub(crate) use functionals::{powf_1mp, powf_mp};
pub(crate) use profile::nonuniform_derivative;
pub use pinching::DyadicDrop;
pub use profile::{geometric_ladder, DensityProfile, HdIdentity, MonotoneIdentity};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, ScalarField};

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("exponent p = {0} must exceed 1")]
    InvalidExponent(f64),
    #[error("radius {0} must be positive and finite")]
    InvalidRadius(f64),
    #[error("point has dimension {got}, field has {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("forcing and solution live on different grids")]
    GridMismatch,
    #[error("n + 2α − 2 ≤ 0 in dimension {0}; the forcing corrections are undefined")]
    DegenerateDimension(usize),
    #[error("the cutoff support misses the grid")]
    EmptyIntersection,
    #[error("invalid radius ladder: {0}")]
    InvalidLadder(String),
    #[error("ladder too short: need {needed} radii, have {available}")]
    LadderTooShort { needed: usize, available: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Floor applied to `u` inside `u^{1−p}`: `max(delta_min, kappa·h^α)`.
///
/// `kappa = 0.75` reproduces the cell average of `u^{1−p}` for the 2-D
/// `p = 3` homogeneous solution on the cell containing its zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityOptions {
    pub delta_min: f64,
    pub kappa: f64,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self { delta_min: 1e-6, kappa: 0.75 }
    }
}

impl DensityOptions {
    pub fn u_floor(&self, h: f64, alpha: f64) -> f64 {
        self.delta_min.max(self.kappa * h.powf(alpha))
    }
}

/// Free-function form of [`DensityField::profile`].
pub fn density_profile(
    u: &ScalarField,
    f: Option<&ScalarField>,
    x: &[f64],
    radii: &[f64],
    p: f64,
) -> Result<DensityProfile, DensityError> {
    DensityField::new(u, f, p, &DensityOptions::default())?.profile(x, radii)
}

/// Free-function form of [`DensityField::hd_identity`].
pub fn hd_identity_check(
    u: &ScalarField,
    f: Option<&ScalarField>,
    x: &[f64],
    radii: &[f64],
    p: f64,
) -> Result<HdIdentity, DensityError> {
    DensityField::new(u, f, p, &DensityOptions::default())?.hd_identity(x, radii)
}

/// Free-function form of [`DensityField::pinch_w`].
pub fn pinch_w(
    u: &ScalarField,
    f: Option<&ScalarField>,
    x: &[f64],
    s: f64,
    p: f64,
) -> Result<f64, DensityError> {
    DensityField::new(u, f, p, &DensityOptions::default())?.pinch_w(x, s)
}

/// Free-function form of [`DensityField::classify`].
pub fn rupture_classifier(
    u: &ScalarField,
    f: Option<&ScalarField>,
    x: &[f64],
    r: f64,
    p: f64,
    c_star: f64,
) -> Result<RuptureReport, DensityError> {
    DensityField::new(u, f, p, &DensityOptions::default())?.classify(x, r, c_star)
}
