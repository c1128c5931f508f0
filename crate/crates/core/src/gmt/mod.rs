//! Discrete geometric measure theory: best-fit affine planes and the
//! displacement `D^k_μ`, Reifenberg-type integrals, effective spanning,
//! Vitali coverings, Minkowski content and the pinched covering of
//! low-density rupture points.

mod cover;
mod measure;
mod minkowski;
mod pointcloud;
mod reifenberg;

pub use cover::{
    effective_span, pinched_cover, vitali_cover, CoverBall, CoverBallKind, EffectiveSpan, PinchedCover,
    PinchedCoverOptions, VitaliCover,
};
pub use measure::{
    best_fit_affine, displacement, displacement_bruteforce, moment_spectrum, AffineSubspace, AtomicMeasure,
    MomentSpectrum,
};
pub use minkowski::{minkowski_content, sublevel_neighborhood, MinkowskiReport};
pub use pointcloud::{parse_point_cloud, read_point_cloud, write_point_cloud};
pub use reifenberg::{
    best_approximation, rectifiability_integral, reifenberg_check, BestApproximation, RectifiabilityTrace,
    ReifenbergOptions, ReifenbergReport,
};

use thiserror::Error;

use crate::density::DensityError;
use crate::field::FieldError;

#[derive(Debug, Error)]
pub enum GmtError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("no mass in the ball")]
    ZeroMass,
    #[error("level k = {k} outside 0..={dim}")]
    InvalidLevel { k: usize, dim: usize },
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("scale ladder must be nonempty, positive and strictly monotone")]
    InvalidLadder,
    #[error("point set is empty")]
    EmptyPoints,
    #[error("point cloud line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Density(#[from] DensityError),
}
