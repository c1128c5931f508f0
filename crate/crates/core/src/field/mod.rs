//! Uniform-grid scalar fields, finite-difference operators, ball quadrature,
//! exact Euclidean distance transforms and the `RFLD` file format.

mod edt;
mod grid;
mod ops;
pub mod rfld;

pub use edt::{distance_transform, distance_transform_bruteforce};
pub use grid::{Grid, DEFAULT_CELL_BUDGET, MAX_DIM};
pub use ops::{
    ball_integral, gradient, laplacian, sublevel_measure, BallQuadrature, Indicator, RadialWeight,
    WeightFn,
};
pub use rfld::{decode_field, encode_field, load_field, save_field, RfldError};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("value buffer has {actual} entries, grid needs {expected}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("grid needs at least {needed} cells per axis")]
    GridTooSmall { needed: usize },
    #[error("ball does not intersect the grid")]
    EmptyIntersection,
    #[error("mask has no set cells")]
    EmptyMask,
    #[error("fields live on different grids")]
    GridMismatch,
}

/// A ball `B_radius(center)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallRegion {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallRegion {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0, "ball radius must be positive");
        Self { center, radius }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        dist2(&self.center, y) < self.radius * self.radius
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Sampled real function on a [`Grid`], stored row-major.
///
/// Fields produced by derivative operators carry `NaN` on cells where the
/// stencil is undefined; all other constructors require finite values.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
    pub name: String,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>, name: impl Into<String>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::SizeMismatch { expected: grid.len(), actual: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite(i));
        }
        Ok(Self { grid, values, name: name.into() })
    }

    pub(crate) fn new_unchecked(grid: Grid, values: Vec<f64>, name: impl Into<String>) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        Self { grid, values, name: name.into() }
    }

    pub fn constant(grid: Grid, value: f64, name: impl Into<String>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![value; n], name: name.into() }
    }

    /// Samples `f` at every cell center.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, name: impl Into<String>, f: F) -> Self {
        let mut idx = vec![0; grid.dim()];
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.unravel(i, &mut idx);
                grid.center(&idx, &mut x);
                f(&x)
            })
            .collect();
        Self { grid, values, name: name.into() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat_index(idx)]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn map(&self, name: impl Into<String>, f: impl Fn(f64) -> f64) -> Self {
        Self::new_unchecked(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect(), name)
    }

    pub fn same_grid(&self, other: &ScalarField) -> bool {
        self.grid == other.grid
    }

    /// Multilinear interpolation between cell centers. Points inside the box
    /// but beyond the outermost centers are clamped onto them; points outside
    /// the box give `None`.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let g = &self.grid;
        if !g.contains(x) {
            return None;
        }
        let n = g.dim();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for d in 0..n {
            let s = g.shape()[d];
            let t = ((x[d] - g.origin()[d]) / g.h()).clamp(0.0, (s - 1) as f64);
            let i = (t.floor() as usize).min(s.saturating_sub(2));
            base[d] = i;
            frac[d] = if s == 1 { 0.0 } else { t - i as f64 };
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0;
            for d in 0..n {
                let bit = (corner >> d) & 1;
                let s = g.shape()[d];
                let i = if s == 1 { 0 } else { base[d] + bit };
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                flat += i * g.strides()[d];
            }
            if w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        Some(acc)
    }
}

/// `n` components per cell, interleaved (`values[cell * n + d]`).
#[derive(Clone, Debug)]
pub struct VectorField {
    grid: Grid,
    values: Vec<f64>,
}

impl VectorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, cell: usize) -> &[f64] {
        let n = self.grid.dim();
        &self.values[cell * n..(cell + 1) * n]
    }

    pub fn component(&self, cell: usize, d: usize) -> f64 {
        self.values[cell * self.grid.dim() + d]
    }

    pub fn norm_sq(&self, cell: usize) -> f64 {
        self.at(cell).iter().map(|v| v * v).sum()
    }

    /// Pointwise Euclidean norm as a scalar field.
    pub fn magnitude(&self) -> ScalarField {
        let vals = (0..self.grid.len()).map(|c| self.norm_sq(c).sqrt()).collect();
        ScalarField::new_unchecked(self.grid.clone(), vals, "|grad|")
    }
}

/// Boolean cell mask on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    grid: Grid,
    values: Vec<bool>,
}

impl Mask {
    pub fn new(grid: Grid, values: Vec<bool>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::SizeMismatch { expected: grid.len(), actual: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> bool>(grid: Grid, f: F) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.center_of(i))).collect();
        Self { grid, values }
    }

    /// Cells where `u < threshold`.
    pub fn below(u: &ScalarField, threshold: f64) -> Self {
        Self { grid: u.grid().clone(), values: u.values().iter().map(|&v| v < threshold).collect() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&b| b).count()
    }

    pub fn set_cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn and_ball(&self, ball: &BallRegion) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &b)| b && ball.contains(&self.grid.center_of(i)))
            .collect();
        Self { grid: self.grid.clone(), values }
    }
}

impl VectorField {
    pub(crate) fn new_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        Self { grid, values }
    }
}
