use super::{BallRegion, FieldError, ScalarField, VectorField};

/// A weight `w(t)` of the normalized squared distance `t = |y − x|²/r²`,
/// vanishing for `t ≥ support()`.
pub trait RadialWeight {
    fn support(&self) -> f64;
    fn weight(&self, t: f64) -> f64;
}

/// `w ≡ 1` on the unit ball.
#[derive(Clone, Copy, Debug, Default)]
pub struct Indicator;

impl RadialWeight for Indicator {
    fn support(&self) -> f64 {
        1.0
    }
    fn weight(&self, _t: f64) -> f64 {
        1.0
    }
}

/// Closure-backed weight with an explicit support.
pub struct WeightFn<F: Fn(f64) -> f64> {
    pub support: f64,
    pub f: F,
}

impl<F: Fn(f64) -> f64> RadialWeight for WeightFn<F> {
    fn support(&self) -> f64 {
        self.support
    }
    fn weight(&self, t: f64) -> f64 {
        (self.f)(t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BallQuadrature {
    pub value: f64,
    /// Fraction of the weight's support ball that lies inside the grid box.
    pub inside_fraction: f64,
    pub cells: usize,
}

impl BallQuadrature {
    pub fn clipped(&self) -> bool {
        self.inside_fraction < 1.0
    }
}

fn require_cells(u: &ScalarField, needed: usize) -> Result<(), FieldError> {
    if u.grid().shape().iter().any(|&s| s < needed) {
        return Err(FieldError::GridTooSmall { needed });
    }
    Ok(())
}

/// Central differences in the interior, second-order one-sided differences
/// on the box faces.
pub fn gradient(u: &ScalarField) -> Result<VectorField, FieldError> {
    require_cells(u, 3)?;
    let g = u.grid();
    let n = g.dim();
    let h = g.h();
    let v = u.values();
    let mut out = vec![0.0; g.len() * n];
    let mut idx = vec![0; n];
    for c in 0..g.len() {
        g.unravel(c, &mut idx);
        for d in 0..n {
            let s = g.strides()[d];
            let i = idx[d];
            let last = g.shape()[d] - 1;
            out[c * n + d] = if i == 0 {
                (-3.0 * v[c] + 4.0 * v[c + s] - v[c + 2 * s]) / (2.0 * h)
            } else if i == last {
                (3.0 * v[c] - 4.0 * v[c - s] + v[c - 2 * s]) / (2.0 * h)
            } else {
                (v[c + s] - v[c - s]) / (2.0 * h)
            };
        }
    }
    Ok(VectorField::new_unchecked(g.clone(), out))
}

/// Standard `(2n+1)`-point Laplacian on interior cells; boundary cells are `NaN`.
pub fn laplacian(u: &ScalarField) -> Result<ScalarField, FieldError> {
    require_cells(u, 3)?;
    let g = u.grid();
    let n = g.dim();
    let inv_h2 = 1.0 / (g.h() * g.h());
    let v = u.values();
    let mut out = vec![f64::NAN; g.len()];
    let mut idx = vec![0; n];
    for (c, o) in out.iter_mut().enumerate() {
        g.unravel(c, &mut idx);
        if g.is_boundary(&idx) {
            continue;
        }
        let mut acc = -2.0 * n as f64 * v[c];
        for &s in g.strides() {
            acc += v[c + s] + v[c - s];
        }
        *o = acc * inv_h2;
    }
    Ok(ScalarField::new_unchecked(g.clone(), out, format!("lap({})", u.name)))
}

/// Midpoint-rule `Σ g(y)·w(|y−x|²/r²)·hⁿ` over cells whose centers lie in the
/// support of the weight, where `x, r` are the ball's center and radius.
pub fn ball_integral<W: RadialWeight + ?Sized>(
    g: &ScalarField,
    ball: &BallRegion,
    weight: &W,
) -> Result<BallQuadrature, FieldError> {
    let grid = g.grid();
    let r2 = ball.radius * ball.radius;
    let reach = ball.radius * weight.support().sqrt();
    let vals = g.values();
    let mut acc = 0.0;
    let mut cells = 0;
    let inside = grid.visit_ball(&ball.center, reach, |c, _, d2| {
        acc += vals[c] * weight.weight(d2 / r2);
        cells += 1;
    });
    if cells == 0 {
        return Err(FieldError::EmptyIntersection);
    }
    Ok(BallQuadrature { value: acc * grid.cell_volume(), inside_fraction: inside, cells })
}

/// `hⁿ · #{cells in `within` : u < threshold}`.
pub fn sublevel_measure(u: &ScalarField, threshold: f64, within: &BallRegion) -> f64 {
    let vals = u.values();
    let mut count = 0usize;
    u.grid().visit_ball(&within.center, within.radius, |c, _, _| {
        if vals[c] < threshold {
            count += 1;
        }
    });
    count as f64 * u.grid().cell_volume()
}
