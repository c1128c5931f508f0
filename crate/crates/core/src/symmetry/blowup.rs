use super::SymmetryError;
use crate::field::{Grid, ScalarField};

/// Samples of `T_{x,r}(u − u(x))` on the cube `[−1, 1]ⁿ` with `2m + 1` points
/// per axis. Samples whose preimage leaves the box are `NaN`.
#[derive(Debug, Clone)]
pub struct BlowUp {
    pub x: Vec<f64>,
    pub r: f64,
    pub alpha: f64,
    /// `u(x)`, subtracted before rescaling.
    pub base_value: f64,
    /// Fraction of reference points in `B₁` that were clipped.
    pub clipped_fraction: f64,
    reference: Grid,
    values: Vec<f64>,
}

impl BlowUp {
    pub fn dim(&self) -> usize {
        self.reference.dim()
    }

    pub fn half_width(&self) -> usize {
        (self.reference.shape()[0] - 1) / 2
    }

    pub fn reference_grid(&self) -> &Grid {
        &self.reference
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(y, w(y))` for reference points with `|y| ≤ 1` and a finite sample.
    pub fn unit_ball_samples(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        (0..self.values.len()).filter_map(move |c| {
            let y = self.reference.center_of(c);
            let w = self.values[c];
            (w.is_finite() && y.iter().map(|t| t * t).sum::<f64>() <= 1.0 + 1e-12).then_some((y, w))
        })
    }

    /// The samples as a field on the reference cube; fails if any were clipped.
    pub fn to_field(&self) -> Result<ScalarField, SymmetryError> {
        let clipped = self.values.iter().filter(|v| !v.is_finite()).count();
        if clipped > 0 {
            return Err(SymmetryError::Clipped(clipped as f64 / self.values.len() as f64));
        }
        Ok(ScalarField::new(self.reference.clone(), self.values.clone(), "blow_up")?)
    }
}

fn reference_grid(dim: usize, m: usize) -> Result<Grid, SymmetryError> {
    if m == 0 {
        return Err(SymmetryError::InvalidFrame("reference half width must be positive".into()));
    }
    Ok(Grid::symmetric(dim, 1.0 / m as f64, 2 * m + 1)?)
}

fn check_point(u: &ScalarField, x: &[f64], r: f64) -> Result<(), SymmetryError> {
    if x.len() != u.grid().dim() {
        return Err(SymmetryError::PointDimension { expected: u.grid().dim(), got: x.len() });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(SymmetryError::InvalidScale(r));
    }
    Ok(())
}

/// `T_{x,r}(u − u(x))` on the `(2m+1)ⁿ` reference grid, by multilinear
/// interpolation of `u`.
pub fn blow_up(u: &ScalarField, x: &[f64], r: f64, alpha: f64, m: usize) -> Result<BlowUp, SymmetryError> {
    check_point(u, x, r)?;
    let reference = reference_grid(x.len(), m)?;
    let base_value = u.interpolate(x).ok_or(SymmetryError::BallOutside)?;
    let scale = r.powf(-alpha);
    let mut z = vec![0.0; x.len()];
    let (mut in_ball, mut clipped) = (0usize, 0usize);
    let values: Vec<f64> = (0..reference.len())
        .map(|c| {
            let y = reference.center_of(c);
            for d in 0..x.len() {
                z[d] = x[d] + r * y[d];
            }
            let v = u.interpolate(&z);
            if y.iter().map(|t| t * t).sum::<f64>() <= 1.0 + 1e-12 {
                in_ball += 1;
                clipped += v.is_none() as usize;
            }
            v.map_or(f64::NAN, |v| scale * (v - base_value))
        })
        .collect();
    if clipped == in_ball {
        return Err(SymmetryError::BallOutside);
    }
    Ok(BlowUp {
        x: x.to_vec(),
        r,
        alpha,
        base_value,
        clipped_fraction: clipped as f64 / in_ball as f64,
        reference,
        values,
    })
}

/// `T*_{x,r} f(y) = r^{2−α} f(x + ry)` on the same reference grid as
/// [`blow_up`], so that `(T_{x,r}u, T*_{x,r}f)` solves the rescaled equation.
pub fn scale_forcing(f: &ScalarField, x: &[f64], r: f64, alpha: f64, m: usize) -> Result<ScalarField, SymmetryError> {
    check_point(f, x, r)?;
    let reference = reference_grid(x.len(), m)?;
    let scale = r.powf(2.0 - alpha);
    let mut z = vec![0.0; x.len()];
    let mut values = Vec::with_capacity(reference.len());
    for c in 0..reference.len() {
        let y = reference.center_of(c);
        for d in 0..x.len() {
            z[d] = x[d] + r * y[d];
        }
        let v = f.interpolate(&z).ok_or(SymmetryError::Clipped(1.0 / reference.len() as f64))?;
        values.push(scale * v);
    }
    Ok(ScalarField::new(reference, values, "forcing_blow_up")?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_blows_up_to_zero() {
        let g = Grid::symmetric(2, 0.05, 41).unwrap();
        let u = ScalarField::constant(g, 3.0, "c");
        let w = blow_up(&u, &[0.1, -0.2], 0.3, 0.5, 8).unwrap();
        assert_eq!(w.clipped_fraction, 0.0);
        assert!(w.values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn clipping_is_recorded() {
        let g = Grid::symmetric(2, 0.05, 41).unwrap();
        let u = ScalarField::constant(g, 1.0, "c");
        let w = blow_up(&u, &[0.9, 0.0], 0.5, 0.5, 8).unwrap();
        assert!(w.clipped_fraction > 0.2 && w.clipped_fraction < 0.6);
        assert!(w.to_field().is_err());
    }
}
