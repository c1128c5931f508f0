use super::FieldError;

/// Largest number of cells a single grid may hold (about 268 MB of `f64`).
pub const DEFAULT_CELL_BUDGET: usize = 1 << 25;

/// Highest supported spatial dimension.
pub const MAX_DIM: usize = 4;

/// Uniform, isotropic, cell-centered grid over a box in ℝⁿ.
///
/// `origin` is the coordinate of the center of cell `(0, …, 0)`; the box
/// extends half a cell beyond the first and last centers on every axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, origin: Vec<f64>, spacing: Vec<f64>) -> Result<Self, FieldError> {
        Self::with_budget(shape, origin, spacing, DEFAULT_CELL_BUDGET)
    }

    pub fn with_budget(
        shape: Vec<usize>,
        origin: Vec<f64>,
        spacing: Vec<f64>,
        budget: usize,
    ) -> Result<Self, FieldError> {
        let n = shape.len();
        if n == 0 || n > MAX_DIM {
            return Err(FieldError::InvalidGrid(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        if origin.len() != n || spacing.len() != n {
            return Err(FieldError::InvalidGrid("shape/origin/spacing lengths differ".into()));
        }
        if shape.iter().any(|&s| s == 0) {
            return Err(FieldError::InvalidGrid("zero-length axis".into()));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(FieldError::InvalidGrid("non-finite origin".into()));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(FieldError::InvalidGrid("spacing must be positive and finite".into()));
        }
        let h0 = spacing[0];
        if spacing.iter().any(|&h| ((h - h0) / h0).abs() > 1e-12) {
            return Err(FieldError::InvalidGrid("spacing is not isotropic".into()));
        }
        let mut total: usize = 1;
        for &s in &shape {
            total = total
                .checked_mul(s)
                .filter(|&t| t <= budget)
                .ok_or_else(|| FieldError::InvalidGrid(format!("cell count exceeds budget {budget}")))?;
        }
        let mut strides = vec![1usize; n];
        for d in (0..n.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * shape[d + 1];
        }
        Ok(Self { shape, origin, spacing, strides })
    }

    /// Grid with `cells` cells per axis and spacing `h`, symmetric about the
    /// coordinate origin. An odd cell count puts a cell center exactly at 0;
    /// an even count puts a cell corner there.
    pub fn symmetric(dim: usize, h: f64, cells: usize) -> Result<Self, FieldError> {
        let o = -((cells as f64) - 1.0) * h / 2.0;
        Self::new(vec![cells; dim], vec![o; dim], vec![h; dim])
    }

    /// Grid covering the box `[lo, hi]ⁿ` with `cells` cells per axis.
    pub fn cube(dim: usize, lo: f64, hi: f64, cells: usize) -> Result<Self, FieldError> {
        if !(hi > lo) || cells == 0 {
            return Err(FieldError::InvalidGrid("empty box".into()));
        }
        let h = (hi - lo) / cells as f64;
        Self::new(vec![cells; dim], vec![lo + 0.5 * h; dim], vec![h; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// The common spacing `h`.
    pub fn h(&self) -> f64 {
        self.spacing[0]
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim() as i32)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for d in 0..self.dim() {
            out[d] = flat / self.strides[d];
            flat %= self.strides[d];
        }
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.origin[axis] + i as f64 * self.spacing[axis]
    }

    pub fn center(&self, idx: &[usize], out: &mut [f64]) {
        for d in 0..self.dim() {
            out[d] = self.coord(d, idx[d]);
        }
    }

    pub fn center_of(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        let mut x = vec![0.0; self.dim()];
        self.center(&idx, &mut x);
        x
    }

    /// Lower corner of the box.
    pub fn lower(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.spacing).map(|(o, h)| o - 0.5 * h).collect()
    }

    /// Upper corner of the box.
    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|d| self.origin[d] + (self.shape[d] as f64 - 0.5) * self.spacing[d])
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (lo, hi) = (self.lower(), self.upper());
        x.iter().enumerate().all(|(d, &v)| v >= lo[d] && v <= hi[d])
    }

    /// Distance from `x` to the nearest box face (negative outside).
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        let (lo, hi) = (self.lower(), self.upper());
        (0..self.dim())
            .map(|d| (x[d] - lo[d]).min(hi[d] - x[d]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.shape).any(|(&i, &s)| i == 0 || i + 1 == s)
    }

    pub fn is_boundary_flat(&self, flat: usize) -> bool {
        let mut rem = flat;
        for d in 0..self.dim() {
            let i = rem / self.strides[d];
            rem %= self.strides[d];
            if i == 0 || i + 1 == self.shape[d] {
                return true;
            }
        }
        false
    }

    /// Nearest cell index (clamped into the grid) for a point.
    pub fn nearest_index(&self, x: &[f64]) -> Vec<usize> {
        (0..self.dim())
            .map(|d| {
                let t = ((x[d] - self.origin[d]) / self.spacing[d]).round();
                t.clamp(0.0, (self.shape[d] - 1) as f64) as usize
            })
            .collect()
    }

    /// Visits every cell whose center lies strictly inside the ball
    /// `|y − center| < radius`, calling `visit(flat, offset, dist²)` with
    /// `offset = y − center`. Cells are visited in row-major order.
    ///
    /// Returns the fraction of lattice points of the (unbounded) cell lattice
    /// inside the ball that belong to the grid, i.e. `1.0` for balls fully
    /// inside the box.
    pub fn visit_ball<F>(&self, center: &[f64], radius: f64, mut visit: F) -> f64
    where
        F: FnMut(usize, &[f64], f64),
    {
        let n = self.dim();
        let h = self.h();
        let r2 = radius * radius;
        let mut lo = vec![0i64; n];
        let mut hi = vec![0i64; n];
        let mut clipped = false;
        for d in 0..n {
            let a = ((center[d] - radius - self.origin[d]) / h).floor() as i64;
            let b = ((center[d] + radius - self.origin[d]) / h).ceil() as i64;
            lo[d] = a;
            hi[d] = b;
            if a < 0 || b > self.shape[d] as i64 - 1 {
                clipped = true;
            }
        }
        let mut inside = 0usize;
        let mut total = 0usize;
        let mut idx = vec![0i64; n];
        let mut off = vec![0.0; n];
        // odometer over the (possibly unclipped) index box
        let mut clo = lo.clone();
        let mut chi = hi.clone();
        if !clipped {
            for d in 0..n {
                clo[d] = lo[d].max(0);
                chi[d] = hi[d].min(self.shape[d] as i64 - 1);
            }
        }
        if (0..n).any(|d| clo[d] > chi[d]) {
            return 0.0;
        }
        idx.copy_from_slice(&clo);
        'outer: loop {
            let mut partial = 0.0;
            let mut in_grid = true;
            for d in 0..n - 1 {
                let y = self.origin[d] + idx[d] as f64 * h;
                off[d] = y - center[d];
                partial += off[d] * off[d];
                if idx[d] < 0 || idx[d] >= self.shape[d] as i64 {
                    in_grid = false;
                }
            }
            if partial < r2 {
                let last = n - 1;
                let mut base = 0usize;
                if in_grid {
                    for d in 0..last {
                        base += idx[d] as usize * self.strides[d];
                    }
                }
                for i in clo[last]..=chi[last] {
                    let y = self.origin[last] + i as f64 * h;
                    let o = y - center[last];
                    let d2 = partial + o * o;
                    if d2 < r2 {
                        total += 1;
                        if in_grid && i >= 0 && i < self.shape[last] as i64 {
                            inside += 1;
                            off[last] = o;
                            visit(base + i as usize, &off, d2);
                        }
                    }
                }
            }
            // advance all but the last axis
            if n == 1 {
                break;
            }
            let mut d = n - 2;
            loop {
                idx[d] += 1;
                if idx[d] <= chi[d] {
                    break;
                }
                idx[d] = clo[d];
                if d == 0 {
                    break 'outer;
                }
                d -= 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            inside as f64 / total as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_anisotropic_spacing() {
        let g = Grid::new(vec![4, 4], vec![0.0, 0.0], vec![0.1, 0.2]);
        assert!(matches!(g, Err(FieldError::InvalidGrid(_))));
    }

    #[test]
    fn rejects_budget_overflow() {
        let g = Grid::with_budget(vec![1 << 20, 1 << 20], vec![0.0; 2], vec![1.0; 2], 1 << 25);
        assert!(g.is_err());
    }

    #[test]
    fn symmetric_odd_grid_has_center_cell_at_origin() {
        let g = Grid::symmetric(2, 0.25, 9).unwrap();
        let mid = g.flat_index(&[4, 4]);
        assert_eq!(g.center_of(mid), vec![0.0, 0.0]);
        assert_eq!(g.lower(), vec![-1.125, -1.125]);
    }

    #[test]
    fn ball_visit_counts_lattice_points() {
        let g = Grid::symmetric(2, 1.0, 21).unwrap();
        let mut count = 0;
        let frac = g.visit_ball(&[0.0, 0.0], 2.5, |_, _, _| count += 1);
        // lattice points with i²+j² < 6.25
        assert_eq!(count, 21);
        assert_eq!(frac, 1.0);
        let mut clipped = 0;
        let frac = g.visit_ball(&[10.0, 0.0], 2.5, |_, _, _| clipped += 1);
        assert_eq!(clipped, 13);
        assert!((frac - 13.0 / 21.0).abs() < 1e-15);
    }
}
