use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::GmtError;
use std::collections::HashMap;

use crate::field::{dist2, BallRegion, Mask};

/// `μ = Σ wᵢ δ_{yᵢ}` with positive weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomicMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl AtomicMeasure {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, GmtError> {
        if points.len() != weights.len() {
            return Err(GmtError::InvalidMeasure(format!("{} points, {} weights", points.len(), weights.len())));
        }
        let dim = points.first().map_or(0, Vec::len);
        for (i, (y, &w)) in points.iter().zip(&weights).enumerate() {
            if y.len() != dim || dim == 0 {
                return Err(GmtError::InvalidMeasure(format!("atom {i} has {} coordinates", y.len())));
            }
            if !(w > 0.0 && w.is_finite()) || y.iter().any(|c| !c.is_finite()) {
                return Err(GmtError::InvalidMeasure(format!("atom {i} has weight {w} or a non-finite coordinate")));
            }
        }
        Ok(Self { dim, points, weights })
    }

    /// Unit weights.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self, GmtError> {
        let n = points.len();
        Self::new(points, vec![1.0; n])
    }

    /// Centers of set cells, each with weight `hᵏ` (a discretized `Hᵏ⌞S`).
    pub fn from_mask(mask: &Mask, k: usize) -> Result<Self, GmtError> {
        let g = mask.grid();
        let w = g.h().powi(k as i32);
        let points: Vec<Vec<f64>> = mask.set_cells().map(|c| g.center_of(c)).collect();
        let n = points.len();
        Self::new(points, vec![w; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Atoms in the open ball, as `(point, weight)`.
    pub fn in_ball<'a>(&'a self, ball: &'a BallRegion) -> impl Iterator<Item = (&'a [f64], f64)> + 'a {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(move |(y, _)| ball.contains(y))
            .map(|(y, &w)| (y.as_slice(), w))
    }

    pub fn mass_in(&self, ball: &BallRegion) -> f64 {
        self.in_ball(ball).map(|(_, w)| w).sum()
    }
}

/// `base + span(frame)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineSubspace {
    pub base: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
}

impl AffineSubspace {
    pub fn new(base: Vec<f64>, frame: Vec<Vec<f64>>) -> Result<Self, GmtError> {
        for (i, v) in frame.iter().enumerate() {
            if v.len() != base.len() {
                return Err(GmtError::InvalidMeasure(format!("frame vector {i} has wrong length")));
            }
            for (j, w) in frame.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                let d: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                if (d - target).abs() > 1e-12 {
                    return Err(GmtError::InvalidMeasure(format!("frame vectors {j}, {i} not orthonormal")));
                }
            }
        }
        Ok(Self { base, frame })
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    pub fn dist_sq(&self, y: &[f64]) -> f64 {
        let mut d: Vec<f64> = y.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        for v in &self.frame {
            let c: f64 = d.iter().zip(v).map(|(a, b)| a * b).sum();
            d.iter_mut().zip(v).for_each(|(di, vi)| *di -= c * vi);
        }
        d.iter().map(|t| t * t).sum()
    }

    pub fn dist(&self, y: &[f64]) -> f64 {
        self.dist_sq(y).sqrt()
    }
}

/// Center of mass and spectrum of the mass-normalized second moment.
#[derive(Debug, Clone, Serialize)]
pub struct MomentSpectrum {
    pub x_cm: Vec<f64>,
    /// `λ₁ ≥ … ≥ λₙ ≥ 0`.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// Mass of the atoms in the ball.
    pub mass: f64,
}

pub fn moment_spectrum(mu: &AtomicMeasure, ball: &BallRegion) -> Result<MomentSpectrum, GmtError> {
    let atoms: Vec<(&[f64], f64)> = mu.in_ball(ball).collect();
    spectrum_of(&atoms, mu.dim())
}

pub(crate) fn spectrum_of(atoms: &[(&[f64], f64)], n: usize) -> Result<MomentSpectrum, GmtError> {
    let mass: f64 = atoms.iter().map(|a| a.1).sum();
    if !(mass > 0.0) {
        return Err(GmtError::ZeroMass);
    }
    let mut x_cm = vec![0.0; n];
    for &(y, w) in atoms {
        x_cm.iter_mut().zip(y).for_each(|(c, yi)| *c += w * yi / mass);
    }
    let mut m = DMatrix::<f64>::zeros(n, n);
    for &(y, w) in atoms {
        for i in 0..n {
            for j in 0..=i {
                m[(i, j)] += w * (y[i] - x_cm[i]) * (y[j] - x_cm[j]) / mass;
            }
        }
    }
    m.fill_upper_triangle_with_lower_triangle();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            if v.iter().find(|c| c.abs() > 1e-12).is_some_and(|&c| c < 0.0) {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            v
        })
        .collect();
    Ok(MomentSpectrum { x_cm, eigenvalues, eigenvectors, mass })
}

/// Displacement of the given atoms, all assumed to lie in the query ball.
pub(crate) fn displacement_of(atoms: &[(&[f64], f64)], n: usize, r: f64, k: usize) -> f64 {
    match spectrum_of(atoms, n) {
        Ok(spec) => r.powi(-(k as i32) - 2) * spec.mass * spec.eigenvalues[k..].iter().sum::<f64>(),
        Err(_) => 0.0,
    }
}

/// Uniform buckets of side `cell` for ball queries of radius at most `cell`.
pub(crate) struct BallIndex<'a> {
    mu: &'a AtomicMeasure,
    cell: f64,
    buckets: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> BallIndex<'a> {
    pub(crate) fn new(mu: &'a AtomicMeasure, cell: f64) -> Self {
        let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, y) in mu.points.iter().enumerate() {
            buckets.entry(Self::key(y, cell)).or_default().push(i);
        }
        Self { mu, cell, buckets }
    }

    fn key(y: &[f64], cell: f64) -> Vec<i64> {
        y.iter().map(|c| (c / cell).floor() as i64).collect()
    }

    /// Atoms in the open ball `B_r(x)`, `r ≤ cell`.
    pub(crate) fn query(&self, x: &[f64], r: f64) -> Vec<(&'a [f64], f64)> {
        debug_assert!(r <= self.cell);
        let n = x.len();
        let base = Self::key(x, self.cell);
        let mut out = vec![];
        let mut offset = vec![-1i64; n];
        let r2 = r * r;
        'outer: loop {
            let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if let Some(ids) = self.buckets.get(&key) {
                for &i in ids {
                    let y = &self.mu.points[i];
                    if dist2(y, x) < r2 {
                        out.push((y.as_slice(), self.mu.weights[i]));
                    }
                }
            }
            for o in offset.iter_mut() {
                *o += 1;
                if *o <= 1 {
                    continue 'outer;
                }
                *o = -1;
            }
            break;
        }
        out
    }
}

/// `L_k = x_cm + span{v₁…v_k}` and `m = Σ_{i>k} λᵢ`.
pub fn best_fit_affine(mu: &AtomicMeasure, ball: &BallRegion, k: usize) -> Result<(AffineSubspace, f64), GmtError> {
    if k > mu.dim() {
        return Err(GmtError::InvalidLevel { k, dim: mu.dim() });
    }
    let spec = moment_spectrum(mu, ball)?;
    let m_value = spec.eigenvalues[k..].iter().sum();
    let plane = AffineSubspace { base: spec.x_cm, frame: spec.eigenvectors[..k].to_vec() };
    Ok((plane, m_value))
}

/// `D^k_μ(x, r) = min_L r^{−k−2}∫_{B_r(x)} dist²(y, L) dμ`, in closed form.
pub fn displacement(mu: &AtomicMeasure, x: &[f64], r: f64, k: usize) -> Result<f64, GmtError> {
    check_query(mu, x, r, k)?;
    let ball = BallRegion::new(x.to_vec(), r);
    match best_fit_affine(mu, &ball, k) {
        Ok((_, m)) => Ok(r.powi(-(k as i32) - 2) * mu.mass_in(&ball) * m),
        Err(GmtError::ZeroMass) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn check_query(mu: &AtomicMeasure, x: &[f64], r: f64, k: usize) -> Result<(), GmtError> {
    if x.len() != mu.dim() {
        return Err(GmtError::PointDimension { expected: mu.dim(), got: x.len() });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(GmtError::InvalidRadius(r));
    }
    if k > mu.dim() {
        return Err(GmtError::InvalidLevel { k, dim: mu.dim() });
    }
    Ok(())
}

fn orthonormalize(frame: &mut [Vec<f64>]) {
    for i in 0..frame.len() {
        for j in 0..i {
            let c: f64 = frame[i].iter().zip(&frame[j]).map(|(a, b)| a * b).sum();
            let fj = frame[j].clone();
            frame[i].iter_mut().zip(&fj).for_each(|(a, b)| *a -= c * b);
        }
        let norm = frame[i].iter().map(|t| t * t).sum::<f64>().sqrt();
        frame[i].iter_mut().for_each(|t| *t /= norm);
    }
}

/// Objective `Σ w |P_⊥(y − b)|²`, its gradient in `b` and the component of
/// its `vⱼ`-gradient orthogonal to the span; motions within the span leave the
/// plane unchanged.
fn objective(atoms: &[(&[f64], f64)], base: &[f64], frame: &[Vec<f64>]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
    let n = base.len();
    let mut value = 0.0;
    let mut gb = vec![0.0; n];
    let mut gv = vec![vec![0.0; n]; frame.len()];
    for &(y, w) in atoms {
        let d: Vec<f64> = y.iter().zip(base).map(|(a, b)| a - b).collect();
        let coefs: Vec<f64> = frame.iter().map(|v| v.iter().zip(&d).map(|(a, b)| a * b).sum()).collect();
        let mut perp = d.clone();
        for (v, c) in frame.iter().zip(&coefs) {
            perp.iter_mut().zip(v).for_each(|(p, vi)| *p -= c * vi);
        }
        value += w * perp.iter().map(|t| t * t).sum::<f64>();
        gb.iter_mut().zip(&perp).for_each(|(g, p)| *g -= 2.0 * w * p);
        for (g, c) in gv.iter_mut().zip(&coefs) {
            g.iter_mut().zip(&perp).for_each(|(gi, pi)| *gi -= 2.0 * w * c * pi);
        }
    }
    (value, gb, gv)
}

/// Multi-start projected gradient descent over `(base, frame)` with 64
/// seeded starts; the independent check on [`displacement`].
pub fn displacement_bruteforce(mu: &AtomicMeasure, x: &[f64], r: f64, k: usize, seed: u64) -> Result<f64, GmtError> {
    check_query(mu, x, r, k)?;
    let ball = BallRegion::new(x.to_vec(), r);
    let atoms: Vec<(&[f64], f64)> = mu.in_ball(&ball).collect();
    let n = mu.dim();
    if atoms.is_empty() || k == n {
        return Ok(0.0);
    }
    let mass: f64 = atoms.iter().map(|a| a.1).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..64 {
        let pick = atoms[rng.gen_range(0..atoms.len())].0;
        let mut base: Vec<f64> = pick.iter().map(|c| c + rng.gen_range(-0.5..0.5) * r).collect();
        let mut frame: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        orthonormalize(&mut frame);
        let (mut value, mut gb, mut gv) = objective(&atoms, &base, &frame);
        let mut step = 0.25 / mass;
        for _ in 0..20_000 {
            let gnorm2: f64 = gb.iter().chain(gv.iter().flatten()).map(|g| g * g).sum();
            if gnorm2 == 0.0 {
                break;
            }
            let mut accepted = false;
            while step > 1e-18 {
                let tb: Vec<f64> = base.iter().zip(&gb).map(|(b, g)| b - step * g).collect();
                let mut tf: Vec<Vec<f64>> =
                    frame.iter().zip(&gv).map(|(v, g)| v.iter().zip(g).map(|(a, b)| a - step * b).collect()).collect();
                orthonormalize(&mut tf);
                let (tv, tgb, tgv) = objective(&atoms, &tb, &tf);
                if tv <= value - 1e-4 * step * gnorm2 {
                    let gain = value - tv;
                    base = tb;
                    frame = tf;
                    (value, gb, gv) = (tv, tgb, tgv);
                    step *= 2.0;
                    accepted = gain > 1e-17 * value.max(1e-300);
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best = best.min(value);
    }
    Ok(r.powi(-(k as i32) - 2) * best)
}
