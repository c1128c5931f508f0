use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{displacement, displacement_of, AtomicMeasure, BallIndex};
use super::GmtError;
use crate::density::DensityField;
use crate::field::BallRegion;

#[derive(Debug, Clone, Serialize)]
pub struct RectifiabilityTrace {
    pub k: usize,
    pub x: Vec<f64>,
    /// Ascending scales.
    pub scales: Vec<f64>,
    pub displacements: Vec<f64>,
    /// Trapezoid sum of `D^k(x, s)/s` in `s` over the ladder.
    pub integral: f64,
}

fn sorted_ladder(ladder: &[f64]) -> Result<Vec<f64>, GmtError> {
    let mut s = ladder.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() || s[0] <= 0.0 || !s[s.len() - 1].is_finite() || s.windows(2).any(|w| w[0] == w[1]) {
        return Err(GmtError::InvalidLadder);
    }
    Ok(s)
}

fn trapezoid_over_s(scales: &[f64], d: &[f64]) -> f64 {
    scales.windows(2).zip(d.windows(2)).map(|(s, v)| 0.5 * (v[0] / s[0] + v[1] / s[1]) * (s[1] - s[0])).sum()
}

/// `∫ D^k_μ(x, s) ds/s` over the scales of the ladder.
pub fn rectifiability_integral(
    mu: &AtomicMeasure,
    x: &[f64],
    ladder: &[f64],
    k: usize,
) -> Result<RectifiabilityTrace, GmtError> {
    let scales = sorted_ladder(ladder)?;
    let displacements = scales.iter().map(|&s| displacement(mu, x, s, k)).collect::<Result<Vec<_>, _>>()?;
    let integral = trapezoid_over_s(&scales, &displacements);
    Ok(RectifiabilityTrace { k, x: x.to_vec(), scales, displacements, integral })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReifenbergOptions {
    /// Lattice points per axis across the bounding cube of the region.
    pub lattice: usize,
    /// Outer scales `t = r·2^{−j}/20`, `j < t_levels`.
    pub t_levels: usize,
    /// Inner ladder `s = t·2^{−i}`, `i ≤ s_levels`.
    pub s_levels: usize,
}

impl Default for ReifenbergOptions {
    fn default() -> Self {
        Self { lattice: 9, t_levels: 4, s_levels: 6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReifenbergReport {
    pub k: usize,
    pub delta: f64,
    /// `max t^{−k}∫_{B_t(x)}∫_0^t D^k_μ(y, s) ds/s dμ(y)` over the lattice.
    pub hypothesis_max: f64,
    pub argmax_x: Vec<f64>,
    pub argmax_t: f64,
    pub hypothesis_holds: bool,
    /// `μ(B_r(x₀))/rᵏ`.
    pub content_ratio: f64,
    pub cells: usize,
}

/// Scans the hypothesis integral over lattice points `x ∈ B_r(x₀)` and
/// scales `t < r/10`. The inner `s`-integral is truncated at `t·2^{−s_levels}`.
pub fn reifenberg_check(
    mu: &AtomicMeasure,
    region: &BallRegion,
    k: usize,
    delta: f64,
    opts: &ReifenbergOptions,
) -> Result<ReifenbergReport, GmtError> {
    let n = mu.dim();
    if k > n {
        return Err(GmtError::InvalidLevel { k, dim: n });
    }
    if region.center.len() != n {
        return Err(GmtError::PointDimension { expected: n, got: region.center.len() });
    }
    if opts.lattice < 1 || opts.t_levels < 1 || opts.s_levels < 1 {
        return Err(GmtError::InvalidLadder);
    }
    let r = region.radius;
    let levels = opts.t_levels + opts.s_levels;
    // Descending global ladder; t_j sits at index j and its inner ladder at j..=j+s_levels.
    let ladder: Vec<f64> = (0..=levels).map(|m| r / 20.0 * 0.5f64.powi(m as i32)).collect();
    let reach = BallRegion::new(region.center.clone(), r + ladder[0]);
    let index = BallIndex::new(mu, ladder[0]);
    let atoms: Vec<(Vec<f64>, f64)> = mu.in_ball(&reach).map(|(y, w)| (y.to_vec(), w)).collect();
    let table: Vec<Vec<f64>> = atoms
        .par_iter()
        .map(|(y, _)| ladder.iter().map(|&s| displacement_of(&index.query(y, s), n, s, k)).collect())
        .collect();
    let inner = |a: usize, j: usize| {
        let s: Vec<f64> = ladder[j..=j + opts.s_levels].iter().rev().copied().collect();
        let d: Vec<f64> = table[a][j..=j + opts.s_levels].iter().rev().copied().collect();
        trapezoid_over_s(&s, &d)
    };
    let m = opts.lattice;
    let step = if m > 1 { 2.0 * r / (m - 1) as f64 } else { 0.0 };
    let mut lattice = vec![];
    let mut idx = vec![0usize; n];
    'outer: loop {
        let x: Vec<f64> = (0..n)
            .map(|d| if m > 1 { region.center[d] - r + idx[d] as f64 * step } else { region.center[d] })
            .collect();
        if region.contains(&x) || m == 1 {
            lattice.push(x);
        }
        for d in 0..n {
            idx[d] += 1;
            if idx[d] < m {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    let mut best = (f64::NEG_INFINITY, region.center.clone(), ladder[0]);
    let mut cells = 0;
    for x in &lattice {
        for j in 0..opts.t_levels {
            let t = ladder[j];
            let ball = BallRegion::new(x.clone(), t);
            let sum: f64 =
                atoms.iter().enumerate().filter(|(_, (y, _))| ball.contains(y)).map(|(a, (_, w))| w * inner(a, j)).sum();
            let value = sum / t.powi(k as i32);
            cells += 1;
            if value > best.0 {
                best = (value, x.clone(), t);
            }
        }
    }
    let hypothesis_max = best.0.max(0.0);
    Ok(ReifenbergReport {
        k,
        delta,
        hypothesis_max,
        argmax_x: best.1,
        argmax_t: best.2,
        hypothesis_holds: hypothesis_max < delta,
        content_ratio: mu.mass_in(region) / r.powi(k as i32),
        cells,
    })
}

/// Terms of `D^k_μ(x, s) ≤ C τ⁻¹ s^{−k} ∫_{B_s(x)} W_f(y, s) dμ(y)`.
#[derive(Debug, Clone, Serialize)]
pub struct BestApproximation {
    pub displacement: f64,
    /// `inf_V s^{2−2α−n}∫_{B_{5s}(x)}|V·∇u|²` over `(k+1)`-planes.
    pub tau: f64,
    /// `∫_{B_s(x)} W_f(y, s) dμ(y)`.
    pub pinching: f64,
    /// Smallest `C` for which the inequality holds here.
    pub constant: f64,
}

pub fn best_approximation(
    density: &DensityField<'_>,
    mu: &AtomicMeasure,
    x: &[f64],
    s: f64,
    k: usize,
) -> Result<BestApproximation, GmtError> {
    let n = density.dim();
    if k + 1 > n {
        return Err(GmtError::InvalidLevel { k, dim: n.saturating_sub(1) });
    }
    let disp = displacement(mu, x, s, k)?;
    let grid = density.u().grid();
    let grad = density.grad();
    let mut m = DMatrix::<f64>::zeros(n, n);
    grid.visit_ball(x, 5.0 * s, |c, _, _| {
        let g = grad.at(c);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += g[i] * g[j];
            }
        }
    });
    let mut eig: Vec<f64> = SymmetricEigen::new(m * grid.cell_volume()).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let tau = s.powf(2.0 - 2.0 * density.alpha() - n as f64) * eig[..=k].iter().map(|l| l.max(0.0)).sum::<f64>();
    let ball = BallRegion::new(x.to_vec(), s);
    let mut pinching = 0.0;
    for (y, w) in mu.in_ball(&ball) {
        pinching += w * density.pinch_w(y, s)?;
    }
    let constant = if disp == 0.0 { 0.0 } else { disp * tau * s.powi(k as i32) / pinching };
    Ok(BestApproximation { displacement: disp, tau, pinching, constant })
}
