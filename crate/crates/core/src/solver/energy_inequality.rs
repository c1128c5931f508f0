use serde::Serialize;

use super::{Snapshot, SolverError};
use crate::density::powf_1mp;
use crate::field::gradient;

/// `φ(y) = (1 − |y−c|²/R²)³` inside the ball, zero outside (C²).
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceCutoff {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl SpaceCutoff {
    fn eval(&self, y: &[f64]) -> (f64, Vec<f64>) {
        let z: Vec<f64> = y.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let s = 1.0 - z.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if s <= 0.0 {
            return (0.0, vec![0.0; y.len()]);
        }
        let g = -6.0 * s * s / (self.radius * self.radius);
        (s * s * s, z.into_iter().map(|v| g * v).collect())
    }
}

/// `ψ(t) = sin²(π(t−t₀)/(t₁−t₀))` on `[t₀, t₁]`, zero outside; `ψ ≡ 0` when
/// `zero` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeCutoff {
    pub t0: f64,
    pub t1: f64,
    pub zero: bool,
}

impl TimeCutoff {
    pub fn new(t0: f64, t1: f64) -> Self {
        Self { t0, t1, zero: false }
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        if self.zero || t <= self.t0 || t >= self.t1 {
            return (0.0, 0.0);
        }
        let w = std::f64::consts::PI / (self.t1 - self.t0);
        let a = w * (t - self.t0);
        (a.sin().powi(2), 2.0 * w * a.sin() * a.cos())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyInequality {
    /// `∫∫ e φ² ∂ₜψ`.
    pub lhs: f64,
    /// `∫∫ |∂ₜu|² φ² ψ + 2 ∫∫ ∂ₜu (∇u·∇φ) φ ψ`.
    pub rhs: f64,
    /// `lhs − rhs`; nonnegative when the inequality holds.
    pub defect: f64,
}

/// Both sides of the localized energy inequality for time-independent `φ`
/// (the `∂ₜφ` term vanishes), with `∂ₜu` by three-point differences between
/// snapshots and the trapezoid rule in time.
pub fn energy_inequality_check(
    snapshots: &[Snapshot],
    phi: &SpaceCutoff,
    psi: &TimeCutoff,
    p: f64,
    delta: f64,
) -> Result<EnergyInequality, SolverError> {
    if snapshots.len() < 2 {
        return Err(SolverError::TooFewSnapshots { needed: 2, available: snapshots.len() });
    }
    let grid = snapshots[0].u.grid().clone();
    if snapshots.iter().any(|s| s.u.grid() != &grid) {
        return Err(SolverError::GridMismatch);
    }
    let vol = grid.cell_volume();
    let weights: Vec<(f64, Vec<f64>)> = (0..grid.len()).map(|c| phi.eval(&grid.center_of(c))).collect();
    let m = snapshots.len();
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    let (mut lhs_t, mut rhs_t) = (vec![0.0; m], vec![0.0; m]);
    for k in 0..m {
        let (ps, dps) = psi.eval(times[k]);
        if ps == 0.0 && dps == 0.0 {
            continue;
        }
        let (a, b) = if k == 0 { (0, 1) } else if k == m - 1 { (m - 2, m - 1) } else { (k - 1, k + 1) };
        let u = &snapshots[k].u;
        let g = gradient(u)?;
        let uv = u.values();
        let (ua, ub) = (snapshots[a].u.values(), snapshots[b].u.values());
        let (ta, tb, tk) = (times[a], times[b], times[k]);
        let three = a + 2 == b;
        let (mut l, mut r) = (0.0, 0.0);
        for c in 0..grid.len() {
            let (w, dw) = &weights[c];
            if *w == 0.0 {
                continue;
            }
            let ut = if three {
                crate::density::nonuniform_derivative([ta, tk, tb], [ua[c], uv[c], ub[c]])
            } else {
                (ub[c] - ua[c]) / (tb - ta)
            };
            let grad = g.at(c);
            let e = 0.5 * g.norm_sq(c) - powf_1mp(uv[c].max(delta), p) / (p - 1.0);
            let gdw: f64 = grad.iter().zip(dw).map(|(x, y)| x * y).sum();
            l += e * w * w * dps;
            r += ut * ut * w * w * ps + 2.0 * ut * gdw * w * ps;
        }
        lhs_t[k] = l * vol;
        rhs_t[k] = r * vol;
    }
    let trap = |v: &[f64]| (1..m).map(|k| 0.5 * (v[k] + v[k - 1]) * (times[k] - times[k - 1])).sum::<f64>();
    let (lhs, rhs) = (trap(&lhs_t), trap(&rhs_t));
    Ok(EnergyInequality { lhs, rhs, defect: lhs - rhs })
}
