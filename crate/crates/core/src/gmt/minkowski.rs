use serde::Serialize;

use super::GmtError;
use crate::field::{distance_transform, BallRegion, Mask, ScalarField};

#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiReport {
    pub k: usize,
    pub radii: Vec<f64>,
    /// `ℒⁿ(B_r(S))`, counted as `hⁿ·#{dist < r}`.
    pub volumes: Vec<f64>,
    /// `(2r)^{k−n}·ℒⁿ(B_r(S))`.
    pub contents: Vec<f64>,
    /// Least-squares slope of `log ℒⁿ(B_r(S))` against `log r`.
    pub slope: f64,
    /// `n − slope`.
    pub dimension: f64,
}

fn check_radii(radii: &[f64]) -> Result<(), GmtError> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(GmtError::InvalidLadder);
    }
    Ok(())
}

fn log_slope(radii: &[f64], volumes: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        radii.iter().zip(volumes).filter(|(_, v)| **v > 0.0).map(|(r, v)| (r.ln(), v.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    num / den
}

fn report(n: usize, k: usize, radii: &[f64], volumes: Vec<f64>) -> MinkowskiReport {
    let contents = radii.iter().zip(&volumes).map(|(r, v)| (2.0 * r).powi(k as i32 - n as i32) * v).collect();
    let slope = log_slope(radii, &volumes);
    MinkowskiReport { k, radii: radii.to_vec(), volumes, contents, slope, dimension: n as f64 - slope }
}

/// `k`-dimensional Minkowski contents of the set cells at each radius.
pub fn minkowski_content(mask: &Mask, k: usize, radii: &[f64]) -> Result<MinkowskiReport, GmtError> {
    check_radii(radii)?;
    let g = mask.grid();
    let n = g.dim();
    if k > n {
        return Err(GmtError::InvalidLevel { k, dim: n });
    }
    let dist = distance_transform(mask)?;
    let mut sorted: Vec<f64> = dist.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let cell = g.cell_volume();
    let volumes = radii.iter().map(|&r| sorted.partition_point(|&d| d < r) as f64 * cell).collect();
    Ok(report(n, k, radii, volumes))
}

/// `ℒⁿ(B_r({u < ε r^α} ∩ B))` for each `r`, where the set itself moves with
/// `r`. Radii with an empty sublevel set get volume 0 and are left out of the
/// slope fit.
pub fn sublevel_neighborhood(
    u: &ScalarField,
    epsilon: f64,
    alpha: f64,
    radii: &[f64],
    within: &BallRegion,
) -> Result<MinkowskiReport, GmtError> {
    check_radii(radii)?;
    let n = u.grid().dim();
    let cell = u.grid().cell_volume();
    let mut volumes = Vec::with_capacity(radii.len());
    for &r in radii {
        let mask = Mask::below(u, epsilon * r.powf(alpha)).and_ball(within);
        if mask.count() == 0 {
            volumes.push(0.0);
            continue;
        }
        let dist = distance_transform(&mask)?;
        volumes.push(dist.values().iter().filter(|&&d| d < r).count() as f64 * cell);
    }
    Ok(report(n, n.saturating_sub(2), radii, volumes))
}
