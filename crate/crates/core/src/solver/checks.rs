use serde::Serialize;

use super::SolverError;
use crate::density::{powf_1mp, powf_mp, Cutoff};
use crate::exact::alpha;
use crate::field::{distance_transform, gradient, laplacian, BallRegion, Mask, ScalarField};

#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub sup: f64,
    pub l2: f64,
    pub cells: usize,
}

/// `Δu − max(u, u_floor)⁻ᵖ − f` over interior cells farther than
/// `exclusion_radius` from `{u < u_floor}`.
pub fn pde_residual(
    u: &ScalarField,
    f: Option<&ScalarField>,
    p: f64,
    exclusion_radius: f64,
    u_floor: f64,
) -> Result<Residual, SolverError> {
    if let Some(f) = f {
        if !f.same_grid(u) {
            return Err(SolverError::GridMismatch);
        }
    }
    let lap = laplacian(u)?;
    let low = Mask::below(u, u_floor);
    let dist = if low.count() > 0 { Some(distance_transform(&low)?) } else { None };
    let uv = u.values();
    let (mut sup, mut sq, mut cells) = (0.0f64, 0.0, 0usize);
    for c in 0..uv.len() {
        let l = lap.values()[c];
        if l.is_nan() {
            continue;
        }
        if let Some(d) = &dist {
            if d.values()[c] <= exclusion_radius {
                continue;
            }
        }
        let r = l - powf_mp(uv[c].max(u_floor), p) - f.map_or(0.0, |f| f.values()[c]);
        sup = sup.max(r.abs());
        sq += r * r;
        cells += 1;
    }
    Ok(Residual { sup, l2: (sq * u.grid().cell_volume()).sqrt(), cells })
}

/// `max_{x, r} (r^{−λ} ∫_{B_r(x)} |f|^q)^{1/q}` over the sampled centers and
/// radii; a lower bound of the seminorm.
pub fn morrey_seminorm(
    f: &ScalarField,
    lambda: f64,
    q: f64,
    centers: &[Vec<f64>],
    radii: &[f64],
) -> Result<f64, SolverError> {
    if centers.is_empty() || radii.is_empty() {
        return Err(SolverError::EmptySample);
    }
    if !(q >= 1.0) || !(lambda >= 0.0) {
        return Err(SolverError::InvalidConfig(format!("need q ≥ 1, λ ≥ 0; got q = {q}, λ = {lambda}")));
    }
    let fv = f.values();
    let vol = f.grid().cell_volume();
    let mut best = 0.0f64;
    for x in centers {
        for &r in radii {
            let mut acc = 0.0;
            f.grid().visit_ball(x, r, |c, _, _| acc += fv[c].abs().powf(q));
            best = best.max((r.powf(-lambda) * acc * vol).powf(1.0 / q));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientTail {
    pub lambdas: Vec<f64>,
    /// `ℒⁿ({|∇u| > λ} ∩ region)`.
    pub measures: Vec<f64>,
    /// `λ^{2/(1−α)}·measure`.
    pub statistic: Vec<f64>,
    pub sup_statistic: f64,
    /// Least-squares slope of `log measure` against `log λ` over nonzero measures.
    pub slope: Option<f64>,
}

/// Weak-`L^{2/(1−α)}` tail of `|∇u|` inside `region`.
pub fn gradient_tail(
    u: &ScalarField,
    region: &BallRegion,
    p: f64,
    lambdas: &[f64],
) -> Result<GradientTail, SolverError> {
    let g = gradient(u)?;
    let mut mags = vec![];
    u.grid().visit_ball(&region.center, region.radius, |c, _, _| mags.push(g.norm_sq(c).sqrt()));
    mags.sort_by(|a, b| a.total_cmp(b));
    let vol = u.grid().cell_volume();
    let e = 2.0 / (1.0 - alpha(p));
    let measures: Vec<f64> = lambdas
        .iter()
        .map(|&l| (mags.len() - mags.partition_point(|&m| m <= l)) as f64 * vol)
        .collect();
    let statistic: Vec<f64> = lambdas.iter().zip(&measures).map(|(l, m)| l.powf(e) * m).collect();
    let pts: Vec<(f64, f64)> = lambdas
        .iter()
        .zip(&measures)
        .filter(|(_, &m)| m > 0.0)
        .map(|(l, m)| (l.ln(), m.ln()))
        .collect();
    Ok(GradientTail {
        lambdas: lambdas.to_vec(),
        sup_statistic: statistic.iter().copied().fold(0.0, f64::max),
        slope: least_squares_slope(&pts),
        measures,
        statistic,
    })
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Serialize)]
pub struct Nondegeneracy {
    pub radii: Vec<f64>,
    /// `sup_{B_r(x)} u / r^α`.
    pub ratios: Vec<f64>,
    pub c_min: f64,
    pub c_max: f64,
}

pub fn nondegeneracy(u: &ScalarField, x: &[f64], radii: &[f64], p: f64) -> Result<Nondegeneracy, SolverError> {
    if radii.is_empty() {
        return Err(SolverError::EmptySample);
    }
    let a = alpha(p);
    let uv = u.values();
    let ratios: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let mut sup = 0.0f64;
            u.grid().visit_ball(x, r, |c, _, _| sup = sup.max(uv[c]));
            sup / r.powf(a)
        })
        .collect();
    Ok(Nondegeneracy {
        c_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        c_max: ratios.iter().copied().fold(0.0, f64::max),
        radii: radii.to_vec(),
        ratios,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteriorEstimates {
    pub radii: Vec<f64>,
    /// `∫_{B_r}|∇u|² / r^{2α+n−2}`.
    pub gradient_ratio: Vec<f64>,
    /// `∫_{B_r}(r^α max(u,δ)⁻ᵖ + max(u,δ)^{1−p}) / r^{2α+n−2}`.
    pub singular_ratio: Vec<f64>,
    pub gradient_constant: f64,
    pub singular_constant: f64,
}

pub fn interior_estimates(
    u: &ScalarField,
    x: &[f64],
    radii: &[f64],
    p: f64,
    delta: f64,
) -> Result<InteriorEstimates, SolverError> {
    let g = gradient(u)?;
    let a = alpha(p);
    let n = u.grid().dim() as f64;
    let uv = u.values();
    let vol = u.grid().cell_volume();
    let (mut gr, mut sr) = (vec![], vec![]);
    for &r in radii {
        let (mut sg, mut ss) = (0.0, 0.0);
        let ra = r.powf(a);
        u.grid().visit_ball(x, r, |c, _, _| {
            let v = uv[c].max(delta);
            sg += g.norm_sq(c);
            ss += ra * powf_mp(v, p) + powf_1mp(v, p);
        });
        let scale = vol / r.powf(2.0 * a + n - 2.0);
        gr.push(sg * scale);
        sr.push(ss * scale);
    }
    Ok(InteriorEstimates {
        radii: radii.to_vec(),
        gradient_constant: gr.iter().copied().fold(0.0, f64::max),
        singular_constant: sr.iter().copied().fold(0.0, f64::max),
        gradient_ratio: gr,
        singular_ratio: sr,
    })
}

/// Inner-variation defect for `Y(y) = φ(|y−x|²/r²)(y−x)`:
/// `r^{−(n−2+2α)}·∫[e·div Y − DY(∇u,∇u) − f(Y·∇u)]` with
/// `e = |∇u|²/2 − max(u,δ)^{1−p}/(p−1)`. Zero for stationary solutions.
pub fn stationarity_defect(
    u: &ScalarField,
    f: Option<&ScalarField>,
    p: f64,
    x: &[f64],
    r: f64,
    delta: f64,
) -> Result<f64, SolverError> {
    let g = gradient(u)?;
    let a = alpha(p);
    let n = u.grid().dim();
    let phi = Cutoff;
    let uv = u.values();
    let inv_r2 = 1.0 / (r * r);
    let mut acc = 0.0;
    u.grid().visit_ball(x, phi.reach(r), |c, off, d2| {
        let t = d2 * inv_r2;
        let (z, dz) = (phi.phi(t), phi.dphi(t));
        let grad = g.at(c);
        let g2: f64 = grad.iter().map(|v| v * v).sum();
        let radial: f64 = grad.iter().zip(off).map(|(a, b)| a * b).sum();
        let e = 0.5 * g2 - powf_1mp(uv[c].max(delta), p) / (p - 1.0);
        let div = n as f64 * z + 2.0 * dz * t;
        let dy = z * g2 + 2.0 * dz * radial * radial * inv_r2;
        let fc = f.map_or(0.0, |f| f.values()[c]);
        acc += e * div - dy - fc * z * radial;
    });
    Ok(acc * u.grid().cell_volume() / r.powf(n as f64 - 2.0 + 2.0 * a))
}
