use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Boundary, SolverConfig, SolverError};
use crate::density::{powf_1mp, powf_mp};
use crate::exact::HomogeneousSolution;
use crate::field::{gradient, BallRegion, Grid, ScalarField};

const CHUNK: usize = 4096;
const ENERGY_RTOL: f64 = 1e-10;
const MAX_HALVINGS: u32 = 40;

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: ScalarField,
    pub residual_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    pub converged: bool,
    /// Cells with `u ≤ δ_min`.
    pub active_rupture_cells: usize,
    pub steps: usize,
    pub halvings: usize,
    pub final_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: ScalarField,
}

/// Regularized potential: `−u^{1−p}/(p−1)` above `δ`, its tangent line below.
fn potential(u: f64, delta: f64, p: f64) -> f64 {
    if u >= delta {
        -powf_1mp(u, p) / (p - 1.0)
    } else {
        -powf_1mp(delta, p) / (p - 1.0) + powf_mp(delta, p) * (u - delta)
    }
}

struct Kernel<'a> {
    grid: &'a Grid,
    faces: Vec<u8>,
    f: Option<&'a [f64]>,
    p: f64,
    boundary: Boundary,
}

struct PassOut {
    energy: f64,
    residual: f64,
}

impl<'a> Kernel<'a> {
    fn new(grid: &'a Grid, f: Option<&'a [f64]>, p: f64, boundary: Boundary) -> Self {
        let n = grid.dim();
        let mut idx = vec![0; n];
        let faces = (0..grid.len())
            .map(|c| {
                grid.unravel(c, &mut idx);
                let mut b = 0u8;
                for d in 0..n {
                    if idx[d] == 0 {
                        b |= 1 << (2 * d);
                    }
                    if idx[d] + 1 == grid.shape()[d] {
                        b |= 1 << (2 * d + 1);
                    }
                }
                b
            })
            .collect();
        Self { grid, faces, f, p, boundary }
    }

    /// One explicit step `cur → next`; returns the discrete energy of `cur`
    /// and the sup residual over updated cells with `u > 2δ`.
    fn pass(&self, cur: &[f64], next: &mut [f64], dt: f64, delta: f64) -> PassOut {
        let n = self.grid.dim();
        let strides = self.grid.strides();
        let h = self.grid.h();
        let h2inv = 1.0 / (h * h);
        let p = self.p;
        let fixed_edges = self.boundary == Boundary::Dirichlet;
        let parts: Vec<(f64, f64)> = next
            .par_chunks_mut(CHUNK)
            .enumerate()
            .map(|(k, out)| {
                let (mut e, mut res) = (0.0, 0.0f64);
                for (j, o) in out.iter_mut().enumerate() {
                    let c = k * CHUNK + j;
                    let u = cur[c];
                    let fl = self.faces[c];
                    let fc = self.f.map_or(0.0, |f| f[c]);
                    let mut lap = 0.0;
                    let mut edge = 0.0;
                    for d in 0..n {
                        let s = strides[d];
                        let lo = if fl & (1 << (2 * d)) != 0 { u } else { cur[c - s] };
                        let hi = if fl & (1 << (2 * d + 1)) != 0 {
                            u
                        } else {
                            let v = cur[c + s];
                            edge += (u - v) * (u - v);
                            v
                        };
                        lap += lo + hi - 2.0 * u;
                    }
                    lap *= h2inv;
                    e += 0.5 * edge * h2inv + potential(u, delta, p) + fc * u;
                    if fixed_edges && fl != 0 {
                        *o = u;
                        continue;
                    }
                    let g = lap - powf_mp(u.max(delta), p) - fc;
                    *o = (u + dt * g).max(0.0);
                    if u > 2.0 * delta {
                        res = res.max(g.abs());
                    }
                }
                (e, res)
            })
            .collect();
        let vol = self.grid.cell_volume();
        PassOut {
            energy: parts.iter().map(|q| q.0).sum::<f64>() * vol,
            residual: parts.iter().map(|q| q.1).fold(0.0, f64::max),
        }
    }
}

fn check_inputs(
    u0: &ScalarField,
    f: Option<&ScalarField>,
    cfg: &SolverConfig,
) -> Result<(), SolverError> {
    cfg.validate()?;
    if let Some(f) = f {
        if !f.same_grid(u0) {
            return Err(SolverError::GridMismatch);
        }
    }
    if let Some(c) = u0.values().iter().position(|&v| v < 0.0) {
        return Err(SolverError::NegativeInit(c));
    }
    if u0.grid().shape().iter().any(|&s| s < 3) {
        return Err(SolverError::Field(crate::field::FieldError::GridTooSmall { needed: 3 }));
    }
    Ok(())
}

fn base_dt(grid: &Grid, cfg: &SolverConfig) -> f64 {
    let h = grid.h();
    cfg.dt_safety * h * h / (2.0 * grid.dim() as f64)
}

/// Projected explicit gradient flow on the regularized energy, one stage per
/// `δ` in the schedule. Edge cells keep the initial trace under Dirichlet
/// conditions; when `trace` is given the initial data must match it there.
pub fn solve_elliptic(
    f: Option<&ScalarField>,
    cfg: &SolverConfig,
    init: &ScalarField,
    trace: Option<&ScalarField>,
) -> Result<SolveResult, SolverError> {
    check_inputs(init, f, cfg)?;
    let grid = init.grid();
    if let Some(tr) = trace {
        if !tr.same_grid(init) {
            return Err(SolverError::GridMismatch);
        }
        for c in (0..grid.len()).filter(|&c| grid.is_boundary_flat(c)) {
            let gap = (tr.values()[c] - init.values()[c]).abs();
            if gap > 1e-12 * (1.0 + tr.values()[c].abs()) {
                return Err(SolverError::BoundaryMismatch { cell: c, gap });
            }
        }
    }
    let kernel = Kernel::new(grid, f.map(|f| f.values()), cfg.p, cfg.boundary);
    let dt0 = base_dt(grid, cfg);
    let stages = cfg.delta_schedule.len();
    let stage_budget = (cfg.max_steps / stages).max(1);
    let mut prev = init.values().to_vec();
    let mut cur = prev.clone();
    let mut next = vec![0.0; grid.len()];
    let mut out = SolveResult {
        u: init.clone(),
        residual_history: vec![],
        energy_history: vec![],
        converged: false,
        active_rupture_cells: 0,
        steps: 0,
        halvings: 0,
        final_residual: f64::INFINITY,
    };
    for (si, &delta) in cfg.delta_schedule.iter().enumerate() {
        let last = si + 1 == stages;
        let mut dt = dt0;
        let mut halvings = 0u32;
        let mut accepted: Option<f64> = None;
        let mut stage_steps = 0usize;
        loop {
            let po = kernel.pass(&cur, &mut next, dt, delta);
            if !po.energy.is_finite() {
                return Err(SolverError::NonFinite(out.steps));
            }
            if let Some(e_prev) = accepted {
                if po.energy - e_prev > ENERGY_RTOL * e_prev.abs().max(1e-300) {
                    cur.copy_from_slice(&prev);
                    dt *= 0.5;
                    halvings += 1;
                    out.halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(SolverError::NonFinite(out.steps));
                    }
                    continue;
                }
            }
            accepted = Some(po.energy);
            if out.steps % cfg.record_every == 0 {
                out.energy_history.push(po.energy);
                out.residual_history.push(po.residual);
            }
            out.final_residual = po.residual;
            let done = po.residual < cfg.tol_residual;
            let budget_out = if last { out.steps >= cfg.max_steps } else { stage_steps >= stage_budget };
            if done || budget_out {
                if last {
                    out.converged = done;
                }
                break;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            out.steps += 1;
            stage_steps += 1;
        }
    }
    let delta_min = cfg.delta_min();
    out.active_rupture_cells = cur.iter().filter(|&&v| v <= delta_min).count();
    out.u = ScalarField::new(grid.clone(), cur, "u")?;
    Ok(out)
}

/// Explicit projected stepping of `∂ₜu = Δu − max(u, δ_min)⁻ᵖ − f` with
/// snapshots at `t = k·t_end/snapshots`, `k = 0..=snapshots`.
pub fn evolve_parabolic(
    u0: &ScalarField,
    f: Option<&ScalarField>,
    t_end: f64,
    snapshots: usize,
    cfg: &SolverConfig,
) -> Result<Vec<Snapshot>, SolverError> {
    check_inputs(u0, f, cfg)?;
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(SolverError::InvalidConfig(format!("final time {t_end}")));
    }
    let mut shots = vec![Snapshot { t: 0.0, u: u0.clone() }];
    if t_end == 0.0 || snapshots == 0 {
        return Ok(shots);
    }
    let grid = u0.grid();
    let kernel = Kernel::new(grid, f.map(|f| f.values()), cfg.p, cfg.boundary);
    let dt0 = base_dt(grid, cfg);
    let delta = cfg.delta_min();
    let mut cur = u0.values().to_vec();
    let mut prev = cur.clone();
    let mut next = vec![0.0; grid.len()];
    let mut t = 0.0;
    let mut dt_max = dt0;
    let mut last_dt = 0.0;
    let mut accepted: Option<f64> = None;
    for k in 1..=snapshots {
        let target = t_end * k as f64 / snapshots as f64;
        loop {
            let at_target = t >= target * (1.0 - 1e-14);
            let dt = if at_target { 0.0 } else { dt_max.min(target - t) };
            let po = kernel.pass(&cur, &mut next, dt, delta);
            if !po.energy.is_finite() {
                return Err(SolverError::NonFinite(0));
            }
            if let Some(e_prev) = accepted {
                if po.energy - e_prev > ENERGY_RTOL * e_prev.abs().max(1e-300) {
                    cur.copy_from_slice(&prev);
                    t -= last_dt;
                    dt_max *= 0.5;
                    if dt_max < dt0 * 0.5f64.powi(MAX_HALVINGS as i32) {
                        return Err(SolverError::NonFinite(0));
                    }
                    continue;
                }
            }
            accepted = Some(po.energy);
            if at_target {
                break;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
            t += dt;
            last_dt = dt;
        }
        t = target;
        shots.push(Snapshot { t, u: ScalarField::new(grid.clone(), cur.clone(), "u")? });
    }
    Ok(shots)
}

/// `∫ (|∇u|²/2 − max(u,δ)^{1−p}/(p−1) + fu)` over `region` (the whole box
/// when `None`), midpoint rule.
pub fn energy(
    u: &ScalarField,
    f: Option<&ScalarField>,
    region: Option<&BallRegion>,
    delta: f64,
    p: f64,
) -> Result<f64, SolverError> {
    if let Some(f) = f {
        if !f.same_grid(u) {
            return Err(SolverError::GridMismatch);
        }
    }
    let g = gradient(u)?;
    let uv = u.values();
    let term = |c: usize| {
        let fc = f.map_or(0.0, |f| f.values()[c]);
        0.5 * g.norm_sq(c) - powf_1mp(uv[c].max(delta), p) / (p - 1.0) + fc * uv[c]
    };
    let mut acc = 0.0;
    match region {
        Some(b) => {
            u.grid().visit_ball(&b.center, b.radius, |c, _, _| acc += term(c));
        }
        None => acc = (0..uv.len()).map(term).sum(),
    }
    Ok(acc * u.grid().cell_volume())
}

/// A seeded problem with an isolated rupture point: the radial homogeneous
/// solution centered at the cell nearest a seeded offset in `{−2,…,2}/64`
/// per axis, plus a harmonic
/// quadratic perturbation of size `amplitude` vanishing at that center.
/// Returns the initial field (which also carries the Dirichlet trace) and the
/// center.
pub fn seeded_rupture_problem(
    grid: &Grid,
    p: f64,
    seed: u64,
    amplitude: f64,
) -> Result<(ScalarField, Vec<f64>), SolverError> {
    let n = grid.dim();
    let sol = HomogeneousSolution::radial(n, p)
        .map_err(|e| SolverError::InvalidConfig(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: Vec<f64> = (0..n).map(|_| rng.gen_range(-2i32..=2) as f64 / 64.0).collect();
    let mut idx = grid.nearest_index(&offset);
    for (i, &s) in idx.iter_mut().zip(grid.shape()) {
        *i = (*i).clamp(1, s - 2);
    }
    let mut center = vec![0.0; n];
    grid.center(&idx, &mut center);
    let lin: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let init = ScalarField::from_fn(grid.clone(), "init", |y| {
        let z: Vec<f64> = y.iter().zip(&center).map(|(a, b)| a - b).collect();
        let mut pert: f64 = lin.iter().zip(&z).map(|(a, b)| a * b).sum();
        if n >= 2 {
            pert += b * (z[0] * z[0] - z[1] * z[1]) + c * z[0] * z[1];
        }
        (sol.value(&z) + amplitude * pert).max(0.0)
    });
    Ok((init, center))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_is_c1_at_delta() {
        let (d, p) = (0.1, 3.0);
        let below = potential(d - 1e-9, d, p);
        let above = potential(d + 1e-9, d, p);
        assert!((below - above).abs() < 1e-5);
        let slope = (potential(d - 1e-7, d, p) - potential(d - 2e-7, d, p)) / 1e-7;
        assert!((slope - powf_mp(d, p)).abs() < 1e-3 * powf_mp(d, p));
    }

    #[test]
    fn constant_energy() {
        let g = Grid::cube(2, 0.0, 1.0, 16).unwrap();
        let u = ScalarField::constant(g.clone(), 1.0, "u");
        let f = ScalarField::constant(g, 2.0, "f");
        assert!((energy(&u, None, None, 1e-6, 3.0).unwrap() + 0.5).abs() < 1e-12);
        assert!((energy(&u, Some(&f), None, 1e-6, 3.0).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.delta_schedule = vec![1e-2, 1e-1];
        assert!(cfg.validate().is_err());
    }
}
