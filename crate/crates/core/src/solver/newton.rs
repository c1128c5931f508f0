//! Damped Newton iteration for critical points of the energy, with zero
//! cells held fixed. Isolated rupture solutions are saddle points (the
//! linearization `−Δ − pα(α+n−2)|x|⁻²` has negative directions below
//! dimension nine for `p = 3`), so descent flows leave them; Newton does not.

use serde::{Deserialize, Serialize};

use super::{Boundary, SolveResult, SolverConfig, SolverError};
use crate::density::powf_mp;
use crate::field::{Grid, Mask, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub krylov_rtol: f64,
    pub krylov_max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 60, krylov_rtol: 1e-10, krylov_max_iter: 50_000 }
    }
}

struct System<'a> {
    grid: &'a Grid,
    free: Vec<bool>,
    f: Option<&'a [f64]>,
    p: f64,
}

impl System<'_> {
    fn neighbors(&self, c: usize, mut visit: impl FnMut(Option<usize>)) {
        let g = self.grid;
        for d in 0..g.dim() {
            let s = g.strides()[d];
            let i = (c / s) % g.shape()[d];
            visit(if i > 0 { Some(c - s) } else { None });
            visit(if i + 1 < g.shape()[d] { Some(c + s) } else { None });
        }
    }

    /// `Δ_h u − u⁻ᵖ − f` on free cells, zero elsewhere.
    fn residual(&self, u: &[f64], out: &mut [f64]) {
        let h2 = 1.0 / (self.grid.h() * self.grid.h());
        for c in 0..u.len() {
            if !self.free[c] {
                out[c] = 0.0;
                continue;
            }
            let mut lap = 0.0;
            self.neighbors(c, |nb| {
                lap += match nb {
                    Some(j) => u[j] - u[c],
                    None => 0.0,
                }
            });
            out[c] = lap * h2 - powf_mp(u[c], self.p) - self.f.map_or(0.0, |f| f[c]);
        }
    }

    /// `(Δ_h + p u^{−p−1}) v` restricted to free cells.
    fn apply(&self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let h2 = 1.0 / (self.grid.h() * self.grid.h());
        let p = self.p;
        for c in 0..u.len() {
            if !self.free[c] {
                out[c] = 0.0;
                continue;
            }
            let mut lap = 0.0;
            self.neighbors(c, |nb| {
                if let Some(j) = nb {
                    lap += if self.free[j] { v[j] } else { 0.0 } - v[c];
                }
            });
            out[c] = lap * h2 + p * powf_mp(u[c], p) / u[c] * v[c];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unpreconditioned MINRES for the symmetric, possibly indefinite system
/// `A x = b`. Returns the solution and the achieved relative residual.
fn minres(apply: impl Fn(&[f64], &mut [f64]), b: &[f64], rtol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let beta1 = dot(b, b).sqrt();
    if beta1 == 0.0 {
        return (x, 0.0);
    }
    let (mut r1, mut r2, mut y) = (b.to_vec(), b.to_vec(), b.to_vec());
    let (mut w, mut w1, mut w2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut v = vec![0.0; n];
    let (mut oldb, mut beta, mut dbar, mut epsln) = (0.0, beta1, 0.0, 0.0);
    let (mut phibar, mut cs, mut sn) = (beta1, -1.0, 0.0);
    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(vi, yi)| *vi = s * yi);
        apply(&v, &mut y);
        if itn >= 2 {
            let k = beta / oldb;
            y.iter_mut().zip(&r1).for_each(|(yi, ri)| *yi -= k * ri);
        }
        let alfa = dot(&v, &y);
        let k = alfa / beta;
        y.iter_mut().zip(&r2).for_each(|(yi, ri)| *yi -= k * ri);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = dot(&y, &y).sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
            x[i] += phi * w[i];
        }
        if phibar <= rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    (x, phibar / beta1)
}

/// Newton's method on `Δ_h u = u⁻ᵖ + f` over positive interior cells, with
/// cells where `init = 0` (plus any in `pinned`) held at zero and a
/// fraction-to-boundary damping that keeps free cells positive. The
/// residual history records the sup residual per iteration.
pub fn solve_critical_point(
    f: Option<&ScalarField>,
    cfg: &SolverConfig,
    init: &ScalarField,
    pinned: Option<&Mask>,
    opts: &NewtonOptions,
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    if let Some(f) = f {
        if !f.same_grid(init) {
            return Err(SolverError::GridMismatch);
        }
    }
    if let Some(c) = init.values().iter().position(|&v| v < 0.0) {
        return Err(SolverError::NegativeInit(c));
    }
    let grid = init.grid();
    let mut u = init.values().to_vec();
    if let Some(m) = pinned {
        if m.grid() != grid {
            return Err(SolverError::GridMismatch);
        }
        m.set_cells().for_each(|c| u[c] = 0.0);
    }
    let free: Vec<bool> = (0..grid.len())
        .map(|c| u[c] > 0.0 && !(cfg.boundary == Boundary::Dirichlet && grid.is_boundary_flat(c)))
        .collect();
    let sys = System { grid, free, f: f.map(|f| f.values()), p: cfg.p };
    let mut res = vec![0.0; u.len()];
    let mut trial = u.clone();
    let mut trial_res = res.clone();
    let sup = |r: &[f64]| r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    sys.residual(&u, &mut res);
    let mut out = SolveResult {
        u: init.clone(),
        residual_history: vec![sup(&res)],
        energy_history: vec![],
        converged: false,
        active_rupture_cells: 0,
        steps: 0,
        halvings: 0,
        final_residual: sup(&res),
    };
    for _ in 0..opts.max_iter {
        if out.final_residual < cfg.tol_residual {
            out.converged = true;
            break;
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let (step, _) = minres(|v, o| sys.apply(&u, v, o), &rhs, opts.krylov_rtol, opts.krylov_max_iter);
        let mut lam = 1.0f64;
        for c in 0..u.len() {
            if step[c] < 0.0 {
                lam = lam.min(0.9 * u[c] / -step[c]);
            }
        }
        let norm0 = dot(&res, &res).sqrt();
        let mut accepted = false;
        for _ in 0..40 {
            trial.iter_mut().zip(&u).zip(&step).for_each(|((t, ui), si)| *t = ui + lam * si);
            sys.residual(&trial, &mut trial_res);
            if dot(&trial_res, &trial_res).sqrt() <= (1.0 - 1e-4 * lam) * norm0 {
                accepted = true;
                break;
            }
            lam *= 0.5;
            out.halvings += 1;
        }
        if !accepted {
            break;
        }
        let stalled = dot(&trial_res, &trial_res).sqrt() > (1.0 - 1e-6) * norm0;
        std::mem::swap(&mut u, &mut trial);
        std::mem::swap(&mut res, &mut trial_res);
        out.steps += 1;
        out.final_residual = sup(&res);
        out.residual_history.push(out.final_residual);
        if stalled {
            break;
        }
    }
    if out.final_residual < cfg.tol_residual {
        out.converged = true;
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite(out.steps));
    }
    let dmin = cfg.delta_min();
    out.active_rupture_cells = u.iter().filter(|&&v| v <= dmin).count();
    out.u = ScalarField::new(grid.clone(), u, "u")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minres_solves_indefinite_diagonal_plus_laplacian() {
        // 1-D tridiagonal with a shift that makes it indefinite.
        let n = 50;
        let a = |v: &[f64], o: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { v[i - 1] } else { 0.0 };
                let r = if i + 1 < n { v[i + 1] } else { 0.0 };
                o[i] = l + r - 2.0 * v[i] + 1.5 * v[i];
            }
        };
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        a(&x_true, &mut b);
        let (x, rel) = minres(a, &b, 1e-12, 500);
        assert!(rel < 1e-10);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-8);
        }
    }
}
