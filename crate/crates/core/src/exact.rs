//! Reference solutions of `Δu = u⁻ᵖ`: the α-homogeneous family
//! `c·|x_⊥|^α` and the one-dimensional even profile with `u(0) = ε`.

use thiserror::Error;

use crate::field::{Grid, ScalarField};
use crate::quad::{self, GaussLegendre, QuadError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("exponent p = {0} must exceed 1")]
    InvalidExponent(f64),
    #[error("no positive homogeneous solution: {0}")]
    InvalidDimension(String),
    #[error("axis frame is not orthonormal or has the wrong dimension")]
    InvalidFrame,
    #[error("need 0 < eps < s_max, got eps = {eps}, s_max = {s_max}")]
    InvalidRange { eps: f64, s_max: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Homogeneity exponent `2/(p+1)`.
pub fn alpha(p: f64) -> f64 {
    2.0 / (p + 1.0)
}

/// `u(x) = coeff·|x_⊥|^α`, where `x_⊥` is the component orthogonal to the
/// optional axis frame. Without a frame this is the radial solution.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousSolution {
    dim: usize,
    p: f64,
    alpha: f64,
    coeff: f64,
    axis_subspace: Option<Vec<Vec<f64>>>,
}

impl HomogeneousSolution {
    pub fn radial(dim: usize, p: f64) -> Result<Self, ExactError> {
        Self::build(dim, p, None)
    }

    pub fn cylindrical(dim: usize, p: f64, frame: Vec<Vec<f64>>) -> Result<Self, ExactError> {
        let ok = frame.iter().all(|v| v.len() == dim)
            && frame.iter().enumerate().all(|(i, a)| {
                frame.iter().enumerate().all(|(j, b)| {
                    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    (d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12
                })
            });
        if !ok || frame.len() > dim {
            return Err(ExactError::InvalidFrame);
        }
        Self::build(dim, p, Some(frame))
    }

    fn build(dim: usize, p: f64, frame: Option<Vec<Vec<f64>>>) -> Result<Self, ExactError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(ExactError::InvalidExponent(p));
        }
        let k = frame.as_ref().map_or(0, Vec::len);
        let m = dim.checked_sub(k).unwrap_or(0);
        let a = alpha(p);
        let base = a * (a + m as f64 - 2.0);
        if m < 2 || !(base > 0.0) {
            return Err(ExactError::InvalidDimension(format!(
                "transverse dimension {m} gives α(α+m−2) = {base}"
            )));
        }
        Ok(Self { dim, p, alpha: a, coeff: base.powf(-1.0 / (p + 1.0)), axis_subspace: frame })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn coeff(&self) -> f64 {
        self.coeff
    }
    pub fn axis_subspace(&self) -> Option<&[Vec<f64>]> {
        self.axis_subspace.as_deref()
    }

    /// `|x_⊥|`.
    pub fn transverse_norm(&self, x: &[f64]) -> f64 {
        let mut r2: f64 = x.iter().map(|v| v * v).sum();
        if let Some(frame) = &self.axis_subspace {
            for v in frame {
                let d: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
                r2 -= d * d;
            }
        }
        r2.max(0.0).sqrt()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let r = self.transverse_norm(x);
        if r == 0.0 {
            0.0
        } else {
            self.coeff * r.powf(self.alpha)
        }
    }

    /// `∇u(x)`; undefined (returns `None`) on the axis.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let r = self.transverse_norm(x);
        if r == 0.0 {
            return None;
        }
        let mut perp = x.to_vec();
        if let Some(frame) = &self.axis_subspace {
            for v in frame {
                let d: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
                perp.iter_mut().zip(v).for_each(|(q, vi)| *q -= d * vi);
            }
        }
        let s = self.coeff * self.alpha * r.powf(self.alpha - 2.0);
        Some(perp.into_iter().map(|q| s * q).collect())
    }
}

/// Samples `sol` at cell centers; exact zeros on the axis.
pub fn homogeneous_field(sol: &HomogeneousSolution, grid: &Grid) -> Result<ScalarField, ExactError> {
    if grid.dim() != sol.dim {
        return Err(ExactError::InvalidDimension(format!(
            "grid has dimension {}, solution {}",
            grid.dim(),
            sol.dim
        )));
    }
    Ok(ScalarField::from_fn(grid.clone(), "exact", |x| sol.value(x)))
}

/// Even convex solution of `u″ = u⁻ᵖ` with `u(0) = ε`, stored as its
/// inverse `r = v(s)` on `[ε, s_max]`.
///
/// Tabulation uses `s = ε + τ²`, under which
/// `dv/dτ = 2τ / √(λ(ε^{1−p} − (ε+τ²)^{1−p}))` is smooth at `τ = 0`.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    p: f64,
    eps: f64,
    lambda: f64,
    tau: Vec<f64>,
    v: Vec<f64>,
    rule: GaussLegendre,
}

const ODE_NODES: usize = 512;

/// Builds the profile on `[eps, s_max]`.
pub fn ode_profile(p: f64, eps: f64, s_max: f64) -> Result<OdeSolution, ExactError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(ExactError::InvalidExponent(p));
    }
    if !(eps > 0.0 && eps < s_max && s_max.is_finite()) {
        return Err(ExactError::InvalidRange { eps, s_max });
    }
    let mut sol = OdeSolution {
        p,
        eps,
        lambda: 2.0 / (p - 1.0),
        tau: Vec::with_capacity(ODE_NODES + 1),
        v: Vec::with_capacity(ODE_NODES + 1),
        rule: GaussLegendre::new(12),
    };
    let tmax = (s_max - eps).sqrt();
    let mut acc = 0.0;
    sol.tau.push(0.0);
    sol.v.push(0.0);
    for i in 1..=ODE_NODES {
        let (a, b) = (tmax * (i - 1) as f64 / ODE_NODES as f64, tmax * i as f64 / ODE_NODES as f64);
        acc += quad::adaptive(|t| sol.dv_dtau(t), a, b, 1e-14 * (1.0 + acc), 30)?;
        sol.tau.push(b);
        sol.v.push(acc);
    }
    Ok(sol)
}

impl OdeSolution {
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn s_max(&self) -> f64 {
        let t = *self.tau.last().unwrap();
        self.eps + t * t
    }
    /// Largest `|r|` at which `u` is tabulated.
    pub fn r_max(&self) -> f64 {
        *self.v.last().unwrap()
    }

    fn dv_dtau(&self, t: f64) -> f64 {
        let (p, eps) = (self.p, self.eps);
        if t == 0.0 {
            return 2.0 / (self.lambda * (p - 1.0) * eps.powf(-p)).sqrt();
        }
        let x = t * t / eps;
        let bracket = -eps.powf(1.0 - p) * ((1.0 - p) * x.ln_1p()).exp_m1();
        2.0 * t / (self.lambda * bracket).sqrt()
    }

    /// `v(s) = ∫_ε^s dt/√(λ(ε^{1−p} − t^{1−p}))`.
    pub fn v(&self, s: f64) -> Option<f64> {
        if !(s >= self.eps) || s > self.s_max() * (1.0 + 1e-15) {
            return None;
        }
        Some(self.v_of_tau((s - self.eps).max(0.0).sqrt()))
    }

    fn v_of_tau(&self, t: f64) -> f64 {
        let n = self.tau.len() - 1;
        let h = self.tau[n] / n as f64;
        let i = ((t / h).floor() as usize).min(n - 1);
        self.v[i] + self.rule.integrate(|q| self.dv_dtau(q), self.tau[i], t)
    }

    fn tau_of_r(&self, r: f64) -> Option<f64> {
        let r = r.abs();
        if r > self.r_max() * (1.0 + 1e-15) {
            return None;
        }
        if r == 0.0 {
            return Some(0.0);
        }
        let i = self.v.partition_point(|&v| v < r).clamp(1, self.v.len() - 1);
        let (t0, t1) = (self.tau[i - 1], self.tau[i]);
        let (v0, v1) = (self.v[i - 1], self.v[i]);
        let mut t = t0 + (t1 - t0) * (r - v0) / (v1 - v0);
        for _ in 0..50 {
            let dt = (self.v_of_tau(t) - r) / self.dv_dtau(t);
            t = (t - dt).clamp(t0, t1);
            if dt.abs() <= 1e-15 * (1.0 + t) {
                break;
            }
        }
        Some(t)
    }

    /// `u(r)`, even in `r`; `None` beyond the tabulated range.
    pub fn u(&self, r: f64) -> Option<f64> {
        self.tau_of_r(r).map(|t| self.eps + t * t)
    }

    /// `u′(r)` from the tabulated inverse.
    pub fn du(&self, r: f64) -> Option<f64> {
        let t = self.tau_of_r(r)?;
        Some(r.signum() * 2.0 * t / self.dv_dtau(t))
    }
}

/// Extends the profile to `u(x) = U(x_axis)`; cells beyond `r_max` are an error.
pub fn ode_field(sol: &OdeSolution, grid: &Grid, axis: usize) -> Result<ScalarField, ExactError> {
    if axis >= grid.dim() {
        return Err(ExactError::InvalidDimension(format!("axis {axis} ≥ dimension {}", grid.dim())));
    }
    let reach = grid.lower()[axis].abs().max(grid.upper()[axis].abs());
    if reach > sol.r_max() {
        return Err(ExactError::InvalidRange { eps: sol.eps, s_max: sol.s_max() });
    }
    Ok(ScalarField::from_fn(grid.clone(), "ode", |x| sol.u(x[axis]).unwrap_or(f64::NAN)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_coefficient() {
        let s = HomogeneousSolution::radial(2, 3.0).unwrap();
        assert!((s.coeff() - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.value(&[1.0, 0.0]) - 1.414214).abs() < 1e-6);
        assert_eq!(s.value(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn three_dimensional_coefficient() {
        let s = HomogeneousSolution::radial(3, 3.0).unwrap();
        assert!((s.coeff() - 1.074570).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(HomogeneousSolution::radial(2, 1.0), Err(ExactError::InvalidExponent(1.0)));
        assert!(HomogeneousSolution::cylindrical(2, 3.0, vec![vec![1.0, 0.0]]).is_err());
        assert!(HomogeneousSolution::cylindrical(3, 3.0, vec![vec![1.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn p3_profile_matches_closed_form() {
        // u² = ε² + r²/ε² solves u″ = u⁻³ with u(0) = ε.
        let eps = 0.1;
        let sol = ode_profile(3.0, eps, 20.0).unwrap();
        assert_eq!(sol.u(0.0), Some(eps));
        assert_eq!(sol.v(eps), Some(0.0));
        for &r in &[1e-3, 0.01, 0.05, 0.3, 1.0] {
            let exact = (eps * eps + r * r / (eps * eps)).sqrt();
            assert!((sol.u(r).unwrap() - exact).abs() < 1e-10 * exact, "r = {r}");
        }
    }

    #[test]
    fn profile_range_errors() {
        assert!(matches!(ode_profile(3.0, 1.0, 0.5), Err(ExactError::InvalidRange { .. })));
        let sol = ode_profile(2.0, 0.2, 3.0).unwrap();
        assert!(sol.u(sol.r_max() * 1.01).is_none());
    }
}
