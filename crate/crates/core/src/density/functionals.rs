use serde::Serialize;

use super::{Cutoff, DensityError, DensityOptions};
use crate::exact::alpha;
use crate::field::{gradient, ScalarField, VectorField};

/// `(D, D_f, F, H, I_f, θ, θ_f)` at one center and radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalValues {
    pub x: Vec<f64>,
    pub r: f64,
    pub d: f64,
    pub d_f: f64,
    pub f: f64,
    pub h: f64,
    /// `D_f/H`; `None` when `H = 0`.
    pub i_f: Option<f64>,
    pub theta: f64,
    pub theta_f: f64,
    /// `−2r^{−2α−n−1}∫|(y−x)·∇u − αu|²φ̇_{x,r}`, the exact `dθ/dr` for
    /// solutions with `f ≡ 0`.
    pub dtheta_dr_identity: f64,
    /// Fraction of the support of `φ_{x,r}` outside the grid box.
    pub clipped_fraction: f64,
    pub alpha: f64,
    pub p: f64,
}

/// A field prepared for repeated functional evaluation: the gradient is
/// computed once and `u⁻ᵖ`-type terms use `max(u, u_floor)`.
#[derive(Debug, Clone)]
pub struct DensityField<'a> {
    u: &'a ScalarField,
    f: Option<&'a ScalarField>,
    grad: VectorField,
    p: f64,
    alpha: f64,
    u_floor: f64,
    cutoff: Cutoff,
}

const RHO_NODES: usize = 32;
const RHO_SPAN: f64 = 64.0;

impl<'a> DensityField<'a> {
    pub fn new(
        u: &'a ScalarField,
        f: Option<&'a ScalarField>,
        p: f64,
        opts: &DensityOptions,
    ) -> Result<Self, DensityError> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(DensityError::InvalidExponent(p));
        }
        if let Some(f) = f {
            if !f.same_grid(u) {
                return Err(DensityError::GridMismatch);
            }
        }
        let a = alpha(p);
        let f = f.filter(|f| f.values().iter().any(|&v| v != 0.0));
        if f.is_some() && u.grid().dim() as f64 + 2.0 * a - 2.0 <= 0.0 {
            return Err(DensityError::DegenerateDimension(u.grid().dim()));
        }
        Ok(Self {
            u,
            f,
            grad: gradient(u)?,
            p,
            alpha: a,
            u_floor: opts.u_floor(u.grid().h(), a),
            cutoff: Cutoff,
        })
    }

    pub fn u(&self) -> &ScalarField {
        self.u
    }
    pub fn forcing(&self) -> Option<&ScalarField> {
        self.f
    }
    pub fn grad(&self) -> &VectorField {
        &self.grad
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn u_floor(&self) -> f64 {
        self.u_floor
    }
    pub fn dim(&self) -> usize {
        self.u.grid().dim()
    }
    pub fn h(&self) -> f64 {
        self.u.grid().h()
    }

    /// Smallest radius treated as resolved.
    pub fn r_trust(&self) -> f64 {
        4.0 * self.h()
    }

    /// Largest `r` whose cutoff support stays inside the box around `x`.
    pub fn r_fit(&self, x: &[f64]) -> f64 {
        self.u.grid().distance_to_boundary(x) / Cutoff::SUPPORT.sqrt()
    }

    fn check_point(&self, x: &[f64], r: f64) -> Result<(), DensityError> {
        if x.len() != self.dim() {
            return Err(DensityError::PointDimension { expected: self.dim(), got: x.len() });
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(DensityError::InvalidRadius(r));
        }
        Ok(())
    }

    /// All functionals at `(x, r)` in a single pass over the support ball.
    pub fn evaluate(&self, x: &[f64], r: f64) -> Result<FunctionalValues, DensityError> {
        self.check_point(x, r)?;
        let g = self.u.grid();
        let n = g.dim();
        let (p, a) = (self.p, self.alpha);
        let uv = self.u.values();
        let fv = self.f.map(|f| f.values());
        let inv_r2 = 1.0 / (r * r);
        let floor = self.u_floor;
        let (mut sd, mut sfu, mut sf, mut sh, mut sc, mut sk) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let mut cells = 0usize;
        let inside = g.visit_ball(x, self.cutoff.reach(r), |c, off, d2| {
            cells += 1;
            let t = d2 * inv_r2;
            let (phi, dphi) = (self.cutoff.phi(t), self.cutoff.dphi(t));
            let u = uv[c];
            let grad = self.grad.at(c);
            let g2: f64 = grad.iter().map(|v| v * v).sum();
            let radial: f64 = grad.iter().zip(off).map(|(a, b)| a * b).sum();
            let up = powf_1mp(u.max(floor), p);
            sd += (g2 + up) * phi;
            sf += (0.5 * g2 - up / (p - 1.0)) * phi;
            sh += u * u * dphi;
            let hom = radial - a * u;
            sk += hom * hom * dphi;
            if let Some(fv) = fv {
                sfu += fv[c] * u * phi;
                sc += hom * fv[c] * phi;
            }
        });
        if cells == 0 {
            return Err(DensityError::EmptyIntersection);
        }
        let vol = g.cell_volume();
        let nf = n as f64;
        let scale = r.powf(2.0 - nf) * vol;
        let d = sd * scale;
        let d_f = (sd + sfu) * scale;
        let f = sf * scale;
        let h = -sh * r.powf(-nf) * vol;
        let theta = r.powf(-2.0 * a) * (f - a * h);
        let mut theta_f = theta;
        if self.f.is_some() {
            let m = nf + 2.0 * a - 2.0;
            theta_f -= r.powf(2.0 - 2.0 * a - nf) / m * sc * vol;
            theta_f -= 2.0 / (m * m) * self.rho_integral(x, r);
        }
        Ok(FunctionalValues {
            x: x.to_vec(),
            r,
            d,
            d_f,
            f,
            h,
            i_f: (h > 0.0).then(|| d_f / h),
            theta,
            theta_f,
            dtheta_dr_identity: -2.0 * r.powf(-2.0 * a - nf - 1.0) * sk * vol,
            clipped_fraction: 1.0 - inside,
            alpha: a,
            p,
        })
    }

    /// `G(ρ) = ∫|f|²|y−x|⁴φ̇_{x,ρ}`.
    fn forcing_moment(&self, x: &[f64], rho: f64) -> f64 {
        let Some(f) = self.f else { return 0.0 };
        let fv = f.values();
        let inv = 1.0 / (rho * rho);
        let mut acc = 0.0;
        self.u.grid().visit_ball(x, self.cutoff.reach(rho), |c, _, d2| {
            acc += fv[c] * fv[c] * d2 * d2 * self.cutoff.dphi(d2 * inv);
        });
        acc * self.u.grid().cell_volume()
    }

    /// `∫₀^r ρ^{−2α−n−1} G(ρ) dρ`: trapezoid on a geometric ladder over
    /// `[r/64, r]` plus a power-law tail fitted to the two smallest nodes.
    fn rho_integral(&self, x: &[f64], r: f64) -> f64 {
        let e = -2.0 * self.alpha - self.dim() as f64 - 1.0;
        let lo = r / RHO_SPAN;
        let q = RHO_SPAN.powf(1.0 / (RHO_NODES - 1) as f64);
        let rho: Vec<f64> = (0..RHO_NODES).map(|j| lo * q.powi(j as i32)).collect();
        let g: Vec<f64> = rho.iter().map(|&s| s.powf(e) * self.forcing_moment(x, s)).collect();
        let mut acc = 0.0;
        for j in 1..RHO_NODES {
            acc += 0.5 * (g[j] + g[j - 1]) * (rho[j] - rho[j - 1]);
        }
        if g[0] != 0.0 && g[1] != 0.0 && g[0].signum() == g[1].signum() {
            let slope = (g[1] / g[0]).ln() / q.ln();
            if slope > -1.0 {
                acc += g[0] * rho[0] / (slope + 1.0);
            }
        }
        acc
    }

    /// `r^{−2α−n}∫_{B_{4r}(x)}|(y−x)·∇u − αu|²`.
    pub fn homogeneity_defect(&self, x: &[f64], r: f64) -> Result<f64, DensityError> {
        self.check_point(x, r)?;
        let uv = self.u.values();
        let mut acc = 0.0;
        let mut cells = 0usize;
        self.u.grid().visit_ball(x, 4.0 * r, |c, off, _| {
            cells += 1;
            let radial: f64 = self.grad.at(c).iter().zip(off).map(|(a, b)| a * b).sum();
            let v = radial - self.alpha * uv[c];
            acc += v * v;
        });
        if cells == 0 {
            return Err(DensityError::EmptyIntersection);
        }
        let n = self.dim() as f64;
        Ok(r.powf(-2.0 * self.alpha - n) * acc * self.u.grid().cell_volume())
    }

    /// Right-hand side of the `θ_f − θ` estimate with unit constant:
    /// `[(r^{2−2α−n}∫|∇u|²)^{½} + (r^{−2α−n}∫u²)^{½}]·(r^{4−2α−n}∫|f|²)^{½}
    ///  + ∫₀^r ρ^{−2α−n+3}∫_{B_{10ρ}}|f|² dρ`, balls of radius `√10·r`.
    pub fn theta_gap_bound(&self, x: &[f64], r: f64) -> Result<f64, DensityError> {
        self.check_point(x, r)?;
        let Some(f) = self.f else { return Ok(0.0) };
        let n = self.dim() as f64;
        let a = self.alpha;
        let (uv, fv) = (self.u.values(), f.values());
        let vol = self.u.grid().cell_volume();
        let (mut g2, mut u2, mut f2) = (0.0, 0.0, 0.0);
        self.u.grid().visit_ball(x, self.cutoff.reach(r), |c, _, _| {
            g2 += self.grad.norm_sq(c);
            u2 += uv[c] * uv[c];
            f2 += fv[c] * fv[c];
        });
        let first = ((r.powf(2.0 - 2.0 * a - n) * g2 * vol).sqrt()
            + (r.powf(-2.0 * a - n) * u2 * vol).sqrt())
            * (r.powf(4.0 - 2.0 * a - n) * f2 * vol).sqrt();
        let lo = r / RHO_SPAN;
        let q = RHO_SPAN.powf(1.0 / (RHO_NODES - 1) as f64);
        let mut prev: Option<(f64, f64)> = None;
        let mut second = 0.0;
        for j in 0..RHO_NODES {
            let rho = lo * q.powi(j as i32);
            let mut s = 0.0;
            self.u.grid().visit_ball(x, self.cutoff.reach(rho), |c, _, _| s += fv[c] * fv[c]);
            let gval = rho.powf(3.0 - 2.0 * a - n) * s * vol;
            if let Some((pr, pg)) = prev {
                second += 0.5 * (gval + pg) * (rho - pr);
            }
            prev = Some((rho, gval));
        }
        Ok(first + second)
    }
}

/// `u^{1−p}`, with integer fast paths.
pub(crate) fn powf_1mp(u: f64, p: f64) -> f64 {
    if p == 3.0 {
        1.0 / (u * u)
    } else if p == 2.0 {
        1.0 / u
    } else {
        u.powf(1.0 - p)
    }
}

/// `u^{−p}`, with integer fast paths.
pub(crate) fn powf_mp(u: f64, p: f64) -> f64 {
    if p == 3.0 {
        1.0 / (u * u * u)
    } else if p == 2.0 {
        1.0 / (u * u)
    } else {
        u.powf(-p)
    }
}

/// Free-function form of [`DensityField::evaluate`].
pub fn evaluate_functionals(
    u: &ScalarField,
    f: Option<&ScalarField>,
    x: &[f64],
    r: f64,
    p: f64,
) -> Result<FunctionalValues, DensityError> {
    DensityField::new(u, f, p, &DensityOptions::default())?.evaluate(x, r)
}

/// Free-function form of [`DensityField::homogeneity_defect`].
pub fn homogeneity_defect(u: &ScalarField, x: &[f64], r: f64, p: f64) -> Result<f64, DensityError> {
    DensityField::new(u, None, p, &DensityOptions::default())?.homogeneity_defect(x, r)
}
