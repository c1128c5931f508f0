use rayon::prelude::*;
use serde::Serialize;

use super::{DensityError, DensityField, FunctionalValues};

/// Functionals along an increasing radius ladder at a fixed center.
#[derive(Debug, Clone, Serialize)]
pub struct DensityProfile {
    pub x: Vec<f64>,
    pub radii: Vec<f64>,
    pub values: Vec<FunctionalValues>,
    /// `max_i max(0, θ_f(r_i) − θ_f(r_{i+1}))`.
    pub monotone_defect: f64,
    /// Radii whose cutoff support left the box were dropped.
    pub truncated: bool,
    /// `W_f(r_i) = θ_f(2r_i) − θ_f(r_i)` where `2r_i` is evaluable.
    pub w_f: Vec<Option<f64>>,
    /// Finite-difference `dθ/dr` against the exact identity, when `f ≡ 0`.
    pub identity: Option<MonotoneIdentity>,
}

/// Both sides of `dθ/dr = −2r^{−2α−n−1}∫|(y−x)·∇u−αu|²φ̇` at interior ladder nodes.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneIdentity {
    pub radii: Vec<f64>,
    pub finite_difference: Vec<f64>,
    pub identity: Vec<f64>,
    pub max_abs_defect: f64,
}

/// Geometric ladder with `count` nodes from `lo` to `hi` inclusive.
pub fn geometric_ladder(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>, DensityError> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 || (count == 1 && hi != lo) {
        return Err(DensityError::InvalidLadder(format!("{lo}:{hi}:{count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let q = (hi / lo).powf(1.0 / (count - 1) as f64);
    let mut v: Vec<f64> = (0..count).map(|i| lo * q.powi(i as i32)).collect();
    v[count - 1] = hi;
    Ok(v)
}

/// Three-point derivative on a nonuniform grid, exact for quadratics.
pub(crate) fn nonuniform_derivative(x: [f64; 3], y: [f64; 3]) -> f64 {
    let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
    -h1 / (h0 * (h0 + h1)) * y[0] + (h1 - h0) / (h0 * h1) * y[1] + h0 / (h1 * (h0 + h1)) * y[2]
}

fn check_ladder(radii: &[f64]) -> Result<(), DensityError> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(DensityError::InvalidLadder("radii must be positive".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DensityError::InvalidLadder("radii must be strictly increasing".into()));
    }
    Ok(())
}

impl DensityField<'_> {
    /// Evaluates the ladder in parallel; results are order-preserving.
    pub fn evaluate_many(&self, x: &[f64], radii: &[f64]) -> Result<Vec<FunctionalValues>, DensityError> {
        radii.par_iter().map(|&r| self.evaluate(x, r)).collect()
    }

    pub fn profile(&self, x: &[f64], radii: &[f64]) -> Result<DensityProfile, DensityError> {
        check_ladder(radii)?;
        let r_fit = self.r_fit(x);
        let kept: Vec<f64> = radii.iter().copied().filter(|&r| r <= r_fit).collect();
        let truncated = kept.len() < radii.len();
        if kept.is_empty() {
            return Err(DensityError::LadderTooShort { needed: 1, available: 0 });
        }
        let mut all = kept.clone();
        all.extend(kept.iter().map(|r| 2.0 * r).filter(|&r| r <= r_fit));
        all.sort_by(|a, b| a.total_cmp(b));
        all.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
        let evaluated = self.evaluate_many(x, &all)?;
        let lookup = |r: f64| {
            let i = all.partition_point(|&v| v < r * (1.0 - 1e-14));
            (i < all.len() && (all[i] - r).abs() <= 1e-14 * r).then(|| &evaluated[i])
        };
        let values: Vec<FunctionalValues> = kept.iter().map(|&r| lookup(r).unwrap().clone()).collect();
        let w_f = kept
            .iter()
            .zip(&values)
            .map(|(&r, v)| lookup(2.0 * r).map(|w| w.theta_f - v.theta_f))
            .collect();
        let monotone_defect = values
            .windows(2)
            .map(|w| (w[0].theta_f - w[1].theta_f).max(0.0))
            .fold(0.0, f64::max);
        let identity = (self.forcing().is_none() && values.len() >= 3).then(|| {
            let mut out = MonotoneIdentity {
                radii: vec![],
                finite_difference: vec![],
                identity: vec![],
                max_abs_defect: 0.0,
            };
            for w in values.windows(3) {
                let fd = nonuniform_derivative(
                    [w[0].r, w[1].r, w[2].r],
                    [w[0].theta, w[1].theta, w[2].theta],
                );
                out.radii.push(w[1].r);
                out.finite_difference.push(fd);
                out.identity.push(w[1].dtheta_dr_identity);
                out.max_abs_defect = out.max_abs_defect.max((fd - w[1].dtheta_dr_identity).abs());
            }
            out
        });
        Ok(DensityProfile { x: x.to_vec(), radii: kept, values, monotone_defect, truncated, w_f, identity })
    }

    /// Max over interior ladder nodes of `|dH/dr − D_f/r| / |D_f/r|`, with
    /// `dH/dr` by three-point differences.
    pub fn hd_identity(&self, x: &[f64], radii: &[f64]) -> Result<HdIdentity, DensityError> {
        check_ladder(radii)?;
        if radii.len() < 3 {
            return Err(DensityError::LadderTooShort { needed: 3, available: radii.len() });
        }
        let vals = self.evaluate_many(x, radii)?;
        let mut out = HdIdentity { radii: vec![], dh_dr: vec![], df_over_r: vec![], max_relative_defect: 0.0 };
        for w in vals.windows(3) {
            let lhs = nonuniform_derivative([w[0].r, w[1].r, w[2].r], [w[0].h, w[1].h, w[2].h]);
            let rhs = w[1].d_f / w[1].r;
            out.radii.push(w[1].r);
            out.dh_dr.push(lhs);
            out.df_over_r.push(rhs);
            let rel = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
            out.max_relative_defect = out.max_relative_defect.max(rel);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HdIdentity {
    pub radii: Vec<f64>,
    pub dh_dr: Vec<f64>,
    pub df_over_r: Vec<f64>,
    pub max_relative_defect: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_derivative_exact_on_quadratics() {
        let x = [0.1, 0.13, 0.2];
        let y = x.map(|t| 3.0 * t * t - t + 2.0);
        assert!((nonuniform_derivative(x, y) - (6.0 * 0.13 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn ladder_endpoints() {
        let l = geometric_ladder(0.05, 0.3, 16).unwrap();
        assert_eq!(l.len(), 16);
        assert_eq!(l[0], 0.05);
        assert_eq!(l[15], 0.3);
        assert!(geometric_ladder(0.0, 1.0, 3).is_err());
    }
}
