use serde::Serialize;

use super::{DensityError, DensityField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuptureClass {
    RupturelikeDensityBounded,
    PositiveDensityDiverging,
}

/// Trend of `θ_f` and `I_f` over a dyadic ladder from `r` down to the
/// smallest resolved radius.
#[derive(Debug, Clone, Serialize)]
pub struct RuptureReport {
    pub class: RuptureClass,
    /// Increasing radii.
    pub radii: Vec<f64>,
    pub theta_f: Vec<f64>,
    pub i_f: Vec<Option<f64>>,
    /// `inf_{B_r(x)} u` over cell centers.
    pub inf_u: f64,
    /// `inf_{B_r(x)} u ≥ r^α`.
    pub above_r_alpha: bool,
    /// `I_f` nonincreasing as the radius shrinks.
    pub frequency_decreasing: bool,
    /// `θ_f` at the smallest radius, an approximation to the limit density.
    pub density_estimate: f64,
}

impl DensityField<'_> {
    /// A point is `PositiveDensityDiverging` when `θ_f` at the smallest
    /// resolved radius is below `−C_star` or `I_f` there is below `α`
    /// (half the homogeneous value `2α`).
    pub fn classify(&self, x: &[f64], r: f64, c_star: f64) -> Result<RuptureReport, DensityError> {
        let lo = self.r_trust();
        let mut radii = vec![];
        let mut s = r;
        while s >= lo * (1.0 - 1e-12) {
            radii.push(s);
            s *= 0.5;
        }
        if radii.len() < 3 {
            return Err(DensityError::LadderTooShort { needed: 3, available: radii.len() });
        }
        radii.reverse();
        let vals = self.evaluate_many(x, &radii)?;
        let theta_f: Vec<f64> = vals.iter().map(|v| v.theta_f).collect();
        let i_f: Vec<Option<f64>> = vals.iter().map(|v| v.i_f).collect();
        let uv = self.u().values();
        let mut inf_u = f64::INFINITY;
        self.u().grid().visit_ball(x, r, |c, _, _| inf_u = inf_u.min(uv[c]));
        let frequency_decreasing =
            i_f.windows(2).all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a <= b));
        let small_i = i_f[0].map_or(true, |i| i < self.alpha());
        let class = if theta_f[0] < -c_star || small_i {
            RuptureClass::PositiveDensityDiverging
        } else {
            RuptureClass::RupturelikeDensityBounded
        };
        Ok(RuptureReport {
            class,
            density_estimate: theta_f[0],
            radii,
            theta_f,
            i_f,
            inf_u,
            above_r_alpha: inf_u >= r.powf(self.alpha()),
            frequency_decreasing,
        })
    }
}
