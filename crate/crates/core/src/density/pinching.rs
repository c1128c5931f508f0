use serde::Serialize;

use super::{DensityError, DensityField};

/// Outcome of the dyadic density-drop search on `[σs, s]`.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicDrop {
    /// `s/2^{i₀}` with the smallest drop.
    pub s_x: f64,
    /// `θ_f(s_x) − θ_f(s_x/2)`.
    pub drop: f64,
    /// All drops `θ_f(s/2^i) − θ_f(s/2^{i+1})`, `i = 0..ℓ`.
    pub drops: Vec<f64>,
    /// `θ_f(s) − θ_f(s/2^ℓ)`.
    pub total: f64,
    /// `ℓ` with `2^{−ℓ−1} ≤ σ < 2^{−ℓ}`.
    pub levels: u32,
    /// Smallest `C ≥ 0` with `drop ≤ −C/log σ`.
    pub fitted_constant: f64,
}

impl DensityField<'_> {
    /// `W_f(x, s) = θ_f(x, 2s) − θ_f(x, s)`.
    pub fn pinch_w(&self, x: &[f64], s: f64) -> Result<f64, DensityError> {
        Ok(self.evaluate(x, 2.0 * s)?.theta_f - self.evaluate(x, s)?.theta_f)
    }

    /// Finds the dyadic scale in `[σs, s]` where `θ_f` drops least.
    pub fn dyadic_drop(&self, x: &[f64], s: f64, sigma: f64) -> Result<DyadicDrop, DensityError> {
        if !(sigma > 0.0 && sigma < 0.5) {
            return Err(DensityError::InvalidLadder(format!("σ = {sigma} must lie in (0, 1/2)")));
        }
        let levels = (-sigma.log2()).floor() as u32;
        let radii: Vec<f64> = (0..=levels).rev().map(|i| s / 2f64.powi(i as i32)).collect();
        let vals = self.evaluate_many(x, &radii)?;
        let theta: Vec<f64> = vals.iter().rev().map(|v| v.theta_f).collect();
        let drops: Vec<f64> = theta.windows(2).map(|w| w[0] - w[1]).collect();
        let (i0, &drop) = drops
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .ok_or(DensityError::LadderTooShort { needed: 2, available: 1 })?;
        Ok(DyadicDrop {
            s_x: s / 2f64.powi(i0 as i32),
            drop,
            total: theta[0] - theta[theta.len() - 1],
            levels,
            fitted_constant: (drop * -sigma.ln()).max(0.0),
            drops,
        })
    }
}
